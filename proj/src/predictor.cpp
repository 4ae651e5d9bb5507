#include "qpspec/predictor.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qpspec/errors.hpp"

namespace qpspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// -B + sqrt(B^2 + C) without cancellation.
double root_plus(double B, double C) {
    const double d = B * B + C;
    if (d < 0.0) return kNaN;
    const double r = std::sqrt(d);
    return B > 0.0 ? C / (B + r) : r - B;
}

double pair_delta0(const ResonantPair& p) {
    if (p.delta0 > 0.0) return p.delta0;
    return 0.5 * std::min({p.profile.sh, p.profile.sv0, p.profile.svpi});
}

// Dimensionless copy: lengths divided by the returned scale.
ScenarioInputs normalized(const ScenarioInputs& s, double& scale) {
    scale = std::max({s.tvp, std::sqrt(s.thp), std::abs(s.Delta)});
    ScenarioInputs u = s;
    u.tvp /= scale;
    u.tvm /= scale;
    u.thp /= scale * scale;
    u.thm /= scale * scale;
    u.Delta /= scale;
    u.Ebar = 0.0;
    return u;
}

double L_of(const ScenarioInputs& s, double x) {
    return std::abs(x - s.Delta) * (s.tvp - s.tvm) + std::abs(x + s.Delta) * (s.tvp + s.tvm);
}
double F_of(const ScenarioInputs& s, double x) { return 0.5 * (s.thp - s.thm) + L_of(s, x); }
double G_of(const ScenarioInputs& s, double x) {
    return 0.5 * (s.thp + s.thm) - (x * x - s.Delta * s.Delta);
}

void check_inputs(const ScenarioInputs& s) {
    if (!(s.thp > s.thm && s.thm > 0.0 && s.tvp > 0.0 && s.tvp >= std::abs(s.tvm) &&
          s.Delta >= 0.0))
        throw Error(Errc::InvalidRange, "scenario inputs violate positivity");
}

ScenarioEndpoints shift(ScenarioEndpoints e, double scale, double Ebar) {
    for (double* v : {&e.pi_out, &e.pi_in, &e.zero_in, &e.zero_out, &e.g_minus, &e.g_plus})
        *v = Ebar + scale * *v;
    return e;
}

double solve(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    std::uintmax_t it = 300;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                               boost::math::tools::eps_tolerance<double>(53), it);
    return 0.5 * (r.first + r.second);
}

}  // namespace

const char* label_name(IntervalLabel l) {
    switch (l) {
    case IntervalLabel::I0: return "I0";
    case IntervalLabel::Ipi: return "Ipi";
    case IntervalLabel::Il: return "Il";
    case IntervalLabel::Ir: return "Ir";
    case IntervalLabel::Union: return "I0+Ipi";
    }
    return "?";
}

const char* class_name(SpectralClass c) {
    switch (c) {
    case SpectralClass::Singular: return "singular";
    case SpectralClass::AcCandidate: return "ac-candidate";
    case SpectralClass::Undetermined: return "undetermined";
    }
    return "?";
}

ScenarioEndpoints scenario_endpoints(const ScenarioInputs& in) {
    check_inputs(in);
    double sc;
    const ScenarioInputs s = normalized(in, sc);
    const double p = s.tvp, m = s.tvm, D = s.Delta, D2 = D * D;
    ScenarioEndpoints e;
    e.zero_out = p + std::sqrt(p * p + D2 + 2 * D * m + s.thp);
    e.pi_out = -p - std::sqrt(p * p + D2 - 2 * D * m + s.thp);
    if (s.thm >= 2 * D * (p + m))
        e.zero_in = root_plus(p, D2 - 2 * D * m + s.thm);
    else
        e.zero_in = root_plus(m, D2 + s.thm - 2 * D * p);
    if (s.thm >= 2 * D * (p - m))
        e.pi_in = -root_plus(p, D2 + 2 * D * m + s.thm);
    else
        e.pi_in = -root_plus(-m, D2 + s.thm - 2 * D * p);
    // Each radical holds only on the piece of the line it was derived on:
    // left of -D, between -D and D, or right of D.
    const double tol = 1e-12 * (p + std::sqrt(s.thp) + D);
    if (s.thm < 2 * D * (p + m) && !(e.zero_in >= -D - tol && e.zero_in <= D + tol)) e.zero_in = kNaN;
    if (s.thm < 2 * D * (p - m) && !(e.pi_in >= -D - tol && e.pi_in <= D + tol)) e.pi_in = kNaN;
    e.inner_empty = std::isnan(e.zero_in) || std::isnan(e.pi_in) || !(e.pi_in < e.zero_in);
    e.g_plus = std::sqrt(D2 + 0.5 * (s.thp + s.thm));
    e.g_minus = -e.g_plus;
    return shift(e, sc, in.Ebar);
}

ScenarioEndpoints scenario_endpoints_numeric(const ScenarioInputs& in) {
    check_inputs(in);
    double sc;
    const ScenarioInputs s = normalized(in, sc);
    auto h = [&](double x) { return F_of(s, x) - std::abs(G_of(s, x)); };
    ScenarioEndpoints e;
    e.g_plus = std::sqrt(s.Delta * s.Delta + 0.5 * (s.thp + s.thm));
    e.g_minus = -e.g_plus;
    double X = 2.0 * e.g_plus + 1.0;
    while (h(X) >= 0.0) X *= 2.0;
    e.zero_out = solve(h, e.g_plus, X);
    X = 2.0 * e.g_plus + 1.0;
    while (h(-X) >= 0.0) X *= 2.0;
    e.pi_out = solve(h, -X, e.g_minus);
    // F - G is convex between the zeros of G.
    auto mn = boost::math::tools::brent_find_minima(h, e.g_minus, e.g_plus, 60);
    if (!(mn.second < 0.0))
        throw Error(Errc::DegenerateRoots, "inner interval is empty: F > |G| between the zeros of G");
    e.zero_in = solve(h, mn.first, e.g_plus);
    e.pi_in = solve(h, e.g_minus, mn.first);
    return shift(e, sc, in.Ebar);
}

bool in_sigma(const ScenarioInputs& in, double E, double rel_tol) {
    double sc;
    const ScenarioInputs s = normalized(in, sc);
    const double x = (E - in.Ebar) / sc;
    const double F = F_of(s, x), G = G_of(s, x);
    return std::abs(G) <= F + rel_tol * std::max({1.0, std::abs(F), std::abs(G)});
}

ScenarioInputs scenario_inputs(const ResonantPair& p, double LambdaN) {
    if (!(LambdaN > 1.0)) throw Error(Errc::InvalidRange, "LambdaN must exceed 1");
    const auto& a = p.profile;
    const double ia = 1.0 / std::abs(p.gamma0), ib = 1.0 / std::abs(p.gammapi);
    // K = tau^2 |gamma0 gammapi| = 4 |Phi0' Phipi'| / (eps^2 th).
    const double invK = p.epsilon * p.epsilon * a.th / (4.0 * std::abs(a.dphi0 * a.dphipi));
    ScenarioInputs s;
    s.tvp = 0.5 * (ia + ib);
    s.tvm = 0.5 * (ia - ib);
    s.thp = 2.0 * (LambdaN + 1.0) * invK;
    s.thm = 2.0 * (LambdaN - 1.0) * invK;
    s.Delta = p.Delta;
    s.Ebar = p.Ebar;
    return s;
}

Regime pair_regime(const ResonantPair& p, double dt, double dr) {
    const double d0 = pair_delta0(p);
    return classify_actions(p.profile.sh, p.profile.sv0, p.profile.svpi, dt < 0 ? 0.05 * d0 : dt,
                            dr < 0 ? 0.05 * d0 : dr);
}

SpectralPrediction predict_large_tau(const ResonantPair& p, int samples) {
    SpectralPrediction out;
    out.regime = pair_regime(p);
    if (out.regime != Regime::TauLarge) {
        std::ostringstream os;
        os << "large-tau prediction needs TauLarge, pair is " << regime_name(out.regime);
        throw Error(Errc::RegimeMismatch, os.str());
    }
    const double eps = p.epsilon;
    const double r0 = 1.0 / std::abs(p.gamma0), rp = 1.0 / std::abs(p.gammapi);
    PredictedInterval i0{p.E0 - r0, p.E0 + r0, IntervalLabel::I0, eps / (2 * kPi)};
    PredictedInterval ip{p.Epi - rp, p.Epi + rp, IntervalLabel::Ipi, eps / (2 * kPi)};
    if (ip.lo < i0.lo) std::swap(i0, ip);
    if (ip.lo <= i0.hi) {
        out.intervals.push_back({i0.lo, std::max(i0.hi, ip.hi), IntervalLabel::Union, eps / kPi});
        out.scenario = "overlapping";
    } else {
        out.intervals = {i0, ip};
        out.gap = Interval{i0.hi, ip.lo};
        out.scenario = "disjoint";
    }
    const double lt = log_tau(p.profile);
    const double lo = out.intervals.front().lo, hi = out.intervals.back().hi;
    const double pad = 0.25 * (hi - lo);
    for (int i = 0; i < samples; ++i) {
        const double E = samples == 1 ? p.Ebar : lo - pad + (hi - lo + 2 * pad) * i / (samples - 1);
        const double x0 = p.gamma0 * (E - p.E0), xp = p.gammapi * (E - p.Epi);
        ProfileSample smp;
        smp.E = E;
        smp.Theta = eps / kPi * (lt + 0.5 * std::log1p(std::abs(x0) + std::abs(xp)));
        smp.lambda = kNaN;
        smp.cls = SpectralClass::Singular;
        out.samples.push_back(smp);
    }
    out.diagnostics = {{"log_tau", lt}, {"len_I0", 2 * r0}, {"len_Ipi", 2 * rp}};
    return out;
}

SmallTauLyapunov lyapunov_small_tau(const ResonantPair& p, double E, double LambdaN, double c) {
    const ScenarioInputs s = scenario_inputs(p, LambdaN);
    ScenarioInputs sr = s;
    if (sr.Delta < 0.0) {
        sr.Delta = -sr.Delta;
        sr.tvm = -sr.tvm;
        E = 2.0 * sr.Ebar - E;
    }
    if (!in_sigma(sr, E, 1e-9)) {
        std::ostringstream os;
        os << "E=" << E << " is outside the set |G| <= F";
        throw Error(Errc::OutOfSigma, os.str());
    }
    if (s.Delta < 0.0) E = 2.0 * sr.Ebar - E;
    const double cc = c < 0.0 ? 0.05 * pair_delta0(p) : c;
    const double eps = p.epsilon;
    const double x0 = p.gamma0 * (E - p.E0), xp = p.gammapi * (E - p.Epi);
    const double L = 2.0 * log_tau(p.profile) + std::log(std::abs(x0) + std::abs(xp));
    SmallTauLyapunov r;
    r.lambda = eps * L;
    r.Theta = eps / (2 * kPi) * (L > 0 ? L + std::log1p(std::exp(-L)) : std::log1p(std::exp(L)));
    r.cls = r.lambda > cc    ? SpectralClass::Singular
            : r.lambda < -cc ? SpectralClass::AcCandidate
                             : SpectralClass::Undetermined;
    return r;
}

SpectralPrediction sigma_set_small_tau(const ResonantPair& p, double LambdaN, double c,
                                       int samples) {
    SpectralPrediction out;
    out.regime = pair_regime(p);
    if (out.regime != Regime::RhoSmall && out.regime != Regime::TauSmallRhoLarge) {
        std::ostringstream os;
        os << "small-tau prediction needs TauSmall with a decided rho, pair is "
           << regime_name(out.regime);
        throw Error(Errc::RegimeMismatch, os.str());
    }
    ScenarioInputs s = scenario_inputs(p, LambdaN);
    const bool flip = s.Delta < 0.0;
    if (flip) {
        s.Delta = -s.Delta;
        s.tvm = -s.tvm;
    }
    ScenarioEndpoints e = scenario_endpoints_numeric(s);
    if (flip) {
        auto refl = [&](double x) { return 2.0 * s.Ebar - x; };
        ScenarioEndpoints f = e;
        f.pi_out = refl(e.zero_out);
        f.pi_in = refl(e.zero_in);
        f.zero_in = refl(e.pi_in);
        f.zero_out = refl(e.pi_out);
        f.g_minus = refl(e.g_plus);
        f.g_plus = refl(e.g_minus);
        e = f;
    }
    const double w = p.epsilon / (2 * kPi);
    out.intervals = {{e.pi_out, e.pi_in, IntervalLabel::Il, w},
                     {e.zero_in, e.zero_out, IntervalLabel::Ir, w}};
    out.gap = Interval{e.pi_in, e.zero_in};
    for (int k = 0; k < 2; ++k) {
        const auto& I = out.intervals[k];
        const int n = std::max(2, samples / 2);
        for (int i = 0; i < n; ++i) {
            const double E = I.lo + (I.hi - I.lo) * i / (n - 1);
            SmallTauLyapunov l = lyapunov_small_tau(p, E, LambdaN, c);
            out.samples.push_back({E, l.Theta, l.lambda, l.cls});
        }
    }
    out.diagnostics = {{"G_zero_lo", e.g_minus}, {"G_zero_hi", e.g_plus}};
    return out;
}

AcWindow ac_window(const ResonantPair& p, double LambdaN) {
    const Regime r = pair_regime(p);
    if (r != Regime::RhoSmall && r != Regime::TauSmallRhoLarge)
        throw Error(Errc::RegimeMismatch, std::string("ac window needs TauSmall, pair is ") +
                                              regime_name(r));
    const ScenarioInputs s = scenario_inputs(p, LambdaN);
    const double D2 = s.Delta * s.Delta;
    const double a = std::sqrt(D2 + s.thm), b = std::sqrt(D2 + s.thp);
    AcWindow w;
    w.Ipi = {p.Ebar - b, p.Ebar - a};
    w.I0 = {p.Ebar + a, p.Ebar + b};
    const double eps = p.epsilon, th = p.profile.th;
    w.M = p.Delta == 0.0 ? eps * std::sqrt(th)
                         : std::min(eps * std::sqrt(th), eps * eps * th / std::abs(p.Delta));
    return w;
}

SpectralPrediction scenario_report(const ResonantPair& p, double LambdaN, double c, double sub_c,
                                   int samples) {
    const Regime r = pair_regime(p);
    if (r == Regime::Borderline)
        throw Error(Errc::RegimeMismatch,
                    "rho or tau is borderline; no prediction (tau_exp and rho_exp within margins)");
    SpectralPrediction out = sigma_set_small_tau(p, LambdaN, c, samples);
    const AcWindow ac = ac_window(p, LambdaN);
    const ScenarioInputs s = scenario_inputs(p, LambdaN);
    const double eps = p.epsilon, th = p.profile.th;
    const double len_l = out.intervals[0].hi - out.intervals[0].lo;
    const double len_r = out.intervals[1].hi - out.intervals[1].lo;
    const double gap = out.gap->width();
    out.diagnostics.insert(out.diagnostics.end(),
                           {{"len_Il", len_l},
                            {"len_Ir", len_r},
                            {"gap", gap},
                            {"M_Delta", ac.M},
                            {"ac_I0_lo", ac.I0.lo},
                            {"ac_I0_hi", ac.I0.hi},
                            {"ac_Ipi_lo", ac.Ipi.lo},
                            {"ac_Ipi_hi", ac.Ipi.hi},
                            {"tv_plus", s.tvp},
                            {"tv_minus", s.tvm}});
    if (r == Regime::RhoSmall) {
        out.scenario = "small-rho";
        out.diagnostics.push_back({"eps_sqrt_th", eps * std::sqrt(th)});
    } else {
        const double D = std::abs(p.Delta);
        if (D < sub_c * s.tvp) {
            out.scenario = "large-rho-close";
            const double tv_max = std::max(p.profile.tv0, p.profile.tvpi);
            out.diagnostics.push_back({"eps_th_over_tv_max", eps * th / tv_max});
        } else if (D > s.tvp / sub_c) {
            out.scenario = "large-rho-far";
            out.diagnostics.push_back({"four_tv_plus", 4.0 * s.tvp});
            out.diagnostics.push_back({"eps2_th_over_Delta", eps * eps * th / D});
        } else {
            out.scenario = "large-rho-intermediate";
        }
    }
    return out;
}

SpectralPrediction predict(const ResonantPair& p, double LambdaN, int samples) {
    const Regime r = pair_regime(p);
    if (r == Regime::TauLarge) return predict_large_tau(p, samples);
    return scenario_report(p, LambdaN, -1.0, 0.25, samples);
}

}  // namespace qpspec
