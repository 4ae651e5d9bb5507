#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qpspec/errors.hpp"
#include "qpspec/predictor.hpp"
#include "support.hpp"

using namespace qpspec;

namespace {
constexpr double kPi = std::numbers::pi;

// Pair with given actions; slopes from unit phase derivatives.
ResonantPair pair_with(double sh, double sv0, double svpi, double eps, double E0, double Epi,
                       double dphi0 = -1.0, double dphipi = 1.0) {
    auto prof = make_profile(0.5 * (E0 + Epi), eps, 1.0, 1.0, dphi0, dphipi, sv0, svpi, 0.5 * sh,
                             0.5 * sh);
    return make_pair(E0, Epi, prof);
}

// |G| <= F written out from the definitions, f = 0.
bool in_sigma_direct(const ResonantPair& p, double LambdaN, double E) {
    const double tau2 = std::exp(2.0 * log_tau(p.profile));
    const double x0 = p.gamma0 * (E - p.E0), xp = p.gammapi * (E - p.Epi);
    const double G = tau2 * x0 * xp + 2.0 * LambdaN;
    const double F = 2.0 + tau2 * (std::abs(x0) + std::abs(xp));
    return std::abs(G) <= F;
}

double weight_sum(const SpectralPrediction& s) {
    double w = 0.0;
    for (const auto& i : s.intervals) w += i.dos_weight;
    return w;
}

ScenarioInputs random_inputs(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScenarioInputs s;
    s.tvp = std::pow(10.0, -3 + 3 * u(rng));
    s.tvm = s.tvp * (2 * u(rng) - 1);
    s.thp = std::pow(10.0, -6 + 5 * u(rng));
    s.thm = s.thp * (0.05 + 0.9 * u(rng));
    s.Delta = u(rng) < 0.2 ? 0.0 : std::pow(10.0, -5 + 4 * u(rng));
    s.Ebar = 10 * u(rng) - 5;
    return s;
}
}  // namespace

TEST_CASE("large tau: interval lengths, weights, Lyapunov") {
    const double eps = 0.1;
    auto p = pair_with(3.0, 1.0, 1.4, eps, 0.0, 1.0);
    REQUIRE(pair_regime(p) == Regime::TauLarge);
    auto s = predict_large_tau(p);
    const auto& a = p.profile;
    REQUIRE(s.intervals.size() == 2);
    CHECK(s.intervals[0].hi < s.intervals[1].lo);
    for (const auto& i : s.intervals) {
        const double t = i.label == IntervalLabel::I0 ? a.tv0 : a.tvpi;
        const double d = i.label == IntervalLabel::I0 ? a.dphi0 : a.dphipi;
        CHECK(i.hi - i.lo == doctest::Approx(2 * eps * t / std::abs(d)).epsilon(1e-12));
        CHECK(i.dos_weight == doctest::Approx(eps / (2 * kPi)));
    }
    CHECK(weight_sum(s) == doctest::Approx(eps / kPi));
    REQUIRE(s.gap);
    const double lt = log_tau(a);
    for (const auto& smp : s.samples) {
        CHECK(smp.Theta >= eps / kPi * lt - 1e-15);
        CHECK(smp.cls == SpectralClass::Singular);
    }
    CHECK_THROWS_AS(predict_large_tau(pair_with(1, 2, 3, eps, 0, 0)), Error);
}

TEST_CASE("large tau: overlapping intervals merge") {
    auto p = pair_with(3.0, 1.0, 1.4, 0.1, 0.0, 0.0);
    auto s = predict_large_tau(p);
    REQUIRE(s.intervals.size() == 1);
    CHECK(s.intervals[0].label == IntervalLabel::Union);
    CHECK(weight_sum(s) == doctest::Approx(0.1 / kPi));
    CHECK_FALSE(s.gap);
}

TEST_CASE("large tau: Lyapunov at the center and at the edge of the pi interval") {
    const double eps = 0.02, sh = 4.0, sv0 = 1.5, svpi = 1.0;  // tv0 << tvpi
    auto p = pair_with(sh, sv0, svpi, eps, 0.0, 0.0);
    auto s = predict_large_tau(p, 1);
    // Exponent law up to the log 2 carried by tau.
    CHECK(std::abs(s.samples[0].Theta - (sh - sv0 - svpi) / (2 * kPi)) <= eps / kPi * std::log(2.0) + 1e-12);
    const double edge = 1.0 / std::abs(p.gammapi);
    const double x0 = p.gamma0 * edge;
    const double theta_edge = eps / kPi * (log_tau(p.profile) + 0.5 * std::log1p(std::abs(x0) + 1.0));
    CHECK(std::abs(theta_edge - (sh - 2 * svpi) / (2 * kPi)) <= eps / kPi * 2 * std::log(2.0));
}

TEST_CASE("closed-form endpoints against root finding") {
    std::mt19937_64 rng(21);
    int done = 0;
    while (done < 100) {
        auto s = random_inputs(rng);
        auto c = scenario_endpoints(s);
        if (c.inner_empty) continue;
        ++done;
        auto n = scenario_endpoints_numeric(s);
        const double scale = std::abs(c.zero_out - c.pi_out);
        CHECK(std::abs(c.pi_out - n.pi_out) <= 1e-10 * scale);
        CHECK(std::abs(c.pi_in - n.pi_in) <= 1e-10 * scale);
        CHECK(std::abs(c.zero_in - n.zero_in) <= 1e-10 * scale);
        CHECK(std::abs(c.zero_out - n.zero_out) <= 1e-10 * scale);
        CHECK(c.pi_out < c.pi_in);
        CHECK(c.pi_in < c.zero_in);
        CHECK(c.zero_in < c.zero_out);
        // The inner gap sits strictly between the zeros of G.
        CHECK(c.g_minus < c.pi_in);
        CHECK(c.zero_in < c.g_plus);
    }
}

TEST_CASE("closed forms: zero detuning and continuity at the switch") {
    ScenarioInputs s{0.3, 0.1, 0.02, 0.01, 0.0, 1.0};
    auto e = scenario_endpoints(s);
    CHECK(e.pi_out == doctest::Approx(1.0 - 0.3 - std::sqrt(0.09 + 0.02)).epsilon(1e-14));

    // |tv^-| <= Delta keeps both switches inside the middle piece.
    ScenarioInputs t{0.3, 0.03, 0.05, 0.0, 0.05, 0.0};
    for (double sign : {1.0, -1.0}) {
        t.thm = 2 * (t.tvp - sign * t.tvm) * t.Delta;  // switch of one inner formula
        auto lo = t, hi = t;
        lo.thm *= 1 - 1e-13;
        hi.thm *= 1 + 1e-13;
        auto a = scenario_endpoints(lo), b = scenario_endpoints(hi);
        CHECK(std::abs(a.pi_in - b.pi_in) < 1e-12);
        CHECK(std::abs(a.zero_in - b.zero_in) < 1e-12);
    }
}

TEST_CASE("closed forms outside their piece report an empty gap") {
    // tv^- > Delta and th^- below the switch: the middle-piece radical lands
    // left of -Delta, and F > |G| holds everywhere.
    ScenarioInputs s{0.3, 0.1, 0.05, 0.01, 0.05, 0.0};
    CHECK(s.thm < 2 * (s.tvp - s.tvm) * s.Delta);
    CHECK(scenario_endpoints(s).inner_empty);
    CHECK_THROWS_AS(scenario_endpoints_numeric(s), Error);
}

TEST_CASE("empty inner interval is reported") {
    ScenarioInputs s{1.0, 0.0, 0.02, 0.01, 0.1, 0.0};
    CHECK(scenario_endpoints(s).inner_empty);
    try {
        scenario_endpoints_numeric(s);
        FAIL("expected DegenerateRoots");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateRoots);
    }
}

TEST_CASE("small tau: two intervals and the sampled set identity") {
    const double eps = 0.1, Lambda = 1.25;
    for (double Delta : {0.0, 3e-9, -3e-9}) {
        auto p = pair_with(1.0, 2.0, 3.0, eps, 5.0 + Delta, 5.0 - Delta);
        REQUIRE(pair_regime(p) == Regime::RhoSmall);
        auto s = sigma_set_small_tau(p, Lambda);
        REQUIRE(s.intervals.size() == 2);
        const auto& l = s.intervals[0];
        const auto& r = s.intervals[1];
        CHECK(l.lo < l.hi);
        CHECK(l.hi < r.lo);
        CHECK(r.lo < r.hi);
        CHECK(weight_sum(s) == doctest::Approx(eps / kPi));
        const double bound = 2 * std::exp(-0.5 * 1.0 / eps);
        CHECK(std::abs(l.lo - p.Ebar) < bound);
        CHECK(std::abs(r.hi - p.Ebar) < bound);
        // G at both quantized energies equals 2 Lambda.
        const double tau2 = std::exp(2.0 * log_tau(p.profile));
        CHECK(tau2 * p.gamma0 * (p.E0 - p.E0) * p.gammapi * (p.E0 - p.Epi) + 2 * Lambda == 2 * Lambda);
        const double w = r.hi - l.lo, lo = l.lo - 0.2 * w;
        const double tol = 1e-12 * w * 1e3;
        int bad = 0;
        for (int i = 0; i <= 10000; ++i) {
            const double E = lo + 1.4 * w * i / 10000.0;
            const bool inside = (E >= l.lo && E <= l.hi) || (E >= r.lo && E <= r.hi);
            bool near = false;
            for (double x : {l.lo, l.hi, r.lo, r.hi}) near = near || std::abs(E - x) < tol;
            if (!near && inside != in_sigma_direct(p, Lambda, E)) ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("small tau: reflection symmetry") {
    const double eps = 0.1, Lambda = 1.25, D = 2e-9;
    auto a = pair_with(1.0, 2.0, 3.0, eps, 5.0 + D, 5.0 - D);
    auto b = pair_with(1.0, 2.0, 3.0, eps, 5.0 - D, 5.0 + D);
    auto sa = sigma_set_small_tau(a, Lambda), sb = sigma_set_small_tau(b, Lambda);
    const double scale = sa.intervals[1].hi - sa.intervals[0].lo;
    const double refl = 2 * a.Ebar;
    CHECK(std::abs(sb.intervals[0].lo - (refl - sa.intervals[1].hi)) < 1e-12 * std::max(scale, 1e-300) + 1e-15);
    CHECK(std::abs(sb.intervals[0].hi - (refl - sa.intervals[1].lo)) < 1e-12 * scale + 1e-15);
    CHECK(std::abs(sb.intervals[1].lo - (refl - sa.intervals[0].hi)) < 1e-12 * scale + 1e-15);
    CHECK(std::abs(sb.intervals[1].hi - (refl - sa.intervals[0].lo)) < 1e-12 * scale + 1e-15);
}

TEST_CASE("ac window") {
    const double eps = 0.1, Lambda = 1.25;
    auto p = pair_with(1.0, 2.0, 3.0, eps, 5.0, 5.0);
    auto w = ac_window(p, Lambda);
    // |tau^2 xi0 xipi + 2 Lambda| = 2 at every endpoint.
    const double tau2 = std::exp(2.0 * log_tau(p.profile));
    for (double E : {w.Ipi.lo, w.Ipi.hi, w.I0.lo, w.I0.hi}) {
        const double g = tau2 * p.gamma0 * (E - p.E0) * p.gammapi * (E - p.Epi) + 2 * Lambda;
        CHECK(std::abs(g) == doctest::Approx(2.0).epsilon(1e-9));
    }
    CHECK(w.Ipi.hi < p.Epi);
    CHECK(w.I0.lo > p.E0);
    CHECK(w.I0.lo - p.Ebar == doctest::Approx(p.Ebar - w.Ipi.hi).epsilon(1e-12));
    // Separation in units of eps sqrt(th) does not depend on th.
    auto q = pair_with(1.4, 2.0, 3.0, eps, 5.0, 5.0);
    auto wq = ac_window(q, Lambda);
    const double r1 = (w.I0.lo - w.Ipi.hi) / (eps * std::sqrt(p.profile.th));
    const double r2 = (wq.I0.lo - wq.Ipi.hi) / (eps * std::sqrt(q.profile.th));
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-9));
    CHECK(w.M == doctest::Approx(eps * std::sqrt(p.profile.th)));
    auto far = pair_with(1.0, 2.0, 3.0, eps, 6.0, 4.0);
    auto wf = ac_window(far, Lambda);
    CHECK(wf.M == doctest::Approx(eps * eps * far.profile.th / 1.0));
    CHECK_THROWS_AS(ac_window(pair_with(3.0, 1.0, 1.4, eps, 0, 0), Lambda), Error);
}

TEST_CASE("small tau Lyapunov and classification") {
    const double eps = 0.1, Lambda = 1.25;
    auto p = pair_with(1.0, 2.0, 3.0, eps, 5.0, 5.0);
    auto s = sigma_set_small_tau(p, Lambda);
    const double c = 0.05 * 0.5;
    for (const auto& smp : s.samples) {
        CHECK(smp.Theta >= 0.0);
        const double x0 = p.gamma0 * (smp.E - p.E0), xp = p.gammapi * (smp.E - p.Epi);
        const double tau2 = std::exp(2.0 * log_tau(p.profile));
        CHECK(smp.Theta == doctest::Approx(eps / (2 * kPi) * std::log(tau2 * (std::abs(x0) + std::abs(xp)) + 1)).epsilon(1e-9));
        // Small rho with Delta = 0: absolutely continuous candidates throughout.
        CHECK(smp.lambda <= -c);
        CHECK(smp.cls == SpectralClass::AcCandidate);
    }
    try {
        lyapunov_small_tau(p, p.Ebar + 1.0, Lambda);
        FAIL("expected OutOfSigma");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OutOfSigma);
    }
}

TEST_CASE("scenario report: large rho sub-cases") {
    const double eps = 0.1, Lambda = 1.25;
    // tau small and rho large in both senses: S_h/2 above min S_v, tv0 << tvpi.
    auto close = pair_with(2.0, 3.0, 0.8, eps, 5.0, 5.0);
    CHECK(log_rho(close.profile) > 0.0);
    REQUIRE(pair_regime(close) == Regime::TauSmallRhoLarge);
    auto s = scenario_report(close, Lambda);
    CHECK(s.scenario == "large-rho-close");
    const auto& a = close.profile;
    const double ratio = s.gap->width() / (eps * a.th / a.tvpi);
    // Leading order: gap = th^-/tv^+ = eps th (Lambda - 1) / (|Phi0'| tvpi).
    CHECK(ratio == doctest::Approx((Lambda - 1) / std::abs(a.dphi0)).epsilon(0.02));

    auto si = scenario_inputs(close, Lambda);
    const double D = 10.0 * si.tvp;
    auto farp = pair_with(2.0, 3.0, 0.8, eps, 5.0 + D, 5.0 - D);
    auto f = scenario_report(farp, Lambda);
    CHECK(f.scenario == "large-rho-far");
    const double lead = farp.Epi - f.intervals[0].lo;
    CHECK(lead == doctest::Approx(2 * si.tvp).epsilon(0.05));
    CHECK(weight_sum(f) == doctest::Approx(eps / kPi));
}

TEST_CASE("dispatch and refusal") {
    CHECK(predict(pair_with(3.0, 1.0, 1.4, 0.1, 0, 1), 1.25).regime == Regime::TauLarge);
    CHECK(predict(pair_with(1.0, 2.0, 3.0, 0.1, 5, 5), 1.25).regime == Regime::RhoSmall);
    try {
        predict(pair_with(2.0, 1.0, 1.0, 0.1, 5, 5), 1.25);
        FAIL("expected RegimeMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::RegimeMismatch);
    }
}
