#include "qpspec/lambdan.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "qpspec/errors.hpp"
#include "qpspec/quad.hpp"

namespace qpspec {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Gap j is parametrized by the angle phi: lambda = a + (b - a)(1 - cos phi)/2,
// and the flow dlambda/dxi = 2 sqrt(-R) becomes dphi/dxi = 2 sqrt|rest|, where
// rest is R without the two edges of the gap. The angle never turns around.
struct Gap {
    double a, b;
    std::array<double, 3> others;

    Gap(const TwoGapSurface& s, int j) : a(s.gap_lo(j)), b(s.gap_hi(j)) {
        int k = 0;
        for (int i = 0; i < 5; ++i)
            if (i != 2 * j - 1 && i != 2 * j) others[k++] = s.edges[i];
    }
    double lambda(double phi) const { return a + 0.5 * (b - a) * (1.0 - std::cos(phi)); }
    double rest(double l) const {
        return std::abs((l - others[0]) * (l - others[1]) * (l - others[2]));
    }
    double phidot(double phi) const { return 2.0 * std::sqrt(rest(lambda(phi))); }
    double lambdadot(double phi) const { return 0.5 * (b - a) * std::sin(phi) * phidot(phi); }
    // Angle of the pole (P, sign): sign > 0 on the increasing half.
    double angle(double P, int sign) const {
        double c = std::clamp(1.0 - 2.0 * (P - a) / (b - a), -1.0, 1.0);
        double phi = std::acos(c);
        return sign >= 0 ? phi : 2.0 * kPi - phi;
    }
    // Flow time from phi = 0 to phi in [0, pi].
    double half_time(double phi) const {
        if (phi <= 0.0) return 0.0;
        return 0.5 * quad::adaptive([&](double t) { return 1.0 / std::sqrt(rest(lambda(t))); }, 0.0,
                                    phi, 1e-14);
    }
    double moment() const {
        return quad::adaptive(
            [&](double t) {
                double l = lambda(t);
                return l / std::sqrt(rest(l));
            },
            0.0, kPi, 1e-14);
    }
};

void check_edges(const std::array<double, 5>& e) {
    for (int i = 0; i < 5; ++i) {
        if (!std::isfinite(e[i])) throw Error(Errc::NonMonotoneEdges, "non-finite edge");
        if (i > 0 && !(e[i] > e[i - 1])) {
            std::ostringstream os;
            os << "edges must increase strictly (E" << i << " >= E" << i + 1 << ")";
            throw Error(Errc::NonMonotoneEdges, os.str());
        }
    }
}

using Y3 = std::array<double, 3>;
using Y7 = std::array<double, 7>;

auto stepper78(double tol) {
    return odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<Y7>());
}

// Pole flow in x with the running integrals needed for C1, C2:
// (phi1, phi2, xi, U, W, U2, W2) with U' = V, W' = U, U2' = V'' - V^2, W2' = U2.
struct XFlow {
    Gap g1, g2;
    double sigma;

    struct Local {
        double l1, l2, D, V, Vx, Vxx, pd1, pd2;
    };
    Local local(double phi1, double phi2) const {
        Local o{};
        o.l1 = g1.lambda(phi1);
        o.l2 = g2.lambda(phi2);
        o.pd1 = g1.phidot(phi1);
        o.pd2 = g2.phidot(phi2);
        double ld1 = 0.5 * (g1.b - g1.a) * std::sin(phi1) * o.pd1;
        double ld2 = 0.5 * (g2.b - g2.a) * std::sin(phi2) * o.pd2;
        o.D = o.l2 - o.l1;
        o.V = -2.0 * (o.l1 + o.l2) + sigma;
        double ldd1 = -2.0 * dR(o.l1);
        double ldd2 = -2.0 * dR(o.l2);
        o.Vx = -2.0 * (ld1 + ld2) / o.D;
        double dVx = -2.0 * (ldd1 + ldd2) / o.D + 2.0 * (ld1 + ld2) * (ld2 - ld1) / (o.D * o.D);
        o.Vxx = dVx / o.D;
        return o;
    }
    double dR(double l) const {
        const std::array<double, 5> e{g1.others[0], g1.a, g1.b, g2.a, g2.b};
        double s = 0.0;
        for (int i = 0; i < 5; ++i) {
            double p = 1.0;
            for (int k = 0; k < 5; ++k)
                if (k != i) p *= l - e[k];
            s += p;
        }
        return s;
    }
    void operator()(const Y7& y, Y7& dy, double) const {
        Local o = local(y[0], y[1]);
        dy[0] = o.pd1 / o.D;
        dy[1] = o.pd2 / o.D;
        dy[2] = 1.0 / o.D;
        dy[3] = o.V;
        dy[4] = y[3];
        dy[5] = o.Vxx - o.V * o.V;
        dy[6] = y[5];
    }
};

Y7 initial_state(const TwoGapSurface& s, const PoleConfig& p) {
    Gap g1(s, 1), g2(s, 2);
    return {g1.angle(p.P1, p.s1), g2.angle(p.P2, p.s2), 0.0, 0.0, 0.0, 0.0, 0.0};
}

void check_pole(const TwoGapSurface& s, const PoleConfig& p) {
    const double tol = 1e-12;
    auto inside = [&](double P, int j) {
        double a = s.gap_lo(j), b = s.gap_hi(j);
        return P >= a - tol * (b - a) && P <= b + tol * (b - a);
    };
    if (!inside(p.P1, 1) || !inside(p.P2, 2))
        throw Error(Errc::OutOfRange, "poles must lie in the closed gaps [E2,E3] and [E4,E5]");
}

bool calibrated(const TwoGapSurface& s) {
    return std::abs(s.Xi1 - 2.0 * s.Xi2) <= 1e-7 * s.Xi2 && std::abs(x_period(s) - 1.0) <= 1e-7;
}

}  // namespace

double TwoGapSurface::R(double E) const {
    double p = 1.0;
    for (double e : edges) p *= E - e;
    return p;
}

double TwoGapSurface::dR(double E) const {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) {
        double p = 1.0;
        for (int k = 0; k < 5; ++k)
            if (k != i) p *= E - edges[k];
        s += p;
    }
    return s;
}

double TwoGapSurface::sigma() const {
    double s = 0.0;
    for (double e : edges) s += e;
    return s;
}

cplx TwoGapSurface::sqrtR(cplx E) const {
    cplx p = 1.0;
    for (double e : edges) p *= std::sqrt(E - e);
    return p;
}

TwoGapSurface make_surface(const std::array<double, 5>& edges) {
    check_edges(edges);
    TwoGapSurface s;
    s.edges = edges;
    auto xi = periods(s);
    s.Xi1 = xi[0];
    s.Xi2 = xi[1];
    return s;
}

std::array<double, 2> periods(const TwoGapSurface& s) {
    std::array<double, 2> out{};
    for (int j = 1; j <= 2; ++j) out[j - 1] = 2.0 * Gap(s, j).half_time(kPi);
    return out;
}

std::array<double, 2> periods_chebyshev(const TwoGapSurface& s, int n) {
    std::array<double, 2> out{};
    for (int j = 1; j <= 2; ++j) {
        Gap g(s, j);
        out[j - 1] = quad::chebyshev([&](double t) { return 1.0 / std::sqrt(g.rest(g.lambda(t))); }, n);
    }
    return out;
}

double x_period(const TwoGapSurface& s) {
    return 2.0 * Gap(s, 2).moment() - Gap(s, 1).moment();
}

Calibration calibrate(const std::array<double, 5>& seed, double tol) {
    check_edges(seed);
    std::array<double, 5> e = seed;
    auto mismatch = [&](double E5) {
        std::array<double, 5> t = e;
        t[4] = E5;
        TwoGapSurface s;
        s.edges = t;
        auto xi = periods(s);
        return xi[0] - 2.0 * xi[1];
    };
    Calibration c;
    for (int it = 1; it <= 5; ++it) {
        c.iterations = it;
        // Geometric scan above E4 for a sign change of Xi1 - 2 Xi2.
        double w = e[3] - e[0];
        double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
        bool found = false;
        double prev = e[3] + w * std::ldexp(1.0, -30);
        double fprev = mismatch(prev);
        for (int k = -29; k <= 40 && !found; ++k) {
            double E5 = e[3] + w * std::ldexp(1.0, k);
            double f = mismatch(E5);
            if (fprev == 0.0) {
                lo = hi = prev;
                found = true;
            } else if ((f < 0.0) != (fprev < 0.0)) {
                lo = prev, hi = E5, flo = fprev, fhi = f;
                found = true;
            }
            prev = E5, fprev = f;
        }
        if (!found)
            throw Error(Errc::CalibrationDiverged, "no E5 with Xi1 = 2 Xi2 above E4");
        if (lo != hi) {
            // Start from the current E5 when it is already inside the bracket.
            boost::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve(mismatch, lo, hi, flo, fhi,
                                                       boost::math::tools::eps_tolerance<double>(52),
                                                       iters);
            double f1 = mismatch(r.first), f2 = mismatch(r.second);
            e[4] = std::abs(f1) <= std::abs(f2) ? r.first : r.second;
        } else {
            e[4] = lo;
        }
        // Periods scale as s^-3 and the x-period as s^-1 under E -> E1 + s^2 (E - E1).
        TwoGapSurface s0 = make_surface(e);
        double sc = x_period(s0);
        for (int i = 1; i < 5; ++i) e[i] = e[0] + sc * sc * (e[i] - e[0]);
        c.surface = make_surface(e);
        c.period_residual = std::abs(c.surface.Xi1 - 2.0 * c.surface.Xi2) / c.surface.Xi2;
        c.x_residual = std::abs(x_period(c.surface) - 1.0);
        if (c.period_residual <= tol && c.x_residual <= tol) return c;
    }
    std::ostringstream os;
    os << "calibration did not converge: period residual " << c.period_residual << ", x residual "
       << c.x_residual;
    throw Error(Errc::CalibrationDiverged, os.str());
}

double abel_time(const TwoGapSurface& s, int j, double P, int sign) {
    Gap g(s, j);
    double Xi = j == 1 ? s.Xi1 : s.Xi2;
    double phi = g.angle(P, 1);
    double t = g.half_time(phi);
    if (sign < 0 && phi > 0.0 && phi < kPi) t = Xi - t;
    return t;
}

std::pair<double, int> pole_at_time(const TwoGapSurface& s, int j, double t) {
    Gap g(s, j);
    double Xi = j == 1 ? s.Xi1 : s.Xi2;
    t -= Xi * std::floor(t / Xi);
    if (t >= Xi) t = 0.0;
    int sign = 1;
    double tt = t;
    if (t > 0.5 * Xi) {
        sign = -1;
        tt = Xi - t;
    }
    if (tt <= 0.0) return {g.a, 1};
    if (tt >= 0.5 * Xi) return {g.b, 1};
    auto f = [&](double phi) { return g.half_time(phi) - tt; };
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, 0.0, kPi, -tt, 0.5 * Xi - tt,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    double phi = 0.5 * (r.first + r.second);
    return {g.lambda(phi), sign};
}

PoleConfig shift_poles(const TwoGapSurface& s, const PoleConfig& p, double dt) {
    return poles_from_times(s, abel_time(s, 1, p.P1, p.s1) + dt, abel_time(s, 2, p.P2, p.s2) + dt);
}

PoleConfig poles_from_times(const TwoGapSurface& s, double t1, double t2) {
    auto a = pole_at_time(s, 1, t1);
    auto b = pole_at_time(s, 2, t2);
    return {a.first, b.first, a.second, b.second};
}

PoleFlow flow(const TwoGapSurface& s, const PoleConfig& p, int samples) {
    check_pole(s, p);
    if (samples < 1) throw Error(Errc::InvalidRange, "flow needs at least one sample interval");
    Gap g1(s, 1), g2(s, 2);
    Y7 y0 = initial_state(s, p);
    Y3 y{y0[0], y0[1], 0.0};
    auto rhs = [&](const Y3& v, Y3& dv, double) {
        dv[0] = g1.phidot(v[0]);
        dv[1] = g2.phidot(v[1]);
        dv[2] = g2.lambda(v[1]) - g1.lambda(v[0]);
    };
    PoleFlow out;
    out.Xi = s.Xi1;
    std::vector<double> times(samples + 1);
    for (int i = 0; i <= samples; ++i) times[i] = out.Xi * i / samples;
    auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_fehlberg78<Y3>());
    try {
        odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), out.Xi / samples,
                                [&](const Y3& v, double t) {
                                    out.xi.push_back(t);
                                    out.lambda1.push_back(g1.lambda(v[0]));
                                    out.lambda2.push_back(g2.lambda(v[1]));
                                    out.x_of_xi.push_back(v[2]);
                                });
    } catch (const std::exception& ex) {
        throw Error(Errc::EdgeStall, std::string("pole flow integration failed: ") + ex.what());
    }
    // Return map of each pole over its own period.
    double res = 0.0;
    for (int j = 1; j <= 2; ++j) {
        const Gap& g = j == 1 ? g1 : g2;
        double Xi = j == 1 ? s.Xi1 : s.Xi2;
        std::array<double, 1> v{j == 1 ? y0[0] : y0[1]};
        double start = v[0];
        auto r1 = [&](const std::array<double, 1>& u, std::array<double, 1>& du, double) {
            du[0] = g.phidot(u[0]);
        };
        auto st = odeint::make_controlled(1e-13, 1e-13,
                                          odeint::runge_kutta_fehlberg78<std::array<double, 1>>());
        odeint::integrate_adaptive(st, r1, v, 0.0, Xi, Xi / 64);
        double dl = std::abs(g.lambda(v[0]) - g.lambda(start)) / (g.b - g.a);
        double dphi = std::abs(v[0] - start - 2.0 * kPi) / 2.0;
        res = std::max(res, std::max(dl, dphi));
    }
    out.periodicity_residual = res;
    if (res > 1e-8) {
        std::ostringstream os;
        os << "pole flow is not periodic: residual " << res;
        throw Error(Errc::EdgeStall, os.str());
    }
    return out;
}

PotentialSamples reconstruct_potential(const TwoGapSurface& s, const PoleConfig& p, int samples) {
    check_pole(s, p);
    if (samples < 8) throw Error(Errc::InvalidRange, "reconstruction needs at least 8 samples");
    PoleFlow pf = flow(s, p, 1);
    double X = pf.x_of_xi.back();
    XFlow f{Gap(s, 1), Gap(s, 2), s.sigma()};
    Y7 y = initial_state(s, p);
    PotentialSamples out;
    out.period = X;
    std::vector<double> xs(samples + 1);
    for (int i = 0; i <= samples; ++i) xs[i] = X * i / samples;
    try {
        odeint::integrate_times(stepper78(1e-12), f, y, xs.begin(), xs.end(), X / samples,
                                [&](const Y7& v, double x) {
                                    if (out.x.size() == static_cast<std::size_t>(samples)) return;
                                    auto o = f.local(v[0], v[1]);
                                    out.x.push_back(x);
                                    out.V.push_back(o.V);
                                    out.Vx.push_back(o.Vx);
                                    out.Vxx.push_back(o.Vxx);
                                    out.lambda1.push_back(o.l1);
                                    out.lambda2.push_back(o.l2);
                                });
    } catch (const std::exception& ex) {
        throw Error(Errc::EdgeStall, std::string("potential integration failed: ") + ex.what());
    }
    // V^2 - V'' + 8 (l1^2 + l1 l2 + l2^2) = c1 (l1 + l2) + c2
    const int n = samples;
    Eigen::MatrixXd M(n, 2);
    Eigen::VectorXd rhs(n), lhs(n);
    for (int i = 0; i < n; ++i) {
        double a = out.lambda1[i], b = out.lambda2[i];
        M(i, 0) = a + b;
        M(i, 1) = 1.0;
        lhs(i) = out.V[i] * out.V[i] - out.Vxx[i];
        rhs(i) = lhs(i) + 8.0 * (a * a + a * b + b * b);
    }
    Eigen::Vector2d c = M.colPivHouseholderQr().solve(rhs);
    out.c1_fit = c(0);
    out.c2_fit = c(1);
    out.gld2_residual = (M * c - rhs).norm() / lhs.norm();
    if (out.gld2_residual > 1e-6) {
        std::ostringstream os;
        os << "GLD-2 least-squares residual " << out.gld2_residual;
        throw Error(Errc::ConsistencyFailure, os.str());
    }
    return out;
}

CConstants c_constants(const TwoGapSurface& s, const PoleConfig& p) {
    check_pole(s, p);
    if (!calibrated(s)) throw Error(Errc::ConsistencyFailure, "c_constants needs a calibrated surface");
    XFlow f{Gap(s, 1), Gap(s, 2), s.sigma()};
    Y7 y = initial_state(s, p);
    try {
        odeint::integrate_adaptive(stepper78(1e-13), f, y, 0.0, 1.0, 1e-3);
    } catch (const std::exception& ex) {
        throw Error(Errc::EdgeStall, std::string("potential integration failed: ") + ex.what());
    }
    CConstants c;
    c.mean_V = y[3];
    c.A = y[4] - 0.5 * y[3];
    c.B = y[6] - 0.5 * y[5];
    c.C2 = -0.5 * kI * c.A;
    c.C1 = 0.375 * kI * c.B - 0.5 * s.sigma() * c.C2;
    return c;
}

CConstants c_constants_from_samples(const std::vector<double>& V, double sigma) {
    const int n = static_cast<int>(V.size());
    if (n < 4) throw Error(Errc::InvalidRange, "need at least 4 samples");
    Eigen::FFT<double> fft;
    std::vector<cplx> Vh;
    std::vector<double> Vv(V.begin(), V.end());
    fft.fwd(Vh, Vv);
    auto freq = [&](int k) { return k <= n / 2 ? k : k - n; };
    std::vector<cplx> d2(n);
    for (int k = 0; k < n; ++k) {
        int m = freq(k);
        if (n % 2 == 0 && k == n / 2) m = 0;
        double w = 2.0 * kPi * m;
        d2[k] = -w * w * Vh[k];
    }
    std::vector<double> Vxx;
    fft.inv(Vxx, d2);
    // int_0^1 dx int_0^x {f} = -sum_{k != 0} f_k / (2 pi i k) for f = sum f_k e^{2 pi i k x}.
    auto nested = [&](const std::vector<double>& g, double* mean) {
        std::vector<cplx> gh;
        std::vector<double> gv(g.begin(), g.end());
        fft.fwd(gh, gv);
        cplx acc = 0.0;
        for (int k = 1; k < n; ++k) {
            if (n % 2 == 0 && k == n / 2) continue;
            acc -= (gh[k] / double(n)) / (2.0 * kPi * kI * double(freq(k)));
        }
        if (mean) *mean = gh[0].real() / n;
        return acc.real();
    };
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = Vxx[i] - V[i] * V[i];
    CConstants c;
    c.A = nested(V, &c.mean_V);
    c.B = nested(g, nullptr);
    c.C2 = -0.5 * kI * c.A;
    c.C1 = 0.375 * kI * c.B - 0.5 * sigma * c.C2;
    return c;
}

cplx pole_root(const TwoGapSurface& s, const PoleConfig& p, int j) {
    double P = j == 1 ? p.P1 : p.P2;
    int sign = j == 1 ? p.s1 : p.s2;
    // Value on the upper lip: each edge above P contributes a factor i.
    cplx r = std::sqrt(std::abs(s.R(P)));
    for (double e : s.edges)
        if (e > P) r *= kI;
    return sign > 0 ? r : std::conj(r);
}

namespace {

struct Contour {
    cplx omega1, omega2, pole1, pole2;
};

// Counterclockwise rectangle around [E2, E3] at offset d.
Contour rectangle(const TwoGapSurface& s, const PoleConfig& p, cplx r1, cplx r2, double d) {
    const double lo = s.edges[1] - d, hi = s.edges[2] + d;
    const std::array<cplx, 5> corners{cplx(lo, -d), cplx(hi, -d), cplx(hi, d), cplx(lo, d),
                                      cplx(lo, -d)};
    Contour c{};
    for (int side = 0; side < 4; ++side) {
        cplx z0 = corners[side], z1 = corners[side + 1];
        cplx dz = z1 - z0;
        auto along = [&](auto g) {
            return quad::adaptive_c([&](double t) { return g(z0 + t * dz) * dz; }, 0.0, 1.0, 1e-13,
                                    1e-300);
        };
        c.omega1 += along([&](cplx E) { return 1.0 / s.sqrtR(E); });
        c.omega2 += along([&](cplx E) { return E / s.sqrtR(E); });
        c.pole1 += along([&](cplx E) { return r1 / ((E - p.P1) * s.sqrtR(E)); });
        c.pole2 += along([&](cplx E) { return r2 / ((E - p.P2) * s.sqrtR(E)); });
    }
    return c;
}

double rel_change(cplx a, cplx b, double scale) {
    return std::abs(a - b) / std::max(std::abs(a), scale);
}

}  // namespace

LoopIntegrals loop_integrals(const TwoGapSurface& s, const PoleConfig& p, double offset) {
    check_pole(s, p);
    double d = offset > 0.0 ? offset
                            : 0.25 * std::min(s.edges[1] - s.edges[0], s.edges[3] - s.edges[2]);
    // Distance from each pole to the rectangle.
    auto dist = [&](double P) {
        double lo = s.edges[1] - d, hi = s.edges[2] + d;
        if (P < lo || P > hi) return std::min(std::abs(P - lo), std::abs(P - hi));
        return std::min({d, P - lo, hi - P});
    };
    double thr = 1e-6 * (s.edges[2] - s.edges[1]);
    if (dist(p.P1) <= thr || dist(p.P2) <= thr)
        throw Error(Errc::PoleOnContour, "a pole lies on the integration contour");
    cplx r1 = pole_root(s, p, 1), r2 = pole_root(s, p, 2);
    Contour a = rectangle(s, p, r1, r2, d);
    Contour b = rectangle(s, p, r1, r2, 0.5 * d);
    LoopIntegrals out{a.omega1, a.omega2, a.pole1, a.pole2, 0.0};
    double sc = 1e-12 * std::abs(a.omega1) * std::sqrt(std::abs(s.R(s.edges[4])));
    out.offset_deviation = std::max({rel_change(a.omega1, b.omega1, 0.0),
                                     rel_change(a.omega2, b.omega2, 0.0),
                                     rel_change(a.pole1, b.pole1, sc),
                                     rel_change(a.pole2, b.pole2, sc)});
    return out;
}

L1Result l1(const TwoGapSurface& s, const PoleConfig& p) {
    L1Result r;
    r.c = c_constants(s, p);
    r.loops = loop_integrals(s, p);
    std::array<cplx, 4> terms{r.loops.pole1, r.loops.pole2, r.c.C1 * r.loops.omega1,
                              r.c.C2 * r.loops.omega2};
    cplx total = 0.0;
    double scale = 1.0;
    for (cplx t : terms) {
        total += t;
        scale = std::max(scale, std::abs(t));
    }
    total *= 0.5;
    r.imag_residue = total.imag();
    if (std::abs(total.imag()) > 1e-8 * scale) {
        std::ostringstream os;
        os << "l1 has imaginary part " << total.imag();
        throw Error(Errc::RealnessViolation, os.str());
    }
    r.l1 = total.real();
    auto tl = theta_lambda(r.l1);
    r.theta = tl.theta;
    r.Lambda = tl.Lambda;
    return r;
}

ThetaLambda theta_lambda(double l) {
    return {std::exp(std::abs(l)), std::cosh(l)};
}

LnResult ln_rescaled(const TwoGapSurface& s, const PoleConfig& p, int n) {
    if (n < 1) throw Error(Errc::InvalidRange, "n must be positive");
    LnResult out;
    for (int i = 0; i < 5; ++i) out.edges_n[i] = double(n) * n * s.edges[i];
    out.ln = l1(s, p).l1;
    return out;
}

OmegaAsymptotics omega_asymptotics(const TwoGapSurface& s, const PoleConfig& p, double factor) {
    CConstants c = c_constants(s, p);
    OmegaAsymptotics o;
    o.E = factor * s.edges[4];
    if (!(o.E > s.edges[4])) throw Error(Errc::InvalidRange, "evaluation point must lie above E5");
    o.tau = 1.0 / std::sqrt(o.E);
    cplx E(o.E, 0.0);
    cplx sq = s.sqrtR(E);
    cplx rhs = pole_root(s, p, 1) / (sq * (E - p.P1)) + pole_root(s, p, 2) / (sq * (E - p.P2)) +
               c.C1 / sq + c.C2 * E / sq;
    double t3 = std::pow(o.tau, 3), t5 = std::pow(o.tau, 5);
    o.c3_taylor = -0.5 * kI * c.A;
    o.c5_taylor = 0.375 * kI * c.B;
    // Each coefficient is read off with the other Taylor term removed, so the
    // leftover is the O(tau^7) tail.
    o.c3_decomposition = (rhs - o.c5_taylor * t5) / t3;
    o.c5_decomposition = (rhs - o.c3_taylor * t3) / t5;
    o.rel3 = std::abs(o.c3_decomposition - o.c3_taylor) / std::abs(o.c3_taylor);
    o.rel5 = std::abs(o.c5_decomposition - o.c5_taylor) / std::abs(o.c5_taylor);
    return o;
}

namespace {

using Y2 = std::array<double, 2>;

// Branch of sqrt(-R) analytic in the upper half plane, negative left of E1.
cplx sqrt_minus_R(const TwoGapSurface& s, cplx u) {
    if (u.imag() <= 0.0) u.imag(1e-300);
    cplx p = -1.0;
    for (double e : s.edges) p *= std::sqrt(e - u);
    return p;
}

// The inverse Abel map on a horizontal line Im xi = const, sampled at sorted
// real parts by integrating dlambda/dxi = 2 sqrt(-R(lambda)).
struct Line {
    std::vector<double> t;
    std::vector<cplx> lam, dlam;

    cplx at(double x) const { return lam[index(x)]; }
    cplx d(double x) const { return dlam[index(x)]; }
    std::size_t index(double x) const {
        auto it = std::lower_bound(t.begin(), t.end(), x);
        if (it == t.end() || *it != x) throw Error(Errc::ConsistencyFailure, "probe node missing");
        return static_cast<std::size_t>(it - t.begin());
    }
};

Line integrate_line(const TwoGapSurface& s, cplx start, std::vector<double> times) {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    Line L;
    auto rhs = [&](const Y2& y, Y2& dy, double) {
        cplx v = 2.0 * sqrt_minus_R(s, cplx(y[0], y[1]));
        dy[0] = v.real();
        dy[1] = v.imag();
    };
    Y2 y{start.real(), start.imag()};
    auto st = odeint::make_controlled(1e-15, 1e-15, odeint::runge_kutta_fehlberg78<Y2>());
    double span = times.back() - times.front();
    odeint::integrate_times(st, rhs, y, times.begin(), times.end(), span * 1e-4,
                            [&](const Y2& v, double x) {
                                cplx l(v[0], v[1]);
                                L.t.push_back(x);
                                L.lam.push_back(l);
                                L.dlam.push_back(2.0 * sqrt_minus_R(s, l));
                            });
    return L;
}

// Panels on [a, b] graded geometrically toward the end c (a or b).
void graded(std::vector<double>& br, double a, double b, bool toward_a, double w0) {
    std::vector<double> pts;
    double len = b - a;
    double w = w0, pos = 0.0;
    pts.push_back(0.0);
    while (pos + w < len) {
        pos += w;
        pts.push_back(pos);
        w *= 1.5;
    }
    if (len - pts.back() < 0.5 * (pts.size() > 1 ? pts.back() - pts[pts.size() - 2] : len))
        pts.back() = len;
    else
        pts.push_back(len);
    for (double q : pts) br.push_back(toward_a ? a + q : b - q);
}

struct Panels {
    std::vector<double> nodes, weights;
    std::vector<std::pair<std::size_t, double>> panel;  // first node, half length
};

Panels make_panels(std::vector<double> br) {
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    const auto& rule = quad::legendre(20);
    Panels P;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        double h = 0.5 * (br[i + 1] - br[i]), m = 0.5 * (br[i + 1] + br[i]);
        if (h <= 0.0) continue;
        P.panel.push_back({P.nodes.size(), h});
        for (int k = 0; k < 20; ++k) {
            P.nodes.push_back(m + h * rule.x[k]);
            P.weights.push_back(h * rule.w[k]);
        }
    }
    return P;
}

// int_0^Xi a(xi) int_0^xi b - 1/2 int_0^Xi b, panel by panel.
cplx ab_functional(const Panels& P, const std::vector<cplx>& a, const std::vector<cplx>& b) {
    const auto& S = quad::integration_matrix(20);
    cplx acc = 0.0, outer = 0.0, total_b = 0.0;
    for (auto [first, h] : P.panel) {
        for (int i = 0; i < 20; ++i) {
            cplx inner = acc;
            for (int j = 0; j < 20; ++j) inner += h * S[i][j] * b[first + j];
            outer += P.weights[first + i] * a[first + i] * inner;
            total_b += P.weights[first + i] * b[first + i];
        }
        for (int j = 0; j < 20; ++j) acc += P.weights[first + j] * b[first + j];
    }
    return outer - 0.5 * total_b;
}

}  // namespace

ProbeResult degenerate_scaling_probe(const TwoGapSurface& s, const std::vector<double>& deltas) {
    if (deltas.size() < 2) throw Error(Errc::InvalidRange, "probe needs at least two deltas");
    for (std::size_t i = 0; i < deltas.size(); ++i)
        if (!(deltas[i] > 0.0) || (i > 0 && !(deltas[i] < deltas[i - 1])))
            throw Error(Errc::InvalidRange, "deltas must be positive and decreasing");
    // The Abel image is the symmetric domain only when the flow periods are commensurate.
    if (std::abs(s.Xi1 - 2.0 * s.Xi2) > 1e-7 * s.Xi2)
        throw Error(Errc::ConsistencyFailure, "probe needs Xi1 = 2 Xi2");
    const double Xi = s.Xi1;
    const double q = 0.25 * Xi;
    // Heights of the Abel image: band 1 below the cut, (E5, inf) above 0.
    Gap band1(s, 1);
    band1.a = s.edges[0];
    band1.b = s.edges[1];
    band1.others = {s.edges[2], s.edges[3], s.edges[4]};
    auto upper_depth = [&](double l) {
        // 1/2 int_l^inf du / sqrt|R| with u = l / t^2.
        return 0.5 * quad::adaptive(
                         [&](double t) {
                             if (t <= 0.0) return 0.0;
                             double u = l / (t * t);
                             return 2.0 * l / (t * t * t) / std::sqrt(std::abs(s.R(u)));
                         },
                         0.0, 1.0, 1e-13);
    };
    const double h1 = band1.half_time(kPi);
    const double h5 = upper_depth(s.edges[4]);

    ProbeResult out;
    out.F0_abs = 5.0 * kPi * std::pow(3.0, -11.0 / 3.0) * std::pow(2.0, -2.0 / 3.0);
    for (double delta : deltas) {
        if (delta >= 0.5 * std::min(h1, h5)) {
            std::ostringstream os;
            os << "delta " << delta << " exceeds half the Abel strip height " << 0.5 * std::min(h1, h5);
            throw Error(Errc::InvalidRange, os.str());
        }
        const double hfd = 0.1 * delta;
        // Start points on the boundary of the Abel image.
        auto f1 = [&](double phi) { return band1.half_time(phi) - delta; };
        boost::uintmax_t it = 200;
        auto r1 = boost::math::tools::toms748_solve(f1, 0.0, kPi, -delta, h1 - delta,
                                                    boost::math::tools::eps_tolerance<double>(52), it);
        cplx start1(band1.lambda(0.5 * (r1.first + r1.second)), 0.0);
        double hi = std::max(2.0 * s.edges[4], std::pow(delta, -2.0 / 3.0));
        while (upper_depth(hi) > delta) hi *= 2.0;
        it = 200;
        auto r2 = boost::math::tools::toms748_solve(
            [&](double l) { return upper_depth(l) - delta; }, s.edges[4], hi, h5 - delta,
            upper_depth(hi) - delta, boost::math::tools::eps_tolerance<double>(52), it);
        cplx start2(0.5 * (r2.first + r2.second), 0.0);

        std::vector<double> br;
        const double w0 = delta / 8.0;
        graded(br, 0.0, q, true, w0);
        graded(br, q, 0.5 * Xi, false, w0);
        graded(br, 0.5 * Xi, 3.0 * q, true, w0);
        graded(br, 3.0 * q, Xi, false, w0);
        Panels P = make_panels(br);

        // Arguments of lambda1 (period Xi, line -i delta) and lambda2 (period Xi/2, line +i delta).
        auto red1 = [&](double x) {
            double y = x - Xi * std::floor((x + q) / Xi);
            return y;
        };
        auto red2 = [&](double x) {
            double y = x - 0.5 * Xi * std::floor((x + q) / (0.5 * Xi));
            return y;
        };
        auto arg1 = [&](double y) { return y <= q ? y : 0.5 * Xi - y; };
        auto arg2 = [&](double y) { return y >= 0.0 ? y : -y; };
        const std::array<double, 5> shifts{-hfd, -0.5 * hfd, 0.0, 0.5 * hfd, hfd};
        std::vector<double> t1{-q, q}, t2{0.0, q};
        for (double sh : shifts)
            for (double x : P.nodes) {
                t1.push_back(arg1(red1(x + sh)));
                t2.push_back(arg2(red2(x + sh)));
            }
        Line L1, L2;
        try {
            L1 = integrate_line(s, start1, t1);
            L2 = integrate_line(s, start2, t2);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& ex) {
            throw Error(Errc::EdgeStall, std::string("probe line integration failed: ") + ex.what());
        }
        // Both lines end on band 2, where lambda is real.
        for (const Line* L : {&L1, &L2}) {
            cplx e = L->lam.back();
            if (std::abs(e.imag()) > 1e-6 * std::abs(e) || e.real() < s.edges[2] - 1e-6 ||
                e.real() > s.edges[3] + 1e-6)
                throw Error(Errc::ConsistencyFailure, "probe line does not end on band 2");
        }
        auto lam1 = [&](double x, cplx* d) {
            double y = red1(x);
            if (y <= q) {
                if (d) *d = L1.d(y);
                return L1.at(y);
            }
            if (d) *d = -std::conj(L1.d(0.5 * Xi - y));
            return std::conj(L1.at(0.5 * Xi - y));
        };
        auto lam2 = [&](double x, cplx* d) {
            double y = red2(x);
            if (y >= 0.0) {
                if (d) *d = L2.d(y);
                return L2.at(y);
            }
            if (d) *d = -std::conj(L2.d(-y));
            return std::conj(L2.at(-y));
        };
        const std::size_t n = P.nodes.size();
        auto FG = [&](double a1, double a2, int power) {
            std::vector<cplx> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                cplx l1v = lam1(P.nodes[i] + a1, nullptr), l2v = lam2(P.nodes[i] + a2, nullptr);
                a[i] = l2v - l1v;
                b[i] = std::pow(l2v, power) - std::pow(l1v, power);
            }
            return ab_functional(P, a, b);
        };
        // Mixed second difference at steps h and h/2, Richardson-combined.
        auto mixed = [&](int power) {
            auto m = [&](double h) {
                return (FG(h, h, power) - FG(h, -h, power) - FG(-h, h, power) + FG(-h, -h, power)) /
                       (4.0 * h * h);
            };
            return (4.0 * m(0.5 * hfd) - m(hfd)) / 3.0;
        };
        cplx dF = mixed(3);
        cplx intF = 0.0, intG = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx d1, d2;
            cplx l1v = lam1(P.nodes[i], &d1), l2v = lam2(P.nodes[i], &d2);
            intF -= P.weights[i] * (d2 * l1v * l1v * l1v + d1 * l2v * l2v * l2v);
            intG -= P.weights[i] * (d2 * l1v * l1v + d1 * l2v * l2v);
        }
        out.delta.push_back(delta);
        out.d2F.push_back(std::abs(dF));
        out.d2F_int.push_back(std::abs(intF));
        out.d2G.push_back(std::abs(intG));
    }
    auto fit = [&](const std::vector<double>& y, double* resid) {
        const std::size_t m = y.size();
        Eigen::MatrixXd A(m, 2);
        Eigen::VectorXd v(m);
        for (std::size_t i = 0; i < m; ++i) {
            A(i, 0) = std::log(out.delta[i]);
            A(i, 1) = 1.0;
            v(i) = std::log(y[i]);
        }
        Eigen::Vector2d c = A.colPivHouseholderQr().solve(v);
        if (resid) *resid = (A * c - v).norm() / std::sqrt(double(m));
        return c(0);
    };
    out.slope = fit(out.d2F, &out.fit_residual);
    out.slope_G = fit(out.d2G, nullptr);
    for (std::size_t i = 0; i < out.delta.size(); ++i)
        out.G_scaled_max = std::max(out.G_scaled_max, out.d2G[i] * out.delta[i] * out.delta[i]);
    out.prefactor = out.d2F.back() * std::pow(out.delta.back(), 8.0 / 3.0);
    if (out.fit_residual > 0.3) {
        std::ostringstream os;
        os << "log-log fit residual " << out.fit_residual;
        throw Error(Errc::NoiseDominated, os.str());
    }
    return out;
}

}  // namespace qpspec
