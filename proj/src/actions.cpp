#include "qpspec/actions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qpspec/errors.hpp"
#include "qpspec/quad.hpp"

namespace qpspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOuterTol = 1e-11;

double kreal(const PeriodicSpectrum& s, double e) { return k_above(s, e).real(); }
double kimag(const PeriodicSpectrum& s, double e) { return k_above(s, e).imag(); }
double kprime(const PeriodicSpectrum& s, double e) {
    return std::abs(s.P(e)) / (2.0 * std::sqrt(std::abs(s.R(e))));
}

// 0-based index of E_m (1-based m).
inline double edge(const AdiabaticProblem& p, int m) { return p.spectrum.edges[m - 1]; }

void require_window(const AdiabaticProblem& p, double E) {
    if (!tibm_holds(p, E)) {
        std::ostringstream os;
        os << "window condition fails at alpha=" << p.alpha << ", E=" << E << ", n=" << p.n;
        throw Error(Errc::WindowViolation, os.str());
    }
}

double dist_to_segment(cplx z, cplx a, cplx b) {
    cplx d = b - a;
    double t = std::clamp(std::real((z - a) * std::conj(d)) / std::norm(d), 0.0, 1.0);
    return std::abs(z - (a + t * d));
}

struct Loop {
    cplx a, b;  // segment enclosed
    int seed_side;  // 0 bottom, 1 right, 2 top, 3 left
    double seed_coord;  // position of the seed along that side
};

Loop loop_for(const AdiabaticProblem& p, double E, int which) {
    // which: 0 Phi0, 1 PhiPi, 2 V0, 3 VPi, 4 H0, 5 HPi
    BranchPointSet bp = branch_points(p, E);
    const double z2 = bp.real_lo, z3 = bp.real_hi;
    switch (which) {
    case 0: return {cplx(-z2, 0), cplx(z2, 0), 2, 0.0};
    case 1: return {cplx(z3, 0), cplx(2 * kPi - z3, 0), 2, kPi};
    case 2: {
        double y = bp.imaginary_below.at(0);
        return {cplx(0, -y), cplx(0, y), 1, 0.0};
    }
    case 3: {
        if (bp.imaginary_above.empty())
            throw Error(Errc::WindowViolation, "no branch point above the window for n = g");
        double y = bp.imaginary_above.at(0);
        return {cplx(kPi, -y), cplx(kPi, y), 1, 0.0};
    }
    case 4: return {cplx(-z3, 0), cplx(-z2, 0), 1, 0.0};
    default: return {cplx(z2, 0), cplx(z3, 0), 3, 0.0};
    }
}

double loop_offset(const AdiabaticProblem& p, double E, const Loop& L, double scale) {
    const auto& e = p.spectrum.edges;
    double dmin = std::numeric_limits<double>::infinity();
    for (double ej : e) {
        cplx b = branch_point((E - ej) / p.alpha);
        for (cplx c : {b, -b, std::conj(b), -std::conj(b)})
            for (double shift : {-2 * kPi, 0.0, 2 * kPi}) {
                cplx z = c + shift;
                double d = dist_to_segment(z, L.a, L.b);
                if (std::abs(z - L.a) < 1e-12 || std::abs(z - L.b) < 1e-12) continue;
                dmin = std::min(dmin, d);
            }
    }
    double delta = std::min(0.1, 0.25 * dmin) * scale;
    if (!(delta > 1e-8)) {
        std::ostringstream os;
        os << "contour offset " << delta << " too small: another branch point lies at distance "
           << dmin;
        throw Error(Errc::ContourCollision, os.str());
    }
    return delta;
}

cplx run_loop(const AdiabaticProblem& p, double E, const Loop& L, double scale) {
    const PeriodicSpectrum& s = p.spectrum;
    const double delta = loop_offset(p, E, L, scale);
    const double xmin = std::min(L.a.real(), L.b.real()) - delta;
    const double xmax = std::max(L.a.real(), L.b.real()) + delta;
    const double ymin = std::min(L.a.imag(), L.b.imag()) - delta;
    const double ymax = std::max(L.a.imag(), L.b.imag()) + delta;
    const cplx c[4] = {{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};

    cplx seed;
    switch (L.seed_side) {
    case 0: seed = {L.seed_coord, ymin}; break;
    case 1: seed = {xmax, L.seed_coord}; break;
    case 2: seed = {L.seed_coord, ymax}; break;
    default: seed = {xmin, L.seed_coord}; break;
    }
    auto energy = [&](cplx z) { return E - p.alpha * std::cos(z); };
    const double e_seed = energy(seed).real();
    if (!band_of(s, e_seed)) throw Error(Errc::ContourCollision, "contour seed is not in a band");

    std::vector<cplx> path{seed};
    for (int k = 1; k <= 4; ++k) path.push_back(c[(L.seed_side + k) % 4]);
    path.push_back(seed);

    const quad::Rule& rule = quad::legendre(20);
    const auto& S = quad::integration_matrix(20);
    const int n = 20;

    cplx kappa = kreal(s, e_seed);
    const cplx kappa_seed = kappa;
    cplx r = s.sqrtR(cplx(e_seed, 0.0));
    cplx total = 0.0;
    std::vector<cplx> kp(n);
    for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
        const cplx p0 = path[seg], p1 = path[seg + 1];
        const double len = std::abs(p1 - p0);
        if (len == 0.0) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil(len / (0.5 * delta))));
        for (int q = 0; q < panels; ++q) {
            const cplx a = p0 + (p1 - p0) * (double(q) / panels);
            const cplx b = p0 + (p1 - p0) * (double(q + 1) / panels);
            const cplx h = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (int i = 0; i < n; ++i) {
                cplx z = mid + h * rule.x[i];
                cplx e = energy(z);
                cplx s0 = 1.0;
                for (double ej : s.edges) s0 *= std::sqrt(e - ej);
                if (std::abs(s0 - r) > std::abs(s0 + r)) s0 = -s0;
                r = s0;
                kp[i] = s.P(e) / (2.0 * r) * p.alpha * std::sin(z);
            }
            cplx panel = 0.0, step = 0.0;
            for (int i = 0; i < n; ++i) {
                cplx ki = 0.0;
                for (int j = 0; j < n; ++j) ki += S[i][j] * kp[j];
                panel += rule.w[i] * (kappa + h * ki);
                step += rule.w[i] * kp[i];
            }
            total += h * panel;
            kappa += h * step;
        }
    }
    const double closure = std::abs(kappa - kappa_seed);
    if (closure > 1e-8 * (1.0 + std::abs(kappa_seed))) {
        std::ostringstream os;
        os << "continued momentum does not close around the loop (mismatch " << closure << ")";
        throw Error(Errc::ContourCollision, os.str());
    }
    return total;
}

}  // namespace

double AdiabaticProblem::h() const {
    double x = 2.0 * kPi / epsilon;
    return x - std::floor(x);
}

bool tibm_holds(const AdiabaticProblem& p, double E) {
    const int n = p.n, g = p.spectrum.g;
    if (n < 1 || n > g || !(p.alpha > 0.0)) return false;
    const double lo = E - p.alpha, hi = E + p.alpha;
    bool ok = lo < edge(p, 2 * n) && edge(p, 2 * n + 1) < hi && edge(p, 2 * n - 1) < lo;
    if (n < g) ok = ok && hi < edge(p, 2 * n + 2);
    return ok;
}

cplx branch_point(double r) {
    if (r >= -1.0 && r <= 1.0) return {std::acos(r), 0.0};
    if (r > 1.0) return {0.0, std::acosh(r)};
    return {kPi, std::acosh(-r)};
}

BranchPointSet branch_points(const AdiabaticProblem& p, double E) {
    require_window(p, E);
    const int n = p.n, g = p.spectrum.g;
    BranchPointSet b;
    b.real_lo = std::acos((E - edge(p, 2 * n)) / p.alpha);
    b.real_hi = std::acos((E - edge(p, 2 * n + 1)) / p.alpha);
    for (int j = 2 * n - 1; j >= 1; --j) b.imaginary_below.push_back(std::acosh((E - edge(p, j)) / p.alpha));
    for (int j = 2 * n + 2; j <= 2 * g + 1; ++j)
        b.imaginary_above.push_back(std::acosh((edge(p, j) - E) / p.alpha));
    return b;
}

cplx loop_integral(const AdiabaticProblem& p, double E, Nu nu, double scale) {
    require_window(p, E);
    return run_loop(p, E, loop_for(p, E, nu == Nu::Zero ? 0 : 1), scale);
}

cplx loop_integral(const AdiabaticProblem& p, double E, Action a, double scale) {
    require_window(p, E);
    int which = a == Action::V0 ? 2 : a == Action::VPi ? 3 : a == Action::H0 ? 4 : 5;
    return run_loop(p, E, loop_for(p, E, which), scale);
}

double phase_integral(const AdiabaticProblem& p, double E, Nu nu, Method m, double scale) {
    require_window(p, E);
    const PeriodicSpectrum& s = p.spectrum;
    const double kg = s.gap_level(p.n);
    if (m == Method::Contour) {
        cplx v = loop_integral(p, E, nu, scale);
        return nu == Nu::Zero ? 0.5 * v.real() : -0.5 * v.real();
    }
    BranchPointSet b = branch_points(p, E);
    if (nu == Nu::Zero) {
        const double z2 = b.real_lo;
        return 2.0 * quad::adaptive(
                         [&](double phi) {
                             double z = z2 * std::sin(phi);
                             return (kg - kreal(s, E - p.alpha * std::cos(z))) * z2 * std::cos(phi);
                         },
                         0.0, 0.5 * kPi, kOuterTol);
    }
    const double L = kPi - b.real_hi;
    return 2.0 * quad::adaptive(
                     [&](double phi) {
                         double x = L * std::sin(phi);
                         return (kreal(s, E + p.alpha * std::cos(x)) - kg) * L * std::cos(phi);
                     },
                     0.0, 0.5 * kPi, kOuterTol);
}

double phase_derivative(const AdiabaticProblem& p, double E, Nu nu) {
    require_window(p, E);
    const PeriodicSpectrum& s = p.spectrum;
    BranchPointSet b = branch_points(p, E);
    if (nu == Nu::Zero) {
        const double z2 = b.real_lo;
        return -2.0 * quad::adaptive(
                          [&](double phi) {
                              double z = z2 * std::sin(phi);
                              return kprime(s, E - p.alpha * std::cos(z)) * z2 * std::cos(phi);
                          },
                          0.0, 0.5 * kPi, kOuterTol);
    }
    const double L = kPi - b.real_hi;
    return 2.0 * quad::adaptive(
                     [&](double phi) {
                         double x = L * std::sin(phi);
                         return kprime(s, E + p.alpha * std::cos(x)) * L * std::cos(phi);
                     },
                     0.0, 0.5 * kPi, kOuterTol);
}

double action_integral(const AdiabaticProblem& p, double E, Action a, Method m, double scale) {
    require_window(p, E);
    const PeriodicSpectrum& s = p.spectrum;
    const int n = p.n;
    BranchPointSet b = branch_points(p, E);
    if (a == Action::VPi && b.imaginary_above.empty()) return std::numeric_limits<double>::infinity();
    if (m == Method::Contour) {
        cplx v = loop_integral(p, E, a, scale);
        // Orientation fixed so that every action comes out positive.
        switch (a) {
        case Action::V0:
        case Action::H0: return 0.5 * v.imag();
        default: return -0.5 * v.imag();
        }
    }
    switch (a) {
    case Action::V0: {
        const double y = b.imaginary_below.at(0), klo = s.k_edge[2 * n - 2];
        return 2.0 * quad::adaptive(
                         [&](double phi) {
                             double t = y * std::sin(phi);
                             return (kreal(s, E - p.alpha * std::cosh(t)) - klo) * y * std::cos(phi);
                         },
                         0.0, 0.5 * kPi, kOuterTol);
    }
    case Action::VPi: {
        const double y = b.imaginary_above.at(0), khi = s.k_edge[2 * n + 1];
        return 2.0 * quad::adaptive(
                         [&](double phi) {
                             double t = y * std::sin(phi);
                             return (khi - kreal(s, E + p.alpha * std::cosh(t))) * y * std::cos(phi);
                         },
                         0.0, 0.5 * kPi, kOuterTol);
    }
    default: {
        const double mid = 0.5 * (b.real_lo + b.real_hi), hw = 0.5 * (b.real_hi - b.real_lo);
        return quad::adaptive(
            [&](double phi) {
                double z = mid - hw * std::cos(phi);
                return kimag(s, E - p.alpha * std::cos(z)) * hw * std::sin(phi);
            },
            0.0, kPi, kOuterTol);
    }
    }
}

ActionProfile make_profile(double E, double eps, double phi0, double phipi, double dphi0,
                           double dphipi, double sv0, double svpi, double sh0, double shpi) {
    ActionProfile a;
    a.E = E;
    a.epsilon = eps;
    a.phi0 = phi0;
    a.phipi = phipi;
    a.dphi0 = dphi0;
    a.dphipi = dphipi;
    a.sv0 = sv0;
    a.svpi = svpi;
    a.sh0 = sh0;
    a.shpi = shpi;
    a.sh = sh0 + shpi;
    a.tv0 = std::exp(-sv0 / eps);
    a.tvpi = std::exp(-svpi / eps);
    a.th0 = std::exp(-sh0 / eps);
    a.thpi = std::exp(-shpi / eps);
    a.th = a.th0 * a.thpi;
    return a;
}

ActionProfile tunneling_profile(const AdiabaticProblem& p, double E) {
    return make_profile(E, p.epsilon, phase_integral(p, E, Nu::Zero), phase_integral(p, E, Nu::Pi),
                        phase_derivative(p, E, Nu::Zero), phase_derivative(p, E, Nu::Pi),
                        action_integral(p, E, Action::V0), action_integral(p, E, Action::VPi),
                        action_integral(p, E, Action::H0), action_integral(p, E, Action::HPi));
}

}  // namespace qpspec
