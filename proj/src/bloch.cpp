#include "qpspec/bloch.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpspec/errors.hpp"
#include "qpspec/quad.hpp"

namespace qpspec {

namespace {

constexpr double kTol = 1e-14;

// theta such that E = a + (b - a)(1 - cos theta)/2, computed without
// cancellation near either end.
double theta_of(double a, double b, double E) {
    double t = (E - a) / (b - a), u = (b - E) / (b - a);
    t = std::max(t, 0.0);
    u = std::max(u, 0.0);
    return 2.0 * std::atan2(std::sqrt(t), std::sqrt(u));
}

double e_of(double a, double b, double th) { return a + 0.5 * (b - a) * (1.0 - std::cos(th)); }

// |prod_{j != skip1, skip2} (E - E_j)|
double rest_abs(const std::vector<double>& e, double E, int skip1, int skip2) {
    double r = 1.0;
    for (int j = 0; j < static_cast<int>(e.size()); ++j)
        if (j != skip1 && j != skip2) r *= std::abs(E - e[j]);
    return r;
}

double poly(const std::vector<double>& c, double E) {
    double p = 1.0;  // monic
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) p = p * E + c[i];
    return p;
}

}  // namespace

double PeriodicSpectrum::P(double E) const { return poly(diff_coeffs, E); }

cplx PeriodicSpectrum::P(cplx E) const {
    cplx p = 1.0;
    for (int i = static_cast<int>(diff_coeffs.size()) - 1; i >= 0; --i) p = p * E + diff_coeffs[i];
    return p;
}

double PeriodicSpectrum::R(double E) const {
    double r = 1.0;
    for (double ej : edges) r *= (E - ej);
    return r;
}

cplx PeriodicSpectrum::sqrtR(cplx E) const {
    cplx r = 1.0;
    for (double ej : edges) r *= std::sqrt(cplx(E.real() - ej, E.imag() == 0.0 ? 0.0 : E.imag()));
    return r;
}

double PeriodicSpectrum::gap_residual(int j) const {
    const int lo = 2 * j - 1;
    const double a = edges[lo], b = edges[lo + 1];
    return quad::adaptive(
        [&](double th) {
            double E = e_of(a, b, th);
            return P(E) / std::sqrt(rest_abs(edges, E, lo, lo + 1));
        },
        0.0, std::numbers::pi, kTol);
}

namespace detail {

double segment_integral(const PeriodicSpectrum& s, int lo, double E) {
    const auto& e = s.edges;
    const int last = static_cast<int>(e.size()) - 1;
    if (lo < 0) {
        double umax = std::sqrt(std::max(e[0] - E, 0.0));
        return quad::adaptive(
            [&](double u) {
                double x = e[0] - u * u;
                return s.P(x) / std::sqrt(rest_abs(e, x, 0, -1));
            },
            0.0, umax, kTol);
    }
    if (lo == last) {
        double umax = std::sqrt(std::max(E - e[last], 0.0));
        return quad::adaptive(
            [&](double u) {
                double x = e[last] + u * u;
                return s.P(x) / std::sqrt(rest_abs(e, x, last, -1));
            },
            0.0, umax, kTol);
    }
    const double a = e[lo], b = e[lo + 1];
    return 0.5 * quad::adaptive(
                     [&](double th) {
                         double x = e_of(a, b, th);
                         return s.P(x) / std::sqrt(rest_abs(e, x, lo, lo + 1));
                     },
                     0.0, theta_of(a, b, E), kTol);
}

double segment_integral_chebyshev(const PeriodicSpectrum& s, int lo, double E, int n) {
    const auto& e = s.edges;
    const double a = e[lo], b = e[lo + 1];
    auto f = [&](double th) {
        double x = e_of(a, b, th);
        return s.P(x) / std::sqrt(rest_abs(e, x, lo, lo + 1));
    };
    const double th_max = theta_of(a, b, E);
    if (th_max == std::numbers::pi) return 0.5 * quad::chebyshev(f, n);
    // Partial segment: n panels of 20-point Gauss-Legendre.
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += quad::gauss(f, th_max * i / n, th_max * (i + 1) / n, 20);
    return 0.5 * acc;
}

}  // namespace detail

PeriodicSpectrum build_spectrum(const std::vector<double>& edges) {
    if (edges.size() % 2 == 0 || edges.size() < 3) {
        std::ostringstream os;
        os << "expected an odd number >= 3 of band edges, got " << edges.size();
        throw Error(Errc::EvenLength, os.str());
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            std::ostringstream os;
            os << "edges must be strictly increasing (E" << i << "=" << edges[i - 1] << ", E" << i + 1
               << "=" << edges[i] << ")";
            throw Error(Errc::NonMonotoneEdges, os.str());
        }
    }
    PeriodicSpectrum s;
    s.edges = edges;
    s.g = static_cast<int>(edges.size() - 1) / 2;
    const int g = s.g;

    // Moments of 1/sqrt|R| over each gap.
    Eigen::MatrixXd A(g, g);
    Eigen::VectorXd rhs(g);
    for (int j = 0; j < g; ++j) {
        const int lo = 2 * j + 1;
        const double a = edges[lo], b = edges[lo + 1];
        for (int i = 0; i <= g; ++i) {
            double m = quad::adaptive(
                [&](double th) {
                    double x = e_of(a, b, th);
                    return std::pow(x, i) / std::sqrt(rest_abs(edges, x, lo, lo + 1));
                },
                0.0, std::numbers::pi, kTol);
            if (i < g)
                A(j, i) = m;
            else
                rhs(j) = -m;
        }
    }
    Eigen::VectorXd c = A.fullPivLu().solve(rhs);
    s.diff_coeffs.assign(c.data(), c.data() + g);

    s.k_edge.assign(edges.size(), 0.0);
    for (int b = 0; b < g; ++b) {
        double inc = std::abs(detail::segment_integral(s, 2 * b, edges[2 * b + 1]));
        s.k_edge[2 * b + 1] = s.k_edge[2 * b] + inc;
        s.k_edge[2 * b + 2] = s.k_edge[2 * b + 1];
    }
    return s;
}

int band_of(const PeriodicSpectrum& s, double E) {
    const auto& e = s.edges;
    for (int b = 0; b < s.g; ++b)
        if (E >= e[2 * b] && E <= e[2 * b + 1]) return b + 1;
    if (E >= e[2 * s.g]) return s.g + 1;
    return 0;
}

int gap_of(const PeriodicSpectrum& s, double E) {
    const auto& e = s.edges;
    for (int j = 1; j <= s.g; ++j)
        if (E > e[2 * j - 1] && E < e[2 * j]) return j;
    return 0;
}

cplx k_above(const PeriodicSpectrum& s, double E) {
    const auto& e = s.edges;
    if (E < e[0]) return {0.0, std::abs(detail::segment_integral(s, -1, E))};
    if (int b = band_of(s, E)) {
        int lo = 2 * (b - 1);
        return {s.k_edge[lo] + std::abs(detail::segment_integral(s, lo, E)), 0.0};
    }
    int j = gap_of(s, E);
    int lo = 2 * j - 1;
    return {s.k_edge[lo], std::abs(detail::segment_integral(s, lo, E))};
}

cplx dk_dE(const PeriodicSpectrum& s, cplx E) {
    if (E.imag() == 0.0) {
        for (double ej : s.edges)
            if (E.real() == ej) {
                std::ostringstream os;
                os << "k'(E) is infinite at the branch point E=" << ej;
                throw Error(Errc::BranchPointSingularity, os.str());
            }
    }
    if (E.imag() < 0.0) return std::conj(dk_dE(s, std::conj(E)));
    return s.P(E) / (2.0 * s.sqrtR(E));
}

Momentum quasi_momentum(const PeriodicSpectrum& s, cplx E, Sheet sheet) {
    Momentum m;
    m.sheet = sheet;
    const double x = E.real(), y = std::abs(E.imag());
    cplx k = k_above(s, x);
    if (y > 0.0) {
        // Vertical leg x + it, t = u^2, regular at t = 0 even on a branch point.
        cplx leg = quad::adaptive_c(
            [&](double u) {
                cplx z(x, u * u);
                return 2.0 * u * s.P(z) / (2.0 * s.sqrtR(z)) * cplx(0.0, 1.0);
            },
            0.0, std::sqrt(y), kTol, 1e-15 * (1.0 + std::abs(k)));
        k += leg;
        if (E.imag() < 0.0) k = std::conj(k);
    } else if (int b = band_of(s, x)) {
        m.band = b;
    }
    m.value = (sheet == Sheet::Upper) ? k : -k;
    return m;
}

double dispersion(const PeriodicSpectrum& s, double k) {
    const auto& e = s.edges;
    if (!(k >= 0.0)) {
        std::ostringstream os;
        os << "k=" << k << " has no real preimage";
        throw Error(Errc::OutOfRange, os.str());
    }
    if (k == 0.0) return e[0];
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    for (int b = 0; b < s.g; ++b) {
        const double k0 = s.k_edge[2 * b], k1 = s.k_edge[2 * b + 1];
        if (k > k1) continue;
        if (k == k1) return e[2 * b + 1];
        const double a = e[2 * b], bb = e[2 * b + 1];
        auto f = [&](double th) {
            return std::abs(detail::segment_integral(s, 2 * b, e_of(a, bb, th))) - (k - k0);
        };
        auto r = boost::math::tools::toms748_solve(f, 0.0, std::numbers::pi, -(k - k0), k1 - k, tol, it);
        return e_of(a, bb, 0.5 * (r.first + r.second));
    }
    const int last = 2 * s.g;
    const double k0 = s.k_edge[last];
    auto f = [&](double u) { return detail::segment_integral(s, last, e[last] + u * u) - (k - k0); };
    double hi = 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    auto r = boost::math::tools::toms748_solve(f, 0.0, hi, tol, it);
    double u = 0.5 * (r.first + r.second);
    return e[last] + u * u;
}

}  // namespace qpspec
