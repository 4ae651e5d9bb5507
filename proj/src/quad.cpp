#include "qpspec/quad.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpspec::quad {

namespace bq = boost::math::quadrature;

namespace {

template <int N>
Rule make_rule() {
    Rule r;
    const auto& ab = bq::gauss<double, N>::abscissa();
    const auto& wt = bq::gauss<double, N>::weights();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < ab.size(); ++i) {
        pts.emplace_back(ab[i], wt[i]);
        if (ab[i] != 0.0) pts.emplace_back(-ab[i], wt[i]);
    }
    std::sort(pts.begin(), pts.end());
    for (auto& [x, w] : pts) {
        r.x.push_back(x);
        r.w.push_back(w);
    }
    return r;
}

template <class T>
struct Panel {
    T value;
    double l1;
};

template <class T, class F>
Panel<T> gl_panel(const F& f, double a, double b) {
    const Rule& r = legendre(20);
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    T s = T(0);
    double l1 = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        T v = f(c + h * r.x[i]);
        s += r.w[i] * v;
        l1 += r.w[i] * std::abs(v);
    }
    return {s * h, l1 * std::abs(h)};
}

template <class T, class F>
T refine(const F& f, double a, double b, T whole, double rel, double abs_tol, int depth) {
    const double m = 0.5 * (a + b);
    T l = gl_panel<T>(f, a, m).value, r = gl_panel<T>(f, m, b).value;
    T both = l + r;
    if (depth <= 0 || std::abs(both - whole) <= std::max(rel * std::abs(both), abs_tol)) return both;
    return refine<T>(f, a, m, l, rel, 0.5 * abs_tol, depth - 1) +
           refine<T>(f, m, b, r, rel, 0.5 * abs_tol, depth - 1);
}

template <class T, class F>
T adaptive_t(const F& f, double a, double b, double rel, double abs_tol) {
    if (a == b) return T(0);
    auto first = gl_panel<T>(f, a, b);
    // Floor against cancellation, relative to the integral of |f|.
    abs_tol = std::max(abs_tol, 0.1 * rel * first.l1);
    return refine<T>(f, a, b, first.value, rel, abs_tol, 40);
}

std::vector<std::vector<double>> build_integration_matrix(int n) {
    const Rule& r = legendre(n);
    auto lagrange = [&](int j, double t) {
        double v = 1.0;
        for (int m = 0; m < n; ++m)
            if (m != j) v *= (t - r.x[m]) / (r.x[j] - r.x[m]);
        return v;
    };
    std::vector<std::vector<double>> S(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        const double a = -1.0, b = r.x[i];
        const double h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int q = 0; q < n; ++q) acc += r.w[q] * lagrange(j, c + h * r.x[q]);
            S[i][j] = acc * h;
        }
    }
    return S;
}

}  // namespace

double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                double* err) {
    if (err) *err = 0.0;
    return adaptive_t<double>(f, a, b, rel_tol, 0.0);
}

cplx adaptive_c(const std::function<cplx(double)>& f, double a, double b, double rel_tol,
                double abs_tol) {
    return adaptive_t<cplx>(f, a, b, rel_tol, abs_tol);
}

double half_line(const std::function<double(double)>& f, double rel_tol) {
    bq::exp_sinh<double> integrator;
    return integrator.integrate(f, rel_tol);
}

const Rule& legendre(int n) {
    static const Rule r10 = make_rule<10>();
    static const Rule r20 = make_rule<20>();
    static const Rule r30 = make_rule<30>();
    static const Rule r40 = make_rule<40>();
    switch (n) {
    case 10: return r10;
    case 20: return r20;
    case 30: return r30;
    default: return r40;
    }
}

const std::vector<std::vector<double>>& integration_matrix(int n) {
    static const auto m20 = build_integration_matrix(20);
    static const auto m30 = build_integration_matrix(30);
    return n == 30 ? m30 : m20;
}

double gauss(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& r = legendre(n);
    double h = 0.5 * (b - a), c = 0.5 * (a + b), s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

double chebyshev(const std::function<double(double)>& f, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f(std::numbers::pi * (i + 0.5) / n);
    return s * std::numbers::pi / n;
}

}  // namespace qpspec::quad
