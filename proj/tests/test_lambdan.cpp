#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qpspec/errors.hpp"
#include "qpspec/lambdan.hpp"
#include "support.hpp"

using namespace qpspec;
using testsupport::rel;
using testsupport::tanh_sinh;

namespace {
constexpr double kPi = std::numbers::pi;

const TwoGapSurface& surface() {
    static const TwoGapSurface s = calibrate({0.0, 6.0, 14.0, 30.0, 50.0}).surface;
    return s;
}

// int_{E_{2j}}^{E_{2j+1}} lambda^k / sqrt|R| with exact endpoint distances.
double gap_moment(const TwoGapSurface& s, int j, int k) {
    const double a = s.gap_lo(j), b = s.gap_hi(j);
    return tanh_sinh(
        [&](double x, double xc) {
            const double da = xc < 0 ? -xc : x - a, db = xc > 0 ? xc : b - x;
            double r = da * db;
            for (int i = 0; i < 5; ++i)
                if (i != 2 * j - 1 && i != 2 * j) r *= std::abs(x - s.edges[i]);
            return std::pow(x, k) / std::sqrt(r);
        },
        a, b);
}

PoleConfig symmetric(const TwoGapSurface& s, int a, int b, double shift) {
    return poles_from_times(s, a * 0.5 * s.Xi1 + shift, b * 0.5 * s.Xi2 + shift);
}
}  // namespace

TEST_CASE("periods: ordering, quadrature agreement, scaling") {
    for (auto e : {std::array<double, 5>{0, 6, 14, 30, 50}, std::array<double, 5>{0, 1, 2, 3, 4},
                   std::array<double, 5>{-5, -1, 3, 3.5, 100}}) {
        auto s = make_surface(e);
        CHECK(s.Xi1 > s.Xi2);
        auto c = periods_chebyshev(s, 4000);
        CHECK(rel(c[0], s.Xi1) < 1e-10);
        CHECK(rel(c[1], s.Xi2) < 1e-10);
        CHECK(rel(gap_moment(s, 1, 0), s.Xi1) < 1e-10);
        CHECK(rel(gap_moment(s, 2, 0), s.Xi2) < 1e-10);
        for (double sc : {0.5, 3.0}) {
            std::array<double, 5> f{};
            for (int i = 0; i < 5; ++i) f[i] = sc * sc * e[i];
            auto t = make_surface(f);
            CHECK(rel(t.Xi1, s.Xi1 / (sc * sc * sc)) < 1e-10);
            CHECK(rel(t.Xi2, s.Xi2 / (sc * sc * sc)) < 1e-10);
        }
    }
    CHECK_THROWS_AS(make_surface({0, 1, 1, 2, 3}), Error);
}

TEST_CASE("calibration") {
    auto c = calibrate({0.0, 6.0, 14.0, 30.0, 50.0});
    CHECK(c.period_residual <= 1e-9);
    CHECK(c.x_residual <= 1e-9);
    const auto& s = c.surface;
    CHECK(rel(s.Xi1, 2.0 * s.Xi2) <= 1e-9);
    CHECK(std::abs(2.0 * gap_moment(s, 2, 1) - gap_moment(s, 1, 1) - 1.0) < 1e-9);
    CHECK(s.edges[0] == 0.0);
    auto again = calibrate(s.edges);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(again.surface.edges[i] - s.edges[i]) < 1e-9 * s.edges[4]);
}

TEST_CASE("pole flow") {
    const auto& s = surface();
    for (auto p : {PoleConfig{s.edges[1], 0.5 * (s.edges[3] + s.edges[4]), 1, -1},
                   poles_from_times(s, 0.3, 0.1)}) {
        auto f = flow(s, p, 512);
        CHECK(f.periodicity_residual <= 1e-8);
        CHECK(f.lambda1.front() == doctest::Approx(p.P1));
        for (std::size_t i = 0; i < f.xi.size(); ++i) {
            CHECK(f.lambda1[i] >= s.edges[1] - 1e-12);
            CHECK(f.lambda1[i] <= s.edges[2] + 1e-12);
            CHECK(f.lambda2[i] >= s.edges[3] - 1e-12);
            CHECK(f.lambda2[i] <= s.edges[4] + 1e-12);
        }
        // Both poles return over the common period Xi1 = 2 Xi2.
        CHECK(std::abs(f.lambda1.back() - f.lambda1.front()) < 1e-8 * (s.edges[2] - s.edges[1]));
        CHECK(std::abs(f.lambda2.back() - f.lambda2.front()) < 1e-8 * (s.edges[4] - s.edges[3]));
        CHECK(f.x_of_xi.back() == doctest::Approx(1.0).epsilon(1e-9));
        // x is increasing since lambda2 > lambda1.
        CHECK(std::is_sorted(f.x_of_xi.begin(), f.x_of_xi.end()));
    }
    // Abel time round trip.
    for (double t : {0.0, 0.2 * s.Xi1, 0.5 * s.Xi1, 0.9 * s.Xi1}) {
        auto [P, sg] = pole_at_time(s, 1, t);
        CHECK(abel_time(s, 1, P, sg) == doctest::Approx(t).epsilon(1e-9));
    }
}

TEST_CASE("potential reconstruction") {
    const auto& s = surface();
    auto p = poles_from_times(s, 0.31, 0.07);
    auto v = reconstruct_potential(s, p, 512);
    CHECK(v.gld2_residual < 1e-6);
    CHECK(v.period == doctest::Approx(1.0).epsilon(1e-9));
    // V' from the samples against the reported derivative.
    const int n = static_cast<int>(v.V.size());
    const double hx = v.period / n;
    double worst = 0.0, scale = 0.0;
    for (int i = 2; i < n - 2; ++i) {
        double fd = (-v.V[i + 2] + 8 * v.V[i + 1] - 8 * v.V[i - 1] + v.V[i - 2]) / (12 * hx);
        worst = std::max(worst, std::abs(fd - v.Vx[i]));
        scale = std::max(scale, std::abs(v.Vx[i]));
    }
    CHECK(worst < 1e-5 * scale);
}

TEST_CASE("C constants") {
    std::vector<double> flat(64, 3.5);
    auto c0 = c_constants_from_samples(flat, 10.0);
    CHECK(std::abs(c0.C2) < 1e-14);

    const auto& s = surface();
    auto p = poles_from_times(s, 0.31, 0.07);
    auto ode = c_constants(s, p);
    CHECK(ode.C2.real() == 0.0);
    CHECK(ode.C1.real() == 0.0);
    auto coarse = c_constants_from_samples(reconstruct_potential(s, p, 256).V, s.sigma());
    auto fine = c_constants_from_samples(reconstruct_potential(s, p, 1024).V, s.sigma());
    CHECK(std::abs(fine.C2 - coarse.C2) < 1e-7 * std::max(1.0, std::abs(fine.C2)));
    CHECK(std::abs(fine.C2 - ode.C2) < 1e-7 * std::max(1.0, std::abs(fine.C2)));
    CHECK(std::abs(fine.C1 - ode.C1) < 1e-6 * std::max(1.0, std::abs(fine.C1)));
    // Direct double Riemann sum of int_0^1 (1 - x) {V}(x) dx on the fine grid.
    auto V = reconstruct_potential(s, p, 4096).V;
    const int n = static_cast<int>(V.size());
    double mean = 0.0;
    for (double x : V) mean += x / n;
    double A = 0.0;
    for (int i = 0; i < n; ++i) {
        double inner = 0.0;
        for (int k = 0; k < i; ++k) inner += (V[k] - mean) / n;
        A += (inner + 0.5 * (V[i] - V[0]) / n) / n;
    }
    CHECK(std::abs(A - ode.A) < 1e-6 * std::max(1.0, std::abs(ode.A)));
    auto zs = c_constants_from_samples(reconstruct_potential(s, p, 1024).V, 0.0);
    CHECK(std::abs(zs.C1 - cplx(0.0, 0.375 * zs.B)) < 1e-14 * std::abs(zs.C1));
}

TEST_CASE("loop integrals") {
    const auto& s = surface();
    auto p = poles_from_times(s, 0.31, 0.07);
    auto L = loop_integrals(s, p);
    CHECK(L.offset_deviation < 1e-8);
    CHECK(std::abs(L.omega1) > 0.0);
    CHECK(std::abs(L.omega1.real()) < 1e-10 * std::abs(L.omega1));
    CHECK(std::abs(L.omega2.real()) < 1e-10 * std::abs(L.omega2));
    // Collapsing the loop onto the cut doubles the lip integral.
    CHECK(rel(std::abs(L.omega1), 2.0 * gap_moment(s, 1, 0)) < 1e-9);
    CHECK(rel(std::abs(L.omega2), 2.0 * gap_moment(s, 1, 1)) < 1e-9);
    auto M = loop_integrals(s, p, 0.3 * (s.edges[1] - s.edges[0]));
    CHECK(std::abs(M.omega1 - L.omega1) < 1e-8 * std::abs(L.omega1));
    CHECK(std::abs(M.pole2 - L.pole2) < 1e-8 * std::max(1.0, std::abs(L.pole2)));
}

TEST_CASE("l1: realness, evenness, translation, generic") {
    const auto& s = surface();
    int k = 0;
    for (int a : {0, 1})
        for (int b : {0, 1})
            for (double sh : {0.0, 0.13, 0.37}) {
                if (++k > 10) break;
                auto r = l1(s, symmetric(s, a, b, sh));
                CHECK(std::abs(r.l1) <= 1e-6);
                CHECK(std::abs(r.imag_residue) <= 1e-8);
            }
    auto p = poles_from_times(s, 0.31, 0.07);
    const double base = l1(s, p).l1;
    for (double dt : {0.05, 0.21, 0.6}) CHECK(std::abs(l1(s, shift_poles(s, p, dt)).l1 - base) < 1e-6);

    double best = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            auto q = poles_from_times(s, s.Xi1 * (i + 0.3) / 6, s.Xi2 * (j + 0.6) / 6);
            best = std::max(best, std::abs(l1(s, q).l1));
        }
    CHECK(best >= 1e-3);
}

TEST_CASE("theta and Lambda") {
    auto z = theta_lambda(0.0);
    CHECK(z.theta == 1.0);
    CHECK(z.Lambda == 1.0);
    CHECK(theta_lambda(std::log(2.0)).Lambda == doctest::Approx(1.25));
    for (double l : {-2.0, -0.1, 0.3, 4.0}) {
        auto t = theta_lambda(l);
        CHECK(t.theta >= 1.0);
        CHECK(t.Lambda > 1.0);
        CHECK(0.5 * (t.theta + 1 / t.theta) == doctest::Approx(t.Lambda));
        CHECK(theta_lambda(-l).theta == t.theta);
    }
}

TEST_CASE("rescaled l_n") {
    const auto& s = surface();
    auto p = poles_from_times(s, 0.31, 0.07);
    auto r = ln_rescaled(s, p, 3);
    for (int i = 0; i < 5; ++i) CHECK(r.edges_n[i] == doctest::Approx(9.0 * s.edges[i]));
    CHECK(r.ln == l1(s, p).l1);
    CHECK_THROWS_AS(ln_rescaled(s, p, 0), Error);
}

TEST_CASE("large energy expansion of the differential") {
    const auto& s = surface();
    auto o = omega_asymptotics(s, poles_from_times(s, 0.31, 0.07));
    CHECK(o.rel3 < 0.05);
    CHECK(o.rel5 < 0.05);
}

TEST_CASE("degeneracy probe") {
    std::array<double, 5> e{};
    for (int i = 0; i < 5; ++i) e[i] = 0.01 * surface().edges[i];
    auto r = degenerate_scaling_probe(make_surface(e), {1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
    CHECK(std::abs(r.slope + 8.0 / 3.0) <= 0.2);
    CHECK(rel(r.prefactor, r.F0_abs) <= 0.2);
    CHECK(r.F0_abs == doctest::Approx(5 * kPi * std::pow(3.0, -11.0 / 3) * std::pow(2.0, -2.0 / 3)));
    for (std::size_t i = 0; i < r.delta.size(); ++i) CHECK(rel(r.d2F[i], r.d2F_int[i]) < 0.05);
    // The G counterpart sits at roundoff level relative to F; check the
    // delta^-2 bound instead of fitting a slope to noise.
    for (std::size_t i = 0; i < r.delta.size(); ++i) {
        CHECK(r.d2G[i] <= 1e-6 * r.d2F[i]);
        CHECK(r.d2G[i] * r.delta[i] * r.delta[i] <= 1e-4);
    }
    CHECK(r.G_scaled_max <= 1e-4);
    CHECK_THROWS_AS(degenerate_scaling_probe(make_surface(e), {1e-3, 1e-2}), Error);
}
