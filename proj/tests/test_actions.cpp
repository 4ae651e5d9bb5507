#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qpspec/actions.hpp"
#include "qpspec/errors.hpp"
#include "support.hpp"

using namespace qpspec;

namespace {
constexpr double kPi = std::numbers::pi;

AdiabaticProblem problem(double alpha, double eps = 0.1) {
    static const PeriodicSpectrum s = build_spectrum(testsupport::two_gap_edges());
    return AdiabaticProblem{s, alpha, 1, eps};
}

// Random (alpha, E) inside the window region, by rejection.
std::vector<std::pair<double, double>> window_samples(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(1.6, 5.9), ue(3.5, 9.0);
    std::vector<std::pair<double, double>> out;
    while (static_cast<int>(out.size()) < n) {
        const double a = ua(rng), E = ue(rng);
        auto p = problem(a);
        // Keep a margin from the boundary lines so branch points stay apart.
        if (tibm_holds(p, E - 0.05) && tibm_holds(p, E + 0.05)) out.emplace_back(a, E);
    }
    return out;
}
}  // namespace

TEST_CASE("branch point from the cosine equation") {
    CHECK(branch_point(0.0).real() == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(branch_point(0.0).imag() == 0.0);
    CHECK(std::abs(branch_point(1.0)) == 0.0);
    CHECK(branch_point(2.0).real() == 0.0);
    CHECK(branch_point(-2.0).real() == doctest::Approx(kPi));
    for (double r : {-3.0, -1.0, -0.4, 0.3, 0.999, 1.5, 7.0}) {
        const cplx z = branch_point(r);
        CHECK(std::abs(std::cos(z) - r) < 1e-12 * std::max(1.0, std::abs(r)));
        // Reflection through the imaginary axis is again a solution.
        CHECK(std::abs(std::cos(-std::conj(z)) - r) < 1e-12 * std::max(1.0, std::abs(r)));
    }
}

TEST_CASE("real branch points on the two-gap data") {
    auto p = problem(2.0);
    auto b = branch_points(p, 5.3571);
    // Reference value of arccos(0.75) in extended precision.
    CHECK(b.real_lo == doctest::Approx(static_cast<double>(std::acos(0.75L))).epsilon(1e-14));
    CHECK(b.real_lo == doctest::Approx(0.72273).epsilon(1e-5));
    CHECK(0.0 < b.real_lo);
    CHECK(b.real_lo < b.real_hi);
    CHECK(b.real_hi < kPi);
    REQUIRE(b.imaginary_below.size() == 1);
    REQUIRE(b.imaginary_above.size() == 2);
    CHECK(b.imaginary_below[0] > 0.0);
    CHECK(0.0 < b.imaginary_above[0]);
    CHECK(b.imaginary_above[0] < b.imaginary_above[1]);
}

TEST_CASE("window violation") {
    auto p = problem(2.0);
    CHECK_FALSE(tibm_holds(p, 1.0));
    CHECK_THROWS_AS(branch_points(p, 1.0), Error);
    try {
        phase_integral(p, 1.0, Nu::Zero);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::WindowViolation);
    }
    CHECK_FALSE(tibm_holds(problem(0.0), 5.0));
}

TEST_CASE("phases: positive, monotone, independent of the method") {
    for (auto [a, E] : window_samples(12, 3)) {
        auto p = problem(a);
        for (Nu nu : {Nu::Zero, Nu::Pi}) {
            const double real_line = phase_integral(p, E, nu);
            const double contour = phase_integral(p, E, nu, Method::Contour);
            const double half = phase_integral(p, E, nu, Method::Contour, 0.5);
            CHECK(real_line > 0.0);
            CHECK(testsupport::rel(contour, real_line) < 1e-9);
            CHECK(testsupport::rel(half, contour) < 1e-9);
        }
        const double h = 1e-4 * 0.1;
        const double d0 = phase_integral(p, E + h, Nu::Zero) - phase_integral(p, E - h, Nu::Zero);
        const double dp = phase_integral(p, E + h, Nu::Pi) - phase_integral(p, E - h, Nu::Pi);
        CHECK(d0 < 0.0);
        CHECK(dp > 0.0);
        CHECK(phase_derivative(p, E, Nu::Zero) == doctest::Approx(d0 / (2 * h)).epsilon(1e-5));
        CHECK(phase_derivative(p, E, Nu::Pi) == doctest::Approx(dp / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("actions: positive, two quadratures agree, deformation invariant") {
    for (auto [a, E] : window_samples(12, 5)) {
        auto p = problem(a);
        for (Action act : {Action::V0, Action::VPi, Action::H0, Action::HPi}) {
            const double real_line = action_integral(p, E, act);
            const double contour = action_integral(p, E, act, Method::Contour);
            const double half = action_integral(p, E, act, Method::Contour, 0.5);
            CHECK(real_line > 0.0);
            CHECK(std::isfinite(real_line));
            CHECK(testsupport::rel(contour, real_line) < 1e-9);
            CHECK(testsupport::rel(half, contour) < 1e-9);
            // The loop integral of an action is purely imaginary.
            const cplx raw = loop_integral(p, E, act);
            CHECK(std::abs(raw.real()) < 1e-9 * std::abs(raw.imag()));
        }
    }
}

TEST_CASE("horizontal parity from two separate loops") {
    for (auto [a, E] : window_samples(20, 11)) {
        auto p = problem(a);
        const double s0 = action_integral(p, E, Action::H0, Method::Contour);
        const double sp = action_integral(p, E, Action::HPi, Method::Contour);
        CHECK(testsupport::rel(s0, sp) < 1e-9);
    }
}

TEST_CASE("collapsed contour offset is refused") {
    auto p = problem(3.0);
    try {
        loop_integral(p, 5.36, Action::H0, 1e-9);
        FAIL("expected ContourCollision");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ContourCollision);
    }
}

TEST_CASE("tunneling coefficients") {
    const double eps = 0.07;
    auto z = make_profile(5.0, eps, 1, 1, -1, 1, 0, 0, 0, 0);
    CHECK(z.tv0 == 1.0);
    CHECK(z.th == 1.0);
    auto e = make_profile(5.0, eps, 1, 1, -1, 1, eps, eps, eps, eps);
    CHECK(e.tv0 == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(e.th == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));

    auto p = problem(3.0, 0.1);
    auto prof = tunneling_profile(p, 5.36);
    CHECK(prof.sh == prof.sh0 + prof.shpi);
    CHECK(prof.th == prof.th0 * prof.thpi);
    CHECK(prof.th == doctest::Approx(std::exp(-(prof.sh0 + prof.shpi) / 0.1)).epsilon(1e-14));
    CHECK(prof.dphi0 < 0.0);
    CHECK(prof.dphipi > 0.0);
    for (double t : {prof.tv0, prof.tvpi, prof.th0, prof.thpi, prof.th}) {
        CHECK(t > 0.0);
        CHECK(t <= 1.0);
    }
}

TEST_CASE("frequency fraction") {
    CHECK(problem(3.0, 0.05).h() == doctest::Approx(2 * kPi / 0.05 - 125.0).epsilon(1e-12));
    const double h = problem(3.0, 0.0371).h();
    CHECK(h >= 0.0);
    CHECK(h < 1.0);
}
