#pragma once

#include <array>
#include <complex>
#include <vector>

#include "qpspec/bloch.hpp"

namespace qpspec {

// Two-gap spectrum [E1,E2] u [E3,E4] u [E5,inf) with R(E) = prod (E - E_j).
struct TwoGapSurface {
    std::array<double, 5> edges{};
    double Xi1 = 0.0, Xi2 = 0.0;  // flow periods in gap 1 and gap 2

    double R(double E) const;
    double dR(double E) const;
    double sigma() const;  // sum of the edges
    // prod of principal sqrt(E - E_j): cuts on the gaps and on (-inf, E1).
    cplx sqrtR(cplx E) const;
    double gap_lo(int j) const { return edges[2 * j - 1]; }
    double gap_hi(int j) const { return edges[2 * j]; }
};

TwoGapSurface make_surface(const std::array<double, 5>& edges);

// Xi_j = integral over gap j of 1/sqrt|R|.
std::array<double, 2> periods(const TwoGapSurface& s);
// Same by the n-point midpoint rule in the arccos angle.
std::array<double, 2> periods_chebyshev(const TwoGapSurface& s, int n);

// Integral over one flow period of lambda_2 - lambda_1, valid when
// Xi1 = 2 Xi2: 2 m_2 - m_1 with m_j the first moment of 1/sqrt|R| on gap j.
double x_period(const TwoGapSurface& s);

struct Calibration {
    TwoGapSurface surface;
    double period_residual = 0.0;  // |Xi1 - 2 Xi2| / Xi2
    double x_residual = 0.0;       // |x_period - 1|
    int iterations = 0;
};

// Moves E5 until Xi1 = 2 Xi2, then scales about E1 so the x-period is 1.
Calibration calibrate(const std::array<double, 5>& seed, double tol = 1e-9);

// Pole positions with the direction of motion at xi = 0 (+1: increasing).
struct PoleConfig {
    double P1 = 0.0, P2 = 0.0;
    int s1 = 1, s2 = 1;
};

// Flow time from the lower gap edge to (P, sign) along gap j, in [0, Xi_j).
double abel_time(const TwoGapSurface& s, int j, double P, int sign);
// Inverse: the pole reached after time t from the lower edge of gap j.
std::pair<double, int> pole_at_time(const TwoGapSurface& s, int j, double t);
// Both poles advanced by a common flow time.
PoleConfig shift_poles(const TwoGapSurface& s, const PoleConfig& p, double dt);
// Poles at flow times t1, t2 from the lower edges.
PoleConfig poles_from_times(const TwoGapSurface& s, double t1, double t2);

struct PoleFlow {
    std::vector<double> xi, lambda1, lambda2, x_of_xi;
    double Xi = 0.0;
    double periodicity_residual = 0.0;  // relative to the gap widths
};

PoleFlow flow(const TwoGapSurface& s, const PoleConfig& p, int samples = 1024);

struct PotentialSamples {
    std::vector<double> x, V, Vx, Vxx, lambda1, lambda2;
    double period = 0.0;
    double gld2_residual = 0.0;  // relative least-squares residual
    double c1_fit = 0.0, c2_fit = 0.0;
};

// V = -2 (lambda1 + lambda2) + sum E_j on a uniform grid of one x-period.
PotentialSamples reconstruct_potential(const TwoGapSurface& s, const PoleConfig& p,
                                       int samples = 512);

struct CConstants {
    cplx C1, C2;
    double A = 0.0;  // int_0^1 dx int_0^x {V}
    double B = 0.0;  // int_0^1 dx int_0^x {V'' - V^2}
    double mean_V = 0.0;
};

// Nested integrals carried along the flow, on a calibrated surface.
CConstants c_constants(const TwoGapSurface& s, const PoleConfig& p);
// From V samples on a uniform periodic grid of [0, 1); V'' by FFT.
CConstants c_constants_from_samples(const std::vector<double>& V, double sigma);

struct LoopIntegrals {
    cplx omega1, omega2;  // counterclockwise around gap 1 of dE/sqrtR, E dE/sqrtR
    cplx pole1, pole2;    // of Omega(E, P_j)
    double offset_deviation = 0.0;  // max relative change between offsets d and d/2
};

// Value of sqrt(R) at the surface point carrying pole j.
cplx pole_root(const TwoGapSurface& s, const PoleConfig& p, int j);

LoopIntegrals loop_integrals(const TwoGapSurface& s, const PoleConfig& p, double offset = -1.0);

struct L1Result {
    double l1 = 0.0;
    double imag_residue = 0.0;
    CConstants c;
    LoopIntegrals loops;
    double theta = 1.0, Lambda = 1.0;
};

L1Result l1(const TwoGapSurface& s, const PoleConfig& p);

struct ThetaLambda {
    double theta = 1.0, Lambda = 1.0;
};
ThetaLambda theta_lambda(double l);

// l_n of V_n(x) = n^2 V(n x) equals l_1 of V; edges scale by n^2.
struct LnResult {
    std::array<double, 5> edges_n{};
    double ln = 0.0;
};
LnResult ln_rescaled(const TwoGapSurface& s, const PoleConfig& p, int n);

struct OmegaAsymptotics {
    double E = 0.0, tau = 0.0;
    cplx c3_decomposition, c3_taylor;
    cplx c5_decomposition, c5_taylor;
    double rel3 = 0.0, rel5 = 0.0;
};

// Decomposition of Omega(E) - Omega(E^) at E = factor * E5 against the
// large-E expansion built from the potential.
OmegaAsymptotics omega_asymptotics(const TwoGapSurface& s, const PoleConfig& p,
                                   double factor = 100.0);

struct ProbeResult {
    std::vector<double> delta;
    std::vector<double> d2F;       // |mixed derivative| from finite differences of F
    std::vector<double> d2F_int;   // same from the integral formula
    std::vector<double> d2G;       // |mixed derivative of G| from the integral formula
    double slope = 0.0, slope_G = 0.0;
    double G_scaled_max = 0.0;     // max |d2G| delta^2
    double prefactor = 0.0;        // |d2F| delta^{8/3} at the smallest delta
    double F0_abs = 0.0;           // 5 pi 3^{-11/3} 2^{-2/3}
    double fit_residual = 0.0;
};

// Mixed xi1-xi2 derivative of F at Abel coordinates (-i delta, +i delta).
ProbeResult degenerate_scaling_probe(const TwoGapSurface& s, const std::vector<double>& deltas);

}  // namespace qpspec
