#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "qpspec/ladder.hpp"

namespace qpspec {

struct ModelCocycle {
    int sigma = 1;
    double tau = 1.0;
    double theta = 2.0;
    // xi0(E) = gamma0 (E - E0), xipi(E) = gammapi (E - Epi)
    double gamma0 = -1.0, E0 = 0.0;
    double gammapi = 1.0, Epi = 0.0;
    double z0 = 0.0, zpi = 0.25;
    double h = 0.5;
    double epsilon = 0.1;

    cplx xi0(cplx E) const { return gamma0 * (E - E0); }
    cplx xipi(cplx E) const { return gammapi * (E - Epi); }
};

// Fractional part of 2 pi / epsilon.
double h_from_epsilon(double epsilon);

// theta solving theta + 1/theta = 2 LambdaN, theta >= 1.
double theta_from_lambda(double LambdaN);

ModelCocycle cocycle_from_pair(const ResonantPair& pair, double LambdaN);

Eigen::Matrix2d model_matrix(const ModelCocycle& mc, double z, double E);
Eigen::Matrix2cd model_matrix(const ModelCocycle& mc, double z, cplx E);

// ad - bc with one rounding (Kahan).
double det_kahan(const Eigen::Matrix2d& m);

using MatrixFamily = std::function<Eigen::Matrix2cd(double)>;

struct LyapunovResult {
    double theta_cocycle = 0.0;
    double Theta_operator = 0.0;
    double first_half_slope = 0.0, second_half_slope = 0.0;
    double drift = 0.0;       // relative difference of the two slopes
    double last_decade = 0.0; // slope over the final tenth
    bool converged = true;
    double log_det = 0.0;     // sum of log r11 + log r22, zero for unimodular steps
};

// Orthogonal renormalization of the product M(z + (N-1) h) ... M(z).
LyapunovResult lyapunov_family(const MatrixFamily& m, double h, double epsilon, long iterations,
                               double z_init);

LyapunovResult lyapunov(const ModelCocycle& mc, double E, long iterations = 100000,
                        double z_init = 0.0);

enum class VerdictKind { Resolvent, PossibleSpectrum, NotApplicable };
const char* verdict_name(VerdictKind k);

struct CocycleVerdict {
    VerdictKind kind = VerdictKind::NotApplicable;
    double min_abs_m12 = 0.0;
    double max_abs_rho = 0.0;
    double min_abs_v = 0.0;
    int ind_rho = 0, ind_v = 0;
};

CocycleVerdict resolvent_test(const ModelCocycle& mc, cplx E, int grid = 2048);

// Upper semicircle from a to b (a < b real), n vertices.
std::vector<cplx> semicircle(double a, double b, int n = 64);

double ids_increment(const ModelCocycle& mc, const std::vector<cplx>& path, int grid = 2048);

struct DecayingSolutions {
    std::vector<double> z;                          // grid on [0, h)
    std::vector<Eigen::Vector2d> psi_plus, psi_minus;
    std::vector<double> det;                        // det(psi_plus, psi_minus)
    double m = 0.0, q = 0.0, p = 0.0;
    std::vector<double> step_diff, step_bound;      // sup|G_{k+1}-G_k| and m/p^{2k+1}
    bool contraction_ok = true;
    double max_det_dev = 0.0;
    double rate_minus = 0.0;  // min log growth of psi_minus per step to the right
    double rate_plus = 0.0;   // min log decay of psi_plus per step to the right
    int iterations = 0;
};

// The solution built from G decays to the left and the swapped one decays to
// the right. Throws HypothesisFailed when the perturbation is too large.
DecayingSolutions decaying_solutions(const ModelCocycle& mc, double E, int nz = 64);

// N(z) = [[v/sqrt(rho), -sqrt(rho)], [1/sqrt(rho), 0]].
MatrixFamily n_transform(const ModelCocycle& mc, cplx E, int grid = 2048);

}  // namespace qpspec
