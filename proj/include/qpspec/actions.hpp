#pragma once

#include <complex>
#include <vector>

#include "qpspec/bloch.hpp"

namespace qpspec {

struct AdiabaticProblem {
    PeriodicSpectrum spectrum;
    double alpha = 1.0;
    int n = 1;  // window gap [E_{2n}, E_{2n+1}]
    double epsilon = 0.1;

    // Fractional part of 2 pi / epsilon.
    double h() const;
};

// Window condition: E - alpha < E_{2n}, E_{2n+1} < E + alpha,
// E_{2n-1} < E - alpha, E + alpha < E_{2n+2} (the last one void when n = g).
bool tibm_holds(const AdiabaticProblem& p, double E);

struct BranchPointSet {
    double real_lo = 0.0;  // zeta_{2n}
    double real_hi = 0.0;  // zeta_{2n+1}
    std::vector<double> imaginary_below;  // Im zeta_{2n-1}, Im zeta_{2n-2}, ...
    std::vector<double> imaginary_above;  // Im zeta_{2n+2}, Im zeta_{2n+3}, ...
};

// Solution of cos(zeta) = (E - E_j)/alpha with Re zeta in [0, pi], Im >= 0.
cplx branch_point(double ratio);

BranchPointSet branch_points(const AdiabaticProblem& p, double E);

enum class Nu { Zero, Pi };
enum class Action { V0, VPi, H0, HPi };
enum class Method { RealLine, Contour };

// Phase integral Phi_nu(E) > 0.
double phase_integral(const AdiabaticProblem& p, double E, Nu nu, Method m = Method::RealLine,
                      double offset_scale = 1.0);
// dPhi_nu/dE from the differentiated real-line integral.
double phase_derivative(const AdiabaticProblem& p, double E, Nu nu);

double action_integral(const AdiabaticProblem& p, double E, Action a,
                       Method m = Method::RealLine, double offset_scale = 1.0);

// Value of the full closed-loop integral oint kappa dzeta (counterclockwise)
// used by the contour method. Exposed for tests.
cplx loop_integral(const AdiabaticProblem& p, double E, Action a, double offset_scale = 1.0);
cplx loop_integral(const AdiabaticProblem& p, double E, Nu nu, double offset_scale = 1.0);

struct ActionProfile {
    double E = 0.0;
    double phi0 = 0.0, phipi = 0.0;
    double sv0 = 0.0, svpi = 0.0, sh0 = 0.0, shpi = 0.0, sh = 0.0;
    double tv0 = 0.0, tvpi = 0.0, th0 = 0.0, thpi = 0.0, th = 0.0;
    double dphi0 = 0.0, dphipi = 0.0;
    double epsilon = 0.0;
};

// Builds the profile from given actions (no quadrature); used by the full
// profile and by synthetic tests.
ActionProfile make_profile(double E, double epsilon, double phi0, double phipi, double dphi0,
                           double dphipi, double sv0, double svpi, double sh0, double shpi);

ActionProfile tunneling_profile(const AdiabaticProblem& p, double E);

}  // namespace qpspec
