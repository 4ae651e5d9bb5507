#pragma once

#include <functional>
#include <vector>

#include "qpspec/actions.hpp"
#include "qpspec/regimes.hpp"

namespace qpspec {

struct LadderEntry {
    int l = 0;
    double E = 0.0;
};

struct QuantizedLadder {
    Nu nu = Nu::Zero;
    std::vector<LadderEntry> entries;  // increasing in E
    Interval J;
};

struct ResonantPair {
    double E0 = 0.0, Epi = 0.0;
    double Ebar = 0.0, Delta = 0.0;  // (E0+Epi)/2, (E0-Epi)/2
    int l0 = 0, lpi = 0;
    ActionProfile profile;
    double gamma0 = 0.0, gammapi = 0.0;
    double z0 = 0.0, zpi = 0.25;
    int sigma = 1;
    double delta0 = 0.0;  // 0 disables the neighborhood check
    double epsilon = 0.0;
};

// Roots of phi(E)/epsilon = pi/2 + pi l on J for a monotone phase.
QuantizedLadder quantize_phase(const std::function<double(double)>& phi, Interval J,
                               double epsilon, Nu nu = Nu::Zero);

QuantizedLadder quantize(const AdiabaticProblem& p, Interval J, Nu nu);

// Cross-type pairs with |Epi - E0| <= 2 exp(-delta0/epsilon); each energy
// used at most once, nearest partners first. Profiles are left empty.
std::vector<ResonantPair> find_resonances(const QuantizedLadder& a, const QuantizedLadder& b,
                                          double delta0, double epsilon);

// Fills profile and slopes from the actions at Ebar.
void complete_pair(const AdiabaticProblem& p, ResonantPair& pair);

// Pair from a profile and two energies, without quadrature.
ResonantPair make_pair(double E0, double Epi, const ActionProfile& prof, double delta0 = 0.0,
                       double z0 = 0.0, double zpi = 0.25, int sigma = 1);

struct LocalVars {
    double xi0 = 0.0, xipi = 0.0;
};

LocalVars local_variables(const ResonantPair& pair, double E);

}  // namespace qpspec
