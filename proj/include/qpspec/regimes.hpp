#pragma once

#include <array>
#include <vector>

#include "qpspec/actions.hpp"

namespace qpspec {

enum class Regime { TauLarge, TauSmallRhoLarge, RhoSmall, Borderline, OutsideWindow };

const char* regime_name(Regime r);

struct Interval {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct RegimeReport {
    double tau = 0.0, rho = 0.0;
    double tau_exp = 0.0;  // S_h - S_v0 - S_vpi
    double rho_exp = 0.0;  // min S_v - S_h
    double delta0 = 0.0;
    bool tibm = false;
    bool t_ok = false;
    Regime regime = Regime::OutsideWindow;
    double delta_tau = 0.0, delta_rho = 0.0;
};

bool check_tibm(const AdiabaticProblem& p, double E);

// Half the grid minimum of min(S_h, S_v0, S_vpi) over J, refined near the
// minimizer. A degenerate J (lo == hi) evaluates a single point.
double compute_delta0(const AdiabaticProblem& p, Interval J, int grid = 101);

// 2 pi min Im zeta (outer branch points) > max (S_h, S_v0, S_vpi) over J.
bool check_T(const AdiabaticProblem& p, Interval J, int grid = 101);

// Classification from the three actions only.
Regime classify_actions(double sh, double sv0, double svpi, double delta_tau, double delta_rho);

// tau = 2 sqrt(tv0 tvpi / th); rho = 2 max(tv) / sqrt(th), so rho >= tau.
double tau_of(const ActionProfile& a);
double rho_of(const ActionProfile& a);
// Natural logs computed in exponent arithmetic.
double log_tau(const ActionProfile& a);
double log_rho(const ActionProfile& a);

// Negative margins select the default 0.05 * delta0.
RegimeReport classify(const AdiabaticProblem& p, double E, double delta_tau = -1.0,
                      double delta_rho = -1.0);

struct RegionCell {
    double alpha = 0.0, E = 0.0;
    RegimeReport report;
};

// Row-major over (alpha, E): alpha outer. Cells outside the window are
// labelled OutsideWindow.
std::vector<RegionCell> region_map(const AdiabaticProblem& p, const std::vector<double>& alpha_grid,
                                   const std::vector<double>& E_grid, double delta_tau = -1.0,
                                   double delta_rho = -1.0);

// Corners of the window region in the (alpha, E) plane for gap n, from the
// four bounding lines, ordered by alpha: left, bottom, top, right.
std::array<std::array<double, 2>, 4> tibm_polygon(const PeriodicSpectrum& s, int n);

}  // namespace qpspec
