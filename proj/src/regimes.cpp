#include "qpspec/regimes.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qpspec/errors.hpp"
#include "qpspec/parallel.hpp"

namespace qpspec {

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::TauLarge: return "TauLarge";
    case Regime::TauSmallRhoLarge: return "TauSmallRhoLarge";
    case Regime::RhoSmall: return "RhoSmall";
    case Regime::Borderline: return "Borderline";
    case Regime::OutsideWindow: return "OutsideWindow";
    }
    return "?";
}

bool check_tibm(const AdiabaticProblem& p, double E) { return tibm_holds(p, E); }

namespace {

double min_action(const AdiabaticProblem& p, double E) {
    double sh = action_integral(p, E, Action::H0) + action_integral(p, E, Action::HPi);
    return std::min({sh, action_integral(p, E, Action::V0), action_integral(p, E, Action::VPi)});
}

double max_action(const AdiabaticProblem& p, double E) {
    double sh = action_integral(p, E, Action::H0) + action_integral(p, E, Action::HPi);
    return std::max({sh, action_integral(p, E, Action::V0), action_integral(p, E, Action::VPi)});
}

std::vector<double> grid_of(Interval J, int n) {
    if (J.lo == J.hi || n <= 1) return {J.lo};
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = J.lo + (J.hi - J.lo) * i / (n - 1);
    return g;
}

void require_window(const AdiabaticProblem& p, Interval J) {
    for (double E : {J.lo, J.hi})
        if (!tibm_holds(p, E)) {
            std::ostringstream os;
            os << "window condition fails on J at E=" << E;
            throw Error(Errc::WindowViolation, os.str());
        }
}

}  // namespace

double compute_delta0(const AdiabaticProblem& p, Interval J, int grid) {
    require_window(p, J);
    auto g = grid_of(J, grid);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = min_action(p, g[i]);
    std::size_t imin = std::min_element(v.begin(), v.end()) - v.begin();
    double best = v[imin];
    if (g.size() > 2) {
        double lo = g[imin == 0 ? 0 : imin - 1], hi = g[std::min(imin + 1, g.size() - 1)];
        auto r = boost::math::tools::brent_find_minima([&](double E) { return min_action(p, E); }, lo,
                                                       hi, 40);
        best = std::min(best, r.second);
    }
    return 0.5 * best;
}

bool check_T(const AdiabaticProblem& p, Interval J, int grid) {
    require_window(p, J);
    const auto& e = p.spectrum.edges;
    const int n = p.n, g = p.spectrum.g;
    double lhs = std::numeric_limits<double>::infinity(), rhs = 0.0;
    for (double E : grid_of(J, grid)) {
        if (2 * n - 2 >= 1) lhs = std::min(lhs, std::acosh((E - e[2 * n - 3]) / p.alpha));
        if (2 * n + 3 <= 2 * g + 1) lhs = std::min(lhs, std::acosh((e[2 * n + 2] - E) / p.alpha));
        rhs = std::max(rhs, max_action(p, E));
    }
    return 2.0 * std::numbers::pi * lhs > rhs;
}

Regime classify_actions(double sh, double sv0, double svpi, double dt, double dr) {
    const double te = sh - sv0 - svpi;
    if (te >= dt) return Regime::TauLarge;
    if (te > -dt) return Regime::Borderline;
    const double re = std::min(sv0, svpi) - sh;
    if (re >= dr) return Regime::RhoSmall;
    if (re <= -dr) return Regime::TauSmallRhoLarge;
    return Regime::Borderline;
}

double log_tau(const ActionProfile& a) {
    return std::log(2.0) + (a.sh - a.sv0 - a.svpi) / (2.0 * a.epsilon);
}

double log_rho(const ActionProfile& a) {
    return std::log(2.0) + (0.5 * a.sh - std::min(a.sv0, a.svpi)) / a.epsilon;
}

double tau_of(const ActionProfile& a) { return std::exp(log_tau(a)); }
double rho_of(const ActionProfile& a) { return std::exp(log_rho(a)); }

RegimeReport classify(const AdiabaticProblem& p, double E, double dt, double dr) {
    RegimeReport r;
    r.tibm = tibm_holds(p, E);
    if (!r.tibm) return r;
    ActionProfile a = tunneling_profile(p, E);
    r.delta0 = 0.5 * std::min({a.sh, a.sv0, a.svpi});
    r.delta_tau = dt < 0.0 ? 0.05 * r.delta0 : dt;
    r.delta_rho = dr < 0.0 ? 0.05 * r.delta0 : dr;
    r.tau_exp = a.sh - a.sv0 - a.svpi;
    r.rho_exp = std::min(a.sv0, a.svpi) - a.sh;
    r.tau = tau_of(a);
    r.rho = rho_of(a);
    r.t_ok = check_T(p, {E, E});
    r.regime = classify_actions(a.sh, a.sv0, a.svpi, r.delta_tau, r.delta_rho);
    return r;
}

std::vector<RegionCell> region_map(const AdiabaticProblem& p, const std::vector<double>& ag,
                                   const std::vector<double>& eg, double dt, double dr) {
    if (ag.empty() || eg.empty()) throw Error(Errc::InvalidRange, "empty alpha or energy grid");
    std::vector<RegionCell> out(ag.size() * eg.size());
    parallel_for(out.size(), [&](std::size_t idx) {
        AdiabaticProblem q = p;
        q.alpha = ag[idx / eg.size()];
        const double E = eg[idx % eg.size()];
        out[idx].alpha = q.alpha;
        out[idx].E = E;
        out[idx].report = classify(q, E, dt, dr);
    });
    return out;
}

std::array<std::array<double, 2>, 4> tibm_polygon(const PeriodicSpectrum& s, int n) {
    const auto& e = s.edges;
    const double Elo = e[2 * n - 2], E2n = e[2 * n - 1], E2n1 = e[2 * n];
    const double Ehi = n < s.g ? e[2 * n + 1] : std::numeric_limits<double>::infinity();
    // Lower boundary: max(Elo + a, E2n1 - a); upper: min(E2n + a, Ehi - a).
    std::array<std::array<double, 2>, 4> v;
    v[0] = {0.5 * (E2n1 - E2n), 0.5 * (E2n1 + E2n)};
    v[1] = {0.5 * (E2n1 - Elo), 0.5 * (E2n1 + Elo)};
    v[2] = {0.5 * (Ehi - E2n), 0.5 * (Ehi + E2n)};
    v[3] = {0.5 * (Ehi - Elo), 0.5 * (Ehi + Elo)};
    return v;
}

}  // namespace qpspec
