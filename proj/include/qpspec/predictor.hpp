#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpspec/ladder.hpp"
#include "qpspec/regimes.hpp"

namespace qpspec {

enum class IntervalLabel { I0, Ipi, Il, Ir, Union };
enum class SpectralClass { Singular, AcCandidate, Undetermined };

const char* label_name(IntervalLabel l);
const char* class_name(SpectralClass c);

struct PredictedInterval {
    double lo = 0.0, hi = 0.0;
    IntervalLabel label = IntervalLabel::I0;
    double dos_weight = 0.0;
};

struct ProfileSample {
    double E = 0.0;
    double Theta = 0.0;
    double lambda = 0.0;  // NaN where undefined
    SpectralClass cls = SpectralClass::Undetermined;
};

struct SpectralPrediction {
    Regime regime = Regime::Borderline;
    std::vector<PredictedInterval> intervals;  // sorted, disjoint
    std::optional<Interval> gap;
    std::vector<ProfileSample> samples;
    std::string scenario;
    std::vector<std::pair<std::string, double>> diagnostics;
};

// Inputs of the explicit small-tau endpoint formulas, in units of E - Ebar.
struct ScenarioInputs {
    double tvp = 0.0, tvm = 0.0, thp = 0.0, thm = 0.0;
    double Delta = 0.0;
    double Ebar = 0.0;
};

struct ScenarioEndpoints {
    double pi_out = 0.0, pi_in = 0.0, zero_in = 0.0, zero_out = 0.0;
    double g_minus = 0.0, g_plus = 0.0;  // zeros of G
    bool inner_empty = false;
};

// Closed-form radicals, with the formula switch at th^- = 2 (tv^+ +- tv^-) Delta.
ScenarioEndpoints scenario_endpoints(const ScenarioInputs& s);

// Same points from bracketed root finding on F - |G|. Throws DegenerateRoots
// when the inner interval is empty.
ScenarioEndpoints scenario_endpoints_numeric(const ScenarioInputs& s);

// True iff |G| <= F at E (with f = 0).
bool in_sigma(const ScenarioInputs& s, double E, double rel_tol = 1e-12);

// tv^+- = (1/|gamma0| +- 1/|gammapi|)/2, th^+- = 2(Lambda +- 1)/K.
ScenarioInputs scenario_inputs(const ResonantPair& pair, double LambdaN);

// Regime of the pair from its profile; negative margins use 0.05 * delta0.
Regime pair_regime(const ResonantPair& pair, double delta_tau = -1.0, double delta_rho = -1.0);

SpectralPrediction predict_large_tau(const ResonantPair& pair, int samples = 201);

SpectralPrediction sigma_set_small_tau(const ResonantPair& pair, double LambdaN, double c = -1.0,
                                       int samples = 201);

struct AcWindow {
    Interval I0, Ipi;
    double M = 0.0;
};

AcWindow ac_window(const ResonantPair& pair, double LambdaN);

struct SmallTauLyapunov {
    double Theta = 0.0, lambda = 0.0;
    SpectralClass cls = SpectralClass::Undetermined;
};

// c < 0 selects 0.05 * delta0.
SmallTauLyapunov lyapunov_small_tau(const ResonantPair& pair, double E, double LambdaN,
                                    double c = -1.0);

// Full small-tau picture. sub_c separates the large-rho sub-cases
// Delta < sub_c tv^+ and Delta > tv^+ / sub_c.
SpectralPrediction scenario_report(const ResonantPair& pair, double LambdaN, double c = -1.0,
                                   double sub_c = 0.25, int samples = 201);

// Dispatches on the pair regime; Borderline throws RegimeMismatch.
SpectralPrediction predict(const ResonantPair& pair, double LambdaN, int samples = 201);

}  // namespace qpspec
