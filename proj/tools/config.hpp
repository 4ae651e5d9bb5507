#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qpspec::cli {

using json = nlohmann::json;

// Raised for malformed or invalid configuration; carries a field path or a line number.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    double min = 0.0, max = 0.0;
    int count = 1;
    std::vector<double> values() const;
};

struct Margins {
    double delta_tau = -1.0, delta_rho = -1.0;
};

struct SyntheticProfile {
    double phi0 = 0.0, phipi = 0.0, dphi0 = -1.0, dphipi = 1.0;
    double sv0 = 0.0, svpi = 0.0, sh0 = 0.0, shpi = 0.0;
};

struct ForcedPair {
    double E0 = 0.0, Epi = 0.0;
    std::optional<SyntheticProfile> profile;
};

struct PredictBlock {
    double Lambda = 1.0;
    int samples = 201;
    std::optional<ForcedPair> force;
};

struct CocycleBlock {
    int sigma = 1;
    double z0 = 0.0, zpi = 0.25;
    std::optional<double> h;
    long iterations = 100000;
    std::uint64_t seed = 1;
    double tau = 1.0, theta = 2.0;
    double gamma0 = -1.0, E0 = 0.0, gammapi = 1.0, Epi = 0.0;
    Range scan{-1.0, 1.0, 21};
    int grid = 2048;
};

struct PoleSpec {
    // Either energies with directions, or Abel times from the lower gap edges.
    std::optional<std::array<double, 2>> P;
    std::array<int, 2> s{1, 1};
    std::optional<std::array<double, 2>> t;
};

struct LambdanBlock {
    std::array<double, 5> seed{0.0, 6.0, 14.0, 30.0, 50.0};
    std::vector<PoleSpec> poles;
    std::vector<double> deltas;
    double probe_scale = 0.01;
    int n = 1;
};

struct RunConfig {
    std::vector<double> edges;
    Range alpha{1.0, 1.0, 1};
    Range energy{0.0, 1.0, 1};
    std::vector<double> epsilon{0.1};
    int n = 1;
    std::array<double, 2> J{0.0, 0.0};
    Margins margins;
    PredictBlock predict;
    CocycleBlock cocycle;
    LambdanBlock lambdan;
    std::string output = "qpspec_out";

    json resolved;  // full config with defaults filled in
    std::string hash;
};

// Parses and validates; every field of the result is checked.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// FNV-1a 64-bit of the canonical resolved config, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace qpspec::cli
