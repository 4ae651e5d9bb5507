#pragma once

#include <string>

#include "config.hpp"

namespace qpspec::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kRefused = 3,
    kNoResonance = 4,
};

// Each command writes into cfg.output; on failure the partial files are moved
// to cfg.output/quarantine/<command>-<hash> with an error.json.
int cmd_regions(const RunConfig& cfg);
int cmd_quantize(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_cocycle(const RunConfig& cfg);
int cmd_lambdan(const RunConfig& cfg);

int run_command(const std::string& name, const RunConfig& cfg);

}  // namespace qpspec::cli
