#pragma once

#include <iosfwd>

#include "gexp/cli/run_config.hpp"

namespace gexp::cli {

struct RunResult {
    json report;
    /// False when an acceptance check inside the experiment failed.
    bool all_pass = true;
};

/// Runs a validated config. When `dump` is set, per-path (or per-node for
/// gheat) values are written there as CSV.
RunResult run(const RunConfig& config, std::ostream* dump = nullptr);

} // namespace gexp::cli
