#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace swave::cli {

enum class Subcommand { simulate, convergence, stability, noise_check };

/// Resolved command-line / config-file options for one run.
struct RunConfig {
    Subcommand subcommand = Subcommand::simulate;
    std::string problem = "test1";
    double theta = 0.0;
    std::int64_t steps = 8;                 // simulate
    std::vector<std::int64_t> levels;       // convergence / stability / noise-check
    std::int64_t reference = 0;             // convergence
    int m = 256;
    std::int64_t samples = 100;
    std::uint64_t base_seed = 0;
    std::uint64_t sample_index = 0;         // simulate
    double horizon = 1.0;
    std::vector<double> record_times;       // simulate; empty = horizon only
    std::string u0_shape = "sin2pi";        // initial displacement: sin2pi | sinpi
    std::string output;                     // empty = stdout
    bool emit_plot = false;
    int workers = 0;                        // 0 = hardware concurrency
};

/// Thrown when --help is requested; carries the help text.
struct HelpRequested {
    std::string text;
};

/// Parse argv (plus an optional --config key=value file; flags win).
/// Throws std::invalid_argument on any invalid input, HelpRequested on -h.
RunConfig parse_config(int argc, const char* const* argv);

/// Dispatch a validated config. Returns the process exit status.
int run(const RunConfig& cfg);

/// parse_config + run with diagnostics on stderr; returns the exit status.
int main_entry(int argc, const char* const* argv);

}  // namespace swave::cli
