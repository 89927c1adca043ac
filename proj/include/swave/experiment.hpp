#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "swave/fem1d.hpp"
#include "swave/noise.hpp"
#include "swave/problem.hpp"
#include "swave/stepper.hpp"

namespace swave::experiment {

/// Strong-convergence study: fixed spatial mesh, a ladder of time levels, and
/// a path-coupled fine reference (theta = 1/2 at `reference` steps).
struct ConvergenceConfig {
    problem::ProblemSpec spec;
    double theta = 0.5;
    int m = 256;                       // spatial subintervals
    std::vector<std::int64_t> levels;  // ascending powers of two
    std::int64_t reference = 0;        // power of two, >= levels.back()
    std::int64_t samples = 100;
    std::uint64_t base_seed = 0;
};

void validate(const ConvergenceConfig& cfg);

/// Max-over-time errors of one sample at one level, in the three norms.
struct LevelError {
    double u_l2 = 0.0;
    double u_h1 = 0.0;
    double v_l2 = 0.0;
};

/// Per-level max errors of one sample (order matches ConvergenceConfig::levels).
struct ErrorRecord {
    std::vector<LevelError> per_level;
};

/// Check the bit-exact dyadic coupling between two resolutions of one path.
bool coupling_exact(const noise::IncrementLevel& coarse, const noise::IncrementLevel& fine);

/// Run one coupled sample: reference plus every level on the same path,
/// errors measured at the coarse level's time points. The operators handle is
/// shared across concurrent samples (populate-once factorization cache).
ErrorRecord sample_error(const ConvergenceConfig& cfg, const fem1d::FemOperators& ops,
                         std::int64_t sample_index);

struct ConvergenceRow {
    std::int64_t steps = 0;
    double tau = 0.0;
    double err_u_l2 = 0.0, se_u_l2 = 0.0;
    double err_u_h1 = 0.0, se_u_h1 = 0.0;
    double err_v_l2 = 0.0, se_v_l2 = 0.0;
    // log2 ratio vs the previous (coarser) level; NaN on the first row or
    // when an error vanishes.
    double order_u_l2 = std::numeric_limits<double>::quiet_NaN();
    double order_u_h1 = std::numeric_limits<double>::quiet_NaN();
    double order_v_l2 = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::int64_t samples = 0;
};

ConvergenceReport convergence_study(const ConvergenceConfig& cfg, int workers = 1);

/// Per-gap orders log2(err[i-1]/err[i]) for a dyadic level ladder.
/// Throws std::invalid_argument on a nonpositive error.
std::vector<double> estimate_order(std::span<const double> errors);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Slope of log2(error) vs log2(tau) over the report's levels.
double fitted_order(const ConvergenceReport& report, double ConvergenceRow::*err);

/// Energy-stability sweep: MC mean of the trajectory's maximal discrete
/// energy per level, all levels coupled on the same paths.
struct StabilityConfig {
    problem::ProblemSpec spec;
    double theta = 0.0;
    int m = 256;
    std::vector<std::int64_t> levels;
    std::int64_t samples = 100;
    std::uint64_t base_seed = 0;
};

struct StabilityRow {
    std::int64_t steps = 0;
    double tau = 0.0;
    double mean_max_energy = 0.0;
    double se = 0.0;
};

/// Across-level growth alarm threshold: a level whose mean max-energy exceeds
/// this multiple of the smallest level's is flagged.
inline constexpr double kEnergyGrowthFactor = 10.0;

struct StabilityReport {
    std::vector<StabilityRow> rows;
    std::int64_t samples = 0;
    bool growth_flagged = false;
};

StabilityReport stability_sweep(const StabilityConfig& cfg, int workers = 1);

// CSV emission. Every writer prefixes the given comment lines with "# ".
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report,
                           std::span<const std::string> header_comments);
void write_stability_csv(std::ostream& os, const StabilityReport& report,
                         std::span<const std::string> header_comments);
void write_moments_csv(std::ostream& os, std::span<const noise::MomentReport> reports,
                       std::span<const std::string> header_comments);
/// Gnuplot script for log-log error plots of a convergence CSV.
void write_gnuplot_script(std::ostream& os, const std::string& csv_path);

}  // namespace swave::experiment
