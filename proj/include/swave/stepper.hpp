#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swave/fem1d.hpp"
#include "swave/field.hpp"
#include "swave/noise.hpp"
#include "swave/problem.hpp"

namespace swave::stepper {

/// Time-discretization parameters. theta selects the scheme: 0 solves the
/// backward (n+1)-level form, 1/2 averages levels n+1 and n-1.
struct SchemeConfig {
    double theta = 0.0;  // 0 or 0.5
    noise::TimeGrid grid;
    double picard_tol = 1e-10;  // relative L2 (mass-weighted) change between iterates
    int picard_max = 50;
};

void validate(const SchemeConfig& cfg);

/// Discrete pair (u^n, v^n); u_prev holds u^{n-1} and is nonempty exactly
/// when theta = 1/2 and n >= 1.
struct TrajectoryState {
    std::int64_t n = 0;
    Field u;
    Field v;
    Field u_prev;
    /// Picard iterations of the solve that produced this state (0 for n<=1).
    int picard_iterations = 0;
};

class PicardDivergedError : public std::runtime_error {
public:
    explicit PicardDivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

class MissingLagError : public std::runtime_error {
public:
    explicit MissingLagError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Step failure with the step index attached.
class TrajectoryError : public std::runtime_error {
public:
    TrajectoryError(std::int64_t step, const std::string& msg)
        : std::runtime_error("step " + std::to_string(step) + ": " + msg), step_(step) {}
    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

/// Apply a pointwise scalar function to the nodal values.
Field nodal_apply(const std::function<double(double)>& f, const Field& u);

/// L2-projections of the initial data (u0, v0).
std::pair<Field, Field> initial_fields(const problem::ProblemSpec& spec,
                                       const fem1d::FemOperators& ops);

/// Taylor first step: consumes bar[0] and hat[0] of the increment level and
/// returns the state at n = 1 (with the lag field kept when theta = 1/2).
TrajectoryState initial_step(const problem::ProblemSpec& spec, const fem1d::FemOperators& ops,
                             const SchemeConfig& cfg, const noise::IncrementLevel& incr);

/// One implicit step of the theta = 0 scheme.
TrajectoryState step_theta0(const TrajectoryState& state, const problem::ProblemSpec& spec,
                            const fem1d::FemOperators& ops, const SchemeConfig& cfg,
                            double bar_n, double hat_n);

/// One implicit step of the theta = 1/2 scheme (requires the lag field).
TrajectoryState step_theta_half(const TrajectoryState& state, const problem::ProblemSpec& spec,
                                const fem1d::FemOperators& ops, const SchemeConfig& cfg,
                                double bar_n, double hat_n);

/// ||v||_{L2}^2 + |u|_{H1}^2 via the mass and stiffness quadratic forms.
double discrete_energy(const TrajectoryState& state, const fem1d::FemOperators& ops);

struct TrajectoryResult {
    /// Recorded states keyed by step index.
    std::map<std::int64_t, std::pair<Field, Field>> recorded;
    /// energy[n] for n = 0..N.
    std::vector<double> energy;
    int max_picard_iterations = 0;
};

/// Roll the configured scheme over the whole grid, recording the requested
/// step indices. Step errors are rethrown with the step index attached.
TrajectoryResult run_trajectory(const problem::ProblemSpec& spec, const fem1d::FemOperators& ops,
                                const SchemeConfig& cfg, const noise::IncrementLevel& incr,
                                std::span<const std::int64_t> record);

}  // namespace swave::stepper
