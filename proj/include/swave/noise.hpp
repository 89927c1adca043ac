#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swave/rng.hpp"

namespace swave::noise {

/// Uniform time grid on [0, T] with a power-of-two step count.
struct TimeGrid {
    double horizon = 1.0;
    std::int64_t steps = 2;

    double tau() const { return horizon / static_cast<double>(steps); }
    bool operator==(const TimeGrid&) const = default;
};

bool is_power_of_two(std::int64_t n);
void validate(const TimeGrid& grid);

/// Identifies one sample path; the generated stream is a pure function of
/// (base_seed, sample_index) and the requested finest level.
struct NoiseSeed {
    std::uint64_t base_seed = 0;
    std::uint64_t sample_index = 0;
};

/// Coupled Brownian increments of one path at one time resolution.
/// bar[n] = W(t_{n+1}) - W(t_n);
/// hat[n] = tau*W(t_{n+1}) - integral of the piecewise-linear interpolant of
/// W over [t_n, t_{n+1}] on the per-step sub-mesh of N^2 panels.
struct IncrementLevel {
    TimeGrid grid;
    std::vector<double> bar;
    std::vector<double> hat;
    /// W(T) as the balanced pairwise sum of the finest-level increments;
    /// identical across all levels built from one path.
    double terminal = 0.0;
};

/// Balanced binary-tree sum; for power-of-two spans this reproduces the
/// dyadic coupling reduction bit-exactly.
double pairwise_sum(std::span<const double> v);

/// Generate coupled increments for every requested level (ascending powers
/// of two) from a single pass over the finest level's sub-mesh. Coarse bar
/// increments are pairwise sums of fine ones, bit-exact.
std::vector<IncrementLevel> simulate_increments(const NoiseSeed& seed, double horizon,
                                                std::span<const std::int64_t> levels);

/// All-zero increments with the same shape (used for noise-free problems).
std::vector<IncrementLevel> zero_increments(double horizon,
                                            std::span<const std::int64_t> levels);

/// Monte Carlo estimates of the per-increment second moments at one
/// resolution, with the fine-Riemann proxy for the exact iterated integral.
struct MomentReport {
    double tau = 0.0;
    double m2_bar = 0.0, se_bar = 0.0;
    double m2_hat = 0.0, se_hat = 0.0;
    double m2_diff = 0.0, se_diff = 0.0;
    std::int64_t samples = 0;
};

/// Sub-mesh refinement factor used for the proxy increment in moment_report.
inline constexpr int kMomentRefinement = 16;

MomentReport moment_report(std::int64_t samples, const NoiseSeed& base, const TimeGrid& grid,
                           int workers = 1);

}  // namespace swave::noise
