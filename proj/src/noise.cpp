#include "swave/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "swave/parallel.hpp"

namespace swave::noise {

namespace {

enum class StreamTag : std::uint64_t { path = 1, moment = 2 };

rng::CounterRng stream_for(const NoiseSeed& seed, std::int64_t finest, StreamTag tag) {
    std::uint64_t key = rng::mix64(seed.base_seed);
    key = rng::combine_key(key, seed.sample_index);
    key = rng::combine_key(key, static_cast<std::uint64_t>(finest));
    key = rng::combine_key(key, static_cast<std::uint64_t>(tag));
    return rng::CounterRng{key};
}

void validate_levels(double horizon, std::span<const std::int64_t> levels) {
    if (!(horizon > 0.0)) throw std::invalid_argument("increments: require horizon > 0");
    if (levels.empty()) throw std::invalid_argument("increments: empty level set");
    std::int64_t prev = 0;
    for (std::int64_t n : levels) {
        validate(TimeGrid{horizon, n});
        if (n <= prev) throw std::invalid_argument("increments: levels must be strictly ascending");
        prev = n;
    }
    // Powers of two ascending are automatically nested; guard the sub-mesh
    // count N^3 against 64-bit overflow.
    if (levels.back() > (std::int64_t{1} << 20)) {
        throw std::invalid_argument("increments: finest level too large (sub-mesh overflow)");
    }
}

std::vector<double> pairwise_halve(const std::vector<double>& fine) {
    std::vector<double> coarse(fine.size() / 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = fine[2 * i] + fine[2 * i + 1];
    return coarse;
}

}  // namespace

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(const TimeGrid& grid) {
    if (!(grid.horizon > 0.0)) throw std::invalid_argument("grid: require horizon > 0");
    if (grid.steps < 2) throw std::invalid_argument("grid: require at least 2 steps");
    if (!is_power_of_two(grid.steps)) {
        throw std::invalid_argument("grid: step count " + std::to_string(grid.steps) +
                                    " is not a power of two");
    }
}

double pairwise_sum(std::span<const double> v) {
    if (v.empty()) return 0.0;
    if (v.size() == 1) return v[0];
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

std::vector<IncrementLevel> simulate_increments(const NoiseSeed& seed, double horizon,
                                                std::span<const std::int64_t> levels) {
    validate_levels(horizon, levels);
    const std::int64_t finest = levels.back();
    const std::int64_t total = finest * finest * finest;
    const double delta = horizon / static_cast<double>(total);
    const double sqrt_delta = std::sqrt(delta);

    struct LevelState {
        std::int64_t stride = 1;       // sub-units between this level's sub-mesh points
        std::int64_t sub_count = 1;    // sub-mesh points per step (last one = step end)
        std::int64_t countdown = 1;
        std::int64_t subs_done = 0;
        double tau = 0.0;
        double dx = 0.0;               // sub-mesh spacing tau / sub_count
        double w_step_start = 0.0;
        double interior_acc = 0.0;
        std::vector<double> hat;
    };

    std::vector<LevelState> states(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const std::int64_t n = levels[j];
        const std::int64_t ratio = finest / n;
        LevelState& st = states[j];
        st.stride = ratio * ratio * ratio;
        st.sub_count = n * n;
        st.countdown = st.stride;
        st.tau = horizon / static_cast<double>(n);
        st.dx = st.tau / static_cast<double>(st.sub_count);
        st.hat.reserve(static_cast<std::size_t>(n));
    }

    std::vector<double> atoms;
    atoms.reserve(static_cast<std::size_t>(finest));
    const std::int64_t atom_len = finest * finest;  // sub-units per finest step
    std::int64_t atom_countdown = atom_len;
    double atom = 0.0;
    double w = 0.0;

    rng::NormalStream normals(stream_for(seed, finest, StreamTag::path));
    for (std::int64_t i = 0; i < total; ++i) {
        const double xi = sqrt_delta * normals.next();
        w += xi;
        atom += xi;
        for (LevelState& st : states) {
            if (--st.countdown != 0) continue;
            st.countdown = st.stride;
            if (++st.subs_done == st.sub_count) {
                st.hat.push_back(st.tau * w -
                                 st.dx * (0.5 * st.w_step_start + st.interior_acc + 0.5 * w));
                st.w_step_start = w;
                st.interior_acc = 0.0;
                st.subs_done = 0;
            } else {
                st.interior_acc += w;
            }
        }
        if (--atom_countdown == 0) {
            atoms.push_back(atom);
            atom = 0.0;
            atom_countdown = atom_len;
        }
    }

    const double terminal = pairwise_sum(atoms);

    // Coarse bar increments are dyadic pairwise sums of fine ones.
    std::vector<IncrementLevel> out(levels.size());
    std::vector<double> bar = std::move(atoms);
    std::int64_t n = finest;
    for (std::size_t j = levels.size(); j-- > 0;) {
        while (n > levels[j]) {
            bar = pairwise_halve(bar);
            n /= 2;
        }
        out[j].grid = TimeGrid{horizon, levels[j]};
        out[j].bar = bar;
        out[j].hat = std::move(states[j].hat);
        out[j].terminal = terminal;
    }
    return out;
}

std::vector<IncrementLevel> zero_increments(double horizon,
                                            std::span<const std::int64_t> levels) {
    validate_levels(horizon, levels);
    std::vector<IncrementLevel> out(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        out[j].grid = TimeGrid{horizon, levels[j]};
        out[j].bar.assign(static_cast<std::size_t>(levels[j]), 0.0);
        out[j].hat.assign(static_cast<std::size_t>(levels[j]), 0.0);
    }
    return out;
}

MomentReport moment_report(std::int64_t samples, const NoiseSeed& base, const TimeGrid& grid,
                           int workers) {
    validate(grid);
    if (samples < 100) throw std::invalid_argument("moment_report: require samples >= 100");

    const double tau = grid.tau();
    const std::int64_t sub_count = grid.steps * grid.steps;
    const std::int64_t fine_count = sub_count * kMomentRefinement;
    const double dx_coarse = tau / static_cast<double>(sub_count);
    const double dx_fine = tau / static_cast<double>(fine_count);
    const double sqrt_delta = std::sqrt(dx_fine);

    // The statistics are per increment and stationary in n, so each sample
    // draws one step of length tau at the refined sub-resolution.
    std::vector<double> sq_bar(samples), sq_hat(samples), sq_diff(samples);
    parallel_for(samples, workers, [&](std::int64_t s) {
        NoiseSeed seed{base.base_seed, base.sample_index + static_cast<std::uint64_t>(s)};
        rng::NormalStream normals(stream_for(seed, grid.steps, StreamTag::moment));
        double w = 0.0;
        double acc_coarse = 0.0;
        double acc_fine = 0.0;
        for (std::int64_t i = 1; i <= fine_count; ++i) {
            w += sqrt_delta * normals.next();
            if (i < fine_count) {
                acc_fine += w;
                if (i % kMomentRefinement == 0) acc_coarse += w;
            }
        }
        const double bar = w;  // W(t_0) = 0
        const double hat = tau * w - dx_coarse * (acc_coarse + 0.5 * w);
        const double tilde_ref = tau * w - dx_fine * (acc_fine + 0.5 * w);
        sq_bar[s] = bar * bar;
        sq_hat[s] = hat * hat;
        sq_diff[s] = (hat - tilde_ref) * (hat - tilde_ref);
    });

    auto mean_se = [samples](const std::vector<double>& x, double& mean, double& se) {
        double s = 0.0;
        for (double v : x) s += v;
        mean = s / static_cast<double>(samples);
        if (samples < 2) {
            se = 0.0;
            return;
        }
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples));
    };

    MomentReport rep;
    rep.tau = tau;
    rep.samples = samples;
    mean_se(sq_bar, rep.m2_bar, rep.se_bar);
    mean_se(sq_hat, rep.m2_hat, rep.se_hat);
    mean_se(sq_diff, rep.m2_diff, rep.se_diff);
    return rep;
}

}  // namespace swave::noise
