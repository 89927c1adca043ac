#include "swave/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "swave/parallel.hpp"

namespace swave::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_comments(std::ostream& os, std::span<const std::string> comments) {
    for (const auto& line : comments) os << "# " << line << "\n";
}

/// mean and standard error of the mean.
void mean_se(std::span<const double> x, double& mean, double& se) {
    const auto n = static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += v;
    mean = s / n;
    if (x.size() < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}

/// RMS of per-sample squared maxima with its delta-method standard error.
void rms_se(std::span<const double> squares, double& rms, double& se) {
    double mean = 0.0, se_mean = 0.0;
    mean_se(squares, mean, se_mean);
    rms = std::sqrt(std::max(0.0, mean));
    se = rms > 0.0 ? se_mean / (2.0 * rms) : 0.0;
}

std::vector<std::int64_t> all_indices(std::int64_t steps) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t i = 0; i <= steps; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

}  // namespace

void validate(const ConvergenceConfig& cfg) {
    if (!(cfg.theta == 0.0 || cfg.theta == 0.5)) {
        throw std::invalid_argument("convergence: theta must be 0 or 0.5");
    }
    if (cfg.m < 8) throw std::invalid_argument("convergence: require m >= 8");
    if (cfg.samples < 1) throw std::invalid_argument("convergence: require samples >= 1");
    if (cfg.levels.empty()) throw std::invalid_argument("convergence: empty level list");
    std::int64_t prev = 0;
    for (std::int64_t n : cfg.levels) {
        if (!noise::is_power_of_two(n) || n < 2) {
            throw std::invalid_argument("convergence: level " + std::to_string(n) +
                                        " is not a power of two >= 2");
        }
        if (n <= prev) throw std::invalid_argument("convergence: levels must be ascending");
        prev = n;
    }
    if (!noise::is_power_of_two(cfg.reference) || cfg.reference < cfg.levels.back()) {
        throw std::invalid_argument(
            "convergence: reference must be a power of two >= the finest level");
    }
}

bool coupling_exact(const noise::IncrementLevel& coarse, const noise::IncrementLevel& fine) {
    if (coarse.grid.horizon != fine.grid.horizon) return false;
    if (fine.grid.steps % coarse.grid.steps != 0) return false;
    const std::int64_t ratio = fine.grid.steps / coarse.grid.steps;
    for (std::int64_t n = 0; n < coarse.grid.steps; ++n) {
        const auto* begin = fine.bar.data() + n * ratio;
        const double sum = noise::pairwise_sum({begin, static_cast<std::size_t>(ratio)});
        if (sum != coarse.bar[static_cast<std::size_t>(n)]) return false;
    }
    return coarse.terminal == fine.terminal;
}

ErrorRecord sample_error(const ConvergenceConfig& cfg, const fem1d::FemOperators& ops,
                         std::int64_t sample_index) {
    validate(cfg);

    std::vector<std::int64_t> all = cfg.levels;
    if (cfg.reference > cfg.levels.back()) all.push_back(cfg.reference);

    const noise::NoiseSeed seed{cfg.base_seed, static_cast<std::uint64_t>(sample_index)};
    const double horizon = cfg.spec.horizon;
    const std::vector<noise::IncrementLevel> incr =
        cfg.spec.zero_noise ? noise::zero_increments(horizon, all)
                            : noise::simulate_increments(seed, horizon, all);

    if (!cfg.spec.zero_noise) {
        for (std::size_t j = 0; j + 1 < incr.size(); ++j) {
            if (!coupling_exact(incr[j], incr[j + 1])) {
                throw std::logic_error("sample_error: path coupling is not bit-exact");
            }
        }
    }

    // Reference: theta = 1/2 at the finest resolution on the same path,
    // recorded at the finest level's time points (superset of all levels').
    const std::int64_t top = cfg.levels.back();
    const noise::IncrementLevel& ref_incr = incr.back();
    stepper::SchemeConfig ref_cfg;
    ref_cfg.theta = 0.5;
    ref_cfg.grid = noise::TimeGrid{horizon, cfg.reference};
    std::vector<std::int64_t> ref_record(static_cast<std::size_t>(top) + 1);
    for (std::int64_t k = 0; k <= top; ++k) {
        ref_record[static_cast<std::size_t>(k)] = k * (cfg.reference / top);
    }
    stepper::TrajectoryResult ref;
    try {
        ref = stepper::run_trajectory(cfg.spec, ops, ref_cfg, ref_incr, ref_record);
    } catch (const std::exception& e) {
        throw std::runtime_error("sample " + std::to_string(sample_index) + ", reference N=" +
                                 std::to_string(cfg.reference) + ": " + e.what());
    }

    ErrorRecord record;
    record.per_level.resize(cfg.levels.size());
    for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
        const std::int64_t steps = cfg.levels[j];
        stepper::SchemeConfig level_cfg;
        level_cfg.theta = cfg.theta;
        level_cfg.grid = noise::TimeGrid{horizon, steps};
        stepper::TrajectoryResult run;
        try {
            run = stepper::run_trajectory(cfg.spec, ops, level_cfg, incr[j], all_indices(steps));
        } catch (const std::exception& e) {
            throw std::runtime_error("sample " + std::to_string(sample_index) + ", level N=" +
                                     std::to_string(steps) + ": " + e.what());
        }

        LevelError err;
        for (std::int64_t n = 1; n <= steps; ++n) {
            const auto& [u_n, v_n] = run.recorded.at(n);
            const auto& [u_ref, v_ref] = ref.recorded.at(n * (cfg.reference / steps));
            Field du(u_n.size()), dv(v_n.size());
            for (std::size_t i = 0; i < du.size(); ++i) {
                du[i] = u_ref[i] - u_n[i];
                dv[i] = v_ref[i] - v_n[i];
            }
            err.u_l2 = std::max(err.u_l2, fem1d::norm_l2(du, ops));
            err.u_h1 = std::max(err.u_h1, fem1d::norm_h1_semi(du, ops));
            err.v_l2 = std::max(err.v_l2, fem1d::norm_l2(dv, ops));
        }
        record.per_level[j] = err;
    }
    return record;
}

ConvergenceReport convergence_study(const ConvergenceConfig& cfg, int workers) {
    validate(cfg);
    const fem1d::FemOperators ops =
        fem1d::assemble_operators({cfg.spec.a, cfg.spec.b, cfg.m});

    std::vector<ErrorRecord> records(static_cast<std::size_t>(cfg.samples));
    parallel_for(cfg.samples, workers,
                 [&](std::int64_t s) { records[static_cast<std::size_t>(s)] = sample_error(cfg, ops, s); });

    ConvergenceReport report;
    report.samples = cfg.samples;
    report.rows.resize(cfg.levels.size());
    std::vector<double> sq(static_cast<std::size_t>(cfg.samples));
    for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
        ConvergenceRow& row = report.rows[j];
        row.steps = cfg.levels[j];
        row.tau = cfg.spec.horizon / static_cast<double>(row.steps);
        auto reduce = [&](double LevelError::*member, double& err, double& se) {
            for (std::size_t s = 0; s < sq.size(); ++s) {
                const double v = records[s].per_level[j].*member;
                sq[s] = v * v;
            }
            rms_se(sq, err, se);
        };
        reduce(&LevelError::u_l2, row.err_u_l2, row.se_u_l2);
        reduce(&LevelError::u_h1, row.err_u_h1, row.se_u_h1);
        reduce(&LevelError::v_l2, row.err_v_l2, row.se_v_l2);

        row.order_u_l2 = row.order_u_h1 = row.order_v_l2 = kNaN;
        if (j > 0) {
            const ConvergenceRow& prev = report.rows[j - 1];
            const double halvings =
                std::log2(static_cast<double>(row.steps) / static_cast<double>(prev.steps));
            auto order = [halvings](double coarse, double fine) {
                return coarse > 0.0 && fine > 0.0 ? std::log2(coarse / fine) / halvings : kNaN;
            };
            row.order_u_l2 = order(prev.err_u_l2, row.err_u_l2);
            row.order_u_h1 = order(prev.err_u_h1, row.err_u_h1);
            row.order_v_l2 = order(prev.err_v_l2, row.err_v_l2);
        }
    }
    return report;
}

std::vector<double> estimate_order(std::span<const double> errors) {
    if (errors.size() < 2) {
        throw std::invalid_argument("estimate_order: need at least two levels");
    }
    for (double e : errors) {
        if (!(e > 0.0)) throw std::invalid_argument("estimate_order: errors must be positive");
    }
    std::vector<double> orders(errors.size() - 1);
    for (std::size_t i = 1; i < errors.size(); ++i) {
        orders[i - 1] = std::log2(errors[i - 1] / errors[i]);
    }
    return orders;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("least_squares_slope: need two equally sized samples");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: degenerate abscissae");
    return sxy / sxx;
}

double fitted_order(const ConvergenceReport& report, double ConvergenceRow::*err) {
    std::vector<double> x, y;
    for (const auto& row : report.rows) {
        x.push_back(std::log2(row.tau));
        y.push_back(std::log2(row.*err));
    }
    return least_squares_slope(x, y);
}

StabilityReport stability_sweep(const StabilityConfig& cfg, int workers) {
    if (!(cfg.theta == 0.0 || cfg.theta == 0.5)) {
        throw std::invalid_argument("stability: theta must be 0 or 0.5");
    }
    if (cfg.samples < 1) throw std::invalid_argument("stability: require samples >= 1");
    const fem1d::FemOperators ops =
        fem1d::assemble_operators({cfg.spec.a, cfg.spec.b, cfg.m});

    const std::size_t n_levels = cfg.levels.size();
    std::vector<double> max_energy(static_cast<std::size_t>(cfg.samples) * n_levels);
    parallel_for(cfg.samples, workers, [&](std::int64_t s) {
        const noise::NoiseSeed seed{cfg.base_seed, static_cast<std::uint64_t>(s)};
        const std::vector<noise::IncrementLevel> incr =
            cfg.spec.zero_noise ? noise::zero_increments(cfg.spec.horizon, cfg.levels)
                                : noise::simulate_increments(seed, cfg.spec.horizon, cfg.levels);
        for (std::size_t j = 0; j < n_levels; ++j) {
            stepper::SchemeConfig level_cfg;
            level_cfg.theta = cfg.theta;
            level_cfg.grid = incr[j].grid;
            const stepper::TrajectoryResult run =
                stepper::run_trajectory(cfg.spec, ops, level_cfg, incr[j], {});
            double peak = 0.0;
            for (double e : run.energy) peak = std::max(peak, e);
            max_energy[static_cast<std::size_t>(s) * n_levels + j] = peak;
        }
    });

    StabilityReport report;
    report.samples = cfg.samples;
    report.rows.resize(n_levels);
    std::vector<double> column(static_cast<std::size_t>(cfg.samples));
    for (std::size_t j = 0; j < n_levels; ++j) {
        for (std::size_t s = 0; s < column.size(); ++s) {
            column[s] = max_energy[s * n_levels + j];
        }
        StabilityRow& row = report.rows[j];
        row.steps = cfg.levels[j];
        row.tau = cfg.spec.horizon / static_cast<double>(row.steps);
        mean_se(column, row.mean_max_energy, row.se);
    }
    double lowest = report.rows.front().mean_max_energy;
    for (const auto& row : report.rows) lowest = std::min(lowest, row.mean_max_energy);
    for (const auto& row : report.rows) {
        if (!std::isfinite(row.mean_max_energy) ||
            row.mean_max_energy > kEnergyGrowthFactor * lowest) {
            report.growth_flagged = true;
        }
    }
    return report;
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report,
                           std::span<const std::string> header_comments) {
    write_comments(os, header_comments);
    os << "N,tau,err_u_L2,se_u_L2,order_u_L2,err_u_H1,se_u_H1,order_u_H1,"
          "err_v_L2,se_v_L2,order_v_L2,samples\n";
    for (const auto& row : report.rows) {
        auto order_field = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
        os << row.steps << ',' << fmt(row.tau) << ',' << fmt(row.err_u_l2) << ','
           << fmt(row.se_u_l2) << ',' << order_field(row.order_u_l2) << ','
           << fmt(row.err_u_h1) << ',' << fmt(row.se_u_h1) << ','
           << order_field(row.order_u_h1) << ',' << fmt(row.err_v_l2) << ','
           << fmt(row.se_v_l2) << ',' << order_field(row.order_v_l2) << ','
           << report.samples << '\n';
    }
}

void write_stability_csv(std::ostream& os, const StabilityReport& report,
                         std::span<const std::string> header_comments) {
    write_comments(os, header_comments);
    os << "# growth_flagged=" << (report.growth_flagged ? 1 : 0) << "\n";
    os << "N,tau,mean_max_energy,se,samples\n";
    for (const auto& row : report.rows) {
        os << row.steps << ',' << fmt(row.tau) << ',' << fmt(row.mean_max_energy) << ','
           << fmt(row.se) << ',' << report.samples << '\n';
    }
}

void write_moments_csv(std::ostream& os, std::span<const noise::MomentReport> reports,
                       std::span<const std::string> header_comments) {
    write_comments(os, header_comments);
    os << "tau,m2_bar,se_bar,m2_hat,se_hat,m2_diff,se_diff\n";
    for (const auto& r : reports) {
        os << fmt(r.tau) << ',' << fmt(r.m2_bar) << ',' << fmt(r.se_bar) << ',' << fmt(r.m2_hat)
           << ',' << fmt(r.se_hat) << ',' << fmt(r.m2_diff) << ',' << fmt(r.se_diff) << '\n';
    }
}

void write_gnuplot_script(std::ostream& os, const std::string& csv_path) {
    os << "set datafile separator ','\n"
          "set logscale xy 2\n"
          "set xlabel 'tau'\n"
          "set ylabel 'RMS error'\n"
          "set key left top\n"
          "set grid\n"
          "plot '"
       << csv_path
       << "' using 2:3 with linespoints title 'u, L2', \\\n"
          "     '' using 2:6 with linespoints title 'u, H1', \\\n"
          "     '' using 2:9 with linespoints title 'v, L2', \\\n"
          "     x with lines dashtype 2 title 'order 1', \\\n"
          "     x**1.5 with lines dashtype 3 title 'order 1.5'\n";
}

}  // namespace swave::experiment
