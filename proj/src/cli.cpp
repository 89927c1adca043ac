#include "swave/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "swave/experiment.hpp"
#include "swave/fem1d.hpp"
#include "swave/noise.hpp"
#include "swave/parallel.hpp"
#include "swave/problem.hpp"
#include "swave/stepper.hpp"
#include "swave/version.hpp"

namespace swave::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string join_levels(const std::vector<std::int64_t>& levels) {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(levels[i]);
    }
    return out;
}

void check_power_of_two(std::int64_t n, const char* what) {
    if (!noise::is_power_of_two(n) || n < 2) {
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(n) +
                                    " is not a power of two >= 2");
    }
}

void check_levels(const std::vector<std::int64_t>& levels) {
    if (levels.empty()) throw std::invalid_argument("--levels: empty list");
    std::int64_t prev = 0;
    for (std::int64_t n : levels) {
        check_power_of_two(n, "--levels");
        if (n <= prev) throw std::invalid_argument("--levels: values must be strictly ascending");
        prev = n;
    }
}

problem::ProblemSpec resolve_problem(const RunConfig& cfg) {
    problem::ProblemSpec spec = problem::builtin(cfg.problem);
    spec.horizon = cfg.horizon;
    if (cfg.u0_shape == "sinpi") {
        spec.u0 = [](double x) { return std::sin(3.14159265358979323846 * x); };
    } else if (cfg.u0_shape != "sin2pi") {
        throw std::invalid_argument("--u0: expected sin2pi or sinpi");
    }
    return spec;
}

int resolved_workers(const RunConfig& cfg) {
    return cfg.workers > 0 ? cfg.workers : default_workers();
}

/// Scientific provenance only: worker count and other execution details are
/// excluded so identical configs give byte-identical files.
std::vector<std::string> provenance(const RunConfig& cfg, const char* subcommand) {
    std::vector<std::string> lines;
    lines.push_back(std::string("swave ") + kVersion);
    std::string line = std::string("subcommand=") + subcommand;
    lines.push_back(line);
    std::ostringstream os;
    switch (cfg.subcommand) {
        case Subcommand::simulate:
            os << "problem=" << cfg.problem << " theta=" << fmt(cfg.theta) << " N=" << cfg.steps
               << " m=" << cfg.m << " seed=" << cfg.base_seed << " sample=" << cfg.sample_index
               << " T=" << fmt(cfg.horizon) << " u0=" << cfg.u0_shape;
            break;
        case Subcommand::convergence:
            os << "problem=" << cfg.problem << " theta=" << fmt(cfg.theta)
               << " levels=" << join_levels(cfg.levels) << " ref=" << cfg.reference
               << " m=" << cfg.m << " samples=" << cfg.samples << " seed=" << cfg.base_seed
               << " T=" << fmt(cfg.horizon) << " u0=" << cfg.u0_shape;
            break;
        case Subcommand::stability:
            os << "problem=" << cfg.problem << " theta=" << fmt(cfg.theta)
               << " levels=" << join_levels(cfg.levels) << " m=" << cfg.m
               << " samples=" << cfg.samples << " seed=" << cfg.base_seed
               << " T=" << fmt(cfg.horizon) << " u0=" << cfg.u0_shape;
            break;
        case Subcommand::noise_check:
            os << "levels=" << join_levels(cfg.levels) << " samples=" << cfg.samples
               << " seed=" << cfg.base_seed << " T=" << fmt(cfg.horizon);
            break;
    }
    lines.push_back(os.str());
    return lines;
}

std::filesystem::path resolve_output_path(const std::string& output) {
    std::filesystem::path path(output);
    if (path.is_relative()) {
        if (const char* dir = std::getenv("SWAVE_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
            path = std::filesystem::path(dir) / path;
        }
    }
    return path;
}

/// Write through a callback either to stdout or to the resolved path.
template <typename WriteFn>
void emit(const RunConfig& cfg, WriteFn&& write) {
    if (cfg.output.empty()) {
        write(std::cout);
        return;
    }
    const std::filesystem::path path = resolve_output_path(cfg.output);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path.string());
    write(os);
    if (!os.good()) throw std::runtime_error("write failed for " + path.string());
}

int run_simulate(const RunConfig& cfg) {
    check_power_of_two(cfg.steps, "--steps");
    const problem::ProblemSpec spec = resolve_problem(cfg);
    const noise::TimeGrid grid{spec.horizon, cfg.steps};
    const double tau = grid.tau();

    std::vector<double> times = cfg.record_times;
    if (times.empty()) times.push_back(spec.horizon);
    std::vector<std::int64_t> record;
    for (double t : times) {
        const double ratio = t / tau;
        const auto idx = static_cast<std::int64_t>(std::llround(ratio));
        if (idx < 0 || idx > cfg.steps || std::abs(ratio - static_cast<double>(idx)) > 1e-9) {
            throw std::invalid_argument("--record: time " + fmt(t) +
                                        " is not a grid point of tau=" + fmt(tau));
        }
        record.push_back(idx);
    }

    const fem1d::FemOperators ops = fem1d::assemble_operators({spec.a, spec.b, cfg.m});
    const std::vector<std::int64_t> level{cfg.steps};
    const std::vector<noise::IncrementLevel> incr =
        spec.zero_noise
            ? noise::zero_increments(spec.horizon, level)
            : noise::simulate_increments({cfg.base_seed, cfg.sample_index}, spec.horizon, level);

    stepper::SchemeConfig scheme;
    scheme.theta = cfg.theta;
    scheme.grid = grid;
    const stepper::TrajectoryResult result =
        stepper::run_trajectory(spec, ops, scheme, incr[0], record);

    emit(cfg, [&](std::ostream& os) {
        for (const auto& line : provenance(cfg, "simulate")) os << "# " << line << "\n";
        os << "t,x,u,v\n";
        const auto& mesh = ops.mesh();
        for (std::int64_t idx : record) {
            const auto& [u, v] = result.recorded.at(idx);
            const double t = static_cast<double>(idx) * tau;
            os << fmt(t) << ',' << fmt(mesh.a) << ",0,0\n";
            for (int i = 1; i <= mesh.interior_nodes(); ++i) {
                os << fmt(t) << ',' << fmt(mesh.node(i)) << ',' << fmt(u[i - 1]) << ','
                   << fmt(v[i - 1]) << '\n';
            }
            os << fmt(t) << ',' << fmt(mesh.b) << ",0,0\n";
        }
    });
    return 0;
}

int run_convergence(const RunConfig& cfg) {
    check_levels(cfg.levels);
    check_power_of_two(cfg.reference, "--ref");
    experiment::ConvergenceConfig study;
    study.spec = resolve_problem(cfg);
    study.theta = cfg.theta;
    study.m = cfg.m;
    study.levels = cfg.levels;
    study.reference = cfg.reference;
    study.samples = cfg.samples;
    study.base_seed = cfg.base_seed;
    experiment::validate(study);

    const experiment::ConvergenceReport report =
        experiment::convergence_study(study, resolved_workers(cfg));
    const std::vector<std::string> header = provenance(cfg, "convergence");
    emit(cfg, [&](std::ostream& os) { experiment::write_convergence_csv(os, report, header); });

    if (cfg.emit_plot) {
        if (cfg.output.empty()) {
            throw std::invalid_argument("--plot requires --out (the script references the file)");
        }
        const std::filesystem::path csv = resolve_output_path(cfg.output);
        const std::filesystem::path script = csv.string() + ".gp";
        std::ofstream os(script);
        if (!os) throw std::runtime_error("cannot open plot script " + script.string());
        experiment::write_gnuplot_script(os, csv.filename().string());
    }
    return 0;
}

int run_stability(const RunConfig& cfg) {
    check_levels(cfg.levels);
    experiment::StabilityConfig sweep;
    sweep.spec = resolve_problem(cfg);
    sweep.theta = cfg.theta;
    sweep.m = cfg.m;
    sweep.levels = cfg.levels;
    sweep.samples = cfg.samples;
    sweep.base_seed = cfg.base_seed;

    const experiment::StabilityReport report =
        experiment::stability_sweep(sweep, resolved_workers(cfg));
    const std::vector<std::string> header = provenance(cfg, "stability");
    emit(cfg, [&](std::ostream& os) { experiment::write_stability_csv(os, report, header); });
    return 0;
}

int run_noise_check(const RunConfig& cfg) {
    check_levels(cfg.levels);
    std::vector<noise::MomentReport> reports;
    for (std::int64_t n : cfg.levels) {
        reports.push_back(noise::moment_report(cfg.samples, {cfg.base_seed, 0},
                                               {cfg.horizon, n}, resolved_workers(cfg)));
    }
    const std::vector<std::string> header = provenance(cfg, "noise-check");
    emit(cfg, [&](std::ostream& os) { experiment::write_moments_csv(os, reports, header); });
    return 0;
}

}  // namespace

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

/// Read a flat key=value (or "key value") file and turn each entry into a
/// "--key=value" token. '#' starts a comment.
std::vector<std::string> config_file_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("--config: cannot open " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::string key, value;
        if (const auto eq = line.find('='); eq != std::string::npos) {
            key = trim(line.substr(0, eq));
            value = trim(line.substr(eq + 1));
        } else if (const auto ws = line.find_first_of(" \t"); ws != std::string::npos) {
            key = trim(line.substr(0, ws));
            value = trim(line.substr(ws + 1));
        } else {
            key = line;
        }
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty() || key == "config") {
            throw std::invalid_argument("--config: malformed line '" + line + "'");
        }
        tokens.push_back(value.empty() ? "--" + key : "--" + key + "=" + value);
    }
    return tokens;
}

/// Splice config-file values into the argument list right after the
/// subcommand, dropping file keys that are also given as flags (flags win).
std::vector<std::string> layer_config_file(std::vector<std::string> args) {
    static const std::vector<std::string> subnames{"simulate", "convergence", "stability",
                                                   "noise-check"};
    std::size_t sub_pos = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        for (const auto& name : subnames) {
            if (args[i] == name) {
                sub_pos = i;
                break;
            }
        }
        if (sub_pos != args.size()) break;
    }
    if (sub_pos == args.size()) return args;

    std::string path;
    for (std::size_t j = sub_pos + 1; j < args.size(); ++j) {
        if (args[j] == "--config" && j + 1 < args.size()) {
            path = args[j + 1];
            args.erase(args.begin() + j, args.begin() + j + 2);
            break;
        }
        if (args[j].rfind("--config=", 0) == 0) {
            path = args[j].substr(9);
            args.erase(args.begin() + j);
            break;
        }
    }
    if (path.empty()) return args;

    std::vector<std::string> explicit_keys;
    for (std::size_t j = sub_pos + 1; j < args.size(); ++j) {
        if (args[j].rfind("--", 0) != 0) continue;
        explicit_keys.push_back(args[j].substr(2, args[j].find('=') - 2));
    }
    std::vector<std::string> layered(args.begin(), args.begin() + sub_pos + 1);
    for (const auto& token : config_file_tokens(path)) {
        const std::string key = token.substr(2, token.find('=') - 2);
        bool overridden = false;
        for (const auto& k : explicit_keys) overridden = overridden || k == key;
        if (!overridden) layered.push_back(token);
    }
    layered.insert(layered.end(), args.begin() + sub_pos + 1, args.end());
    return layered;
}

}  // namespace

RunConfig parse_config(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Implicit time stepping for the semilinear stochastic wave equation", "swave"};
    app.require_subcommand(1);

    std::string config_path_doc;  // value handled by layer_config_file
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.base_seed, "Base RNG seed");
        sub->add_option("--horizon", cfg.horizon, "Time horizon T")->check(CLI::PositiveNumber);
        sub->add_option("--out", cfg.output, "Output CSV path (default: stdout)");
        sub->add_option("--workers", cfg.workers, "Max concurrent samples (0 = all cores)");
        sub->add_option("--config", config_path_doc,
                        "Flat key=value file with the same names as flags; flags override");
    };
    auto add_problem = [&](CLI::App* sub) {
        sub->add_option("--problem", cfg.problem, "Problem name: test1, test2, deterministic")
            ->required();
        sub->add_option("--theta", cfg.theta, "Scheme parameter: 0 or 0.5")->required();
        sub->add_option("--m", cfg.m, "Spatial subintervals")->check(CLI::PositiveNumber);
        sub->add_option("--u0", cfg.u0_shape, "Initial displacement: sin2pi (default) or sinpi");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "Roll one trajectory and dump fields");
    add_problem(simulate);
    simulate->add_option("--steps", cfg.steps, "Time steps N (power of two)")->required();
    simulate->add_option("--sample", cfg.sample_index, "Sample index within the seed");
    simulate->add_option("--record", cfg.record_times, "Times to record (default: T)")
        ->delimiter(',');
    add_common(simulate);

    CLI::App* convergence =
        app.add_subcommand("convergence", "Strong-error convergence study vs a coupled reference");
    add_problem(convergence);
    convergence->add_option("--levels", cfg.levels, "Time levels, ascending powers of two")
        ->required()
        ->delimiter(',');
    convergence->add_option("--ref", cfg.reference, "Reference step count")->required();
    convergence->add_option("--samples", cfg.samples, "Monte Carlo samples")
        ->check(CLI::PositiveNumber);
    convergence->add_flag("--plot", cfg.emit_plot, "Also write a gnuplot script next to --out");
    add_common(convergence);

    CLI::App* stability = app.add_subcommand("stability", "Energy-stability sweep across levels");
    add_problem(stability);
    stability->add_option("--levels", cfg.levels, "Time levels, ascending powers of two")
        ->required()
        ->delimiter(',');
    stability->add_option("--samples", cfg.samples, "Monte Carlo samples")
        ->check(CLI::PositiveNumber);
    add_common(stability);

    CLI::App* noise_check =
        app.add_subcommand("noise-check", "Increment moment report across resolutions");
    noise_check->add_option("--levels", cfg.levels, "Step counts N, ascending powers of two")
        ->required()
        ->delimiter(',');
    noise_check->add_option("--samples", cfg.samples, "Monte Carlo samples")
        ->check(CLI::PositiveNumber);
    add_common(noise_check);

    std::vector<std::string> args =
        layer_config_file(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        throw HelpRequested{parsed.empty() ? app.help() : parsed.front()->help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(e.what());
    }

    if (simulate->parsed()) cfg.subcommand = Subcommand::simulate;
    if (convergence->parsed()) cfg.subcommand = Subcommand::convergence;
    if (stability->parsed()) cfg.subcommand = Subcommand::stability;
    if (noise_check->parsed()) cfg.subcommand = Subcommand::noise_check;

    if (cfg.subcommand != Subcommand::noise_check && !(cfg.theta == 0.0 || cfg.theta == 0.5)) {
        throw std::invalid_argument("--theta: must be 0 or 0.5");
    }
    if (!cfg.levels.empty()) check_levels(cfg.levels);
    return cfg;
}

int run(const RunConfig& cfg) {
    switch (cfg.subcommand) {
        case Subcommand::simulate: return run_simulate(cfg);
        case Subcommand::convergence: return run_convergence(cfg);
        case Subcommand::stability: return run_stability(cfg);
        case Subcommand::noise_check: return run_noise_check(cfg);
    }
    return 2;
}

int main_entry(int argc, const char* const* argv) {
    try {
        const RunConfig cfg = parse_config(argc, argv);
        return run(cfg);
    } catch (const HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "swave: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "swave: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace swave::cli
