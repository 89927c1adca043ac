// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// criteria hold. Sizes, seeds, and tolerances are fixed here.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swave/experiment.hpp"
#include "swave/fem1d.hpp"
#include "swave/noise.hpp"
#include "swave/parallel.hpp"
#include "swave/problem.hpp"
#include "swave/stepper.hpp"

using namespace swave;
using oracles::kPi;

namespace {

bool g_all_pass = true;

void report(const char* tag, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", tag, detail.c_str());
    if (!pass) g_all_pass = false;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct Slopes {
    double u, h1, v;
};

Slopes study_slopes(const char* name, double theta, int workers) {
    experiment::ConvergenceConfig cfg;
    cfg.spec = problem::builtin(name);
    cfg.theta = theta;
    cfg.m = 256;
    cfg.levels = {4, 8, 16, 32};
    cfg.reference = 256;
    cfg.samples = 100;
    cfg.base_seed = 2024;
    const auto rep = experiment::convergence_study(cfg, workers);
    return {experiment::fitted_order(rep, &experiment::ConvergenceRow::err_u_l2),
            experiment::fitted_order(rep, &experiment::ConvergenceRow::err_u_h1),
            experiment::fitted_order(rep, &experiment::ConvergenceRow::err_v_l2)};
}

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

void criterion1(int workers) {
    bool pass = true;
    std::string detail;
    for (const char* name : {"test1", "test2"}) {
        const Slopes s = study_slopes(name, 0.0, workers);
        const bool ok = in_band(s.u, 0.75, 1.25) && in_band(s.h1, 0.75, 1.25) &&
                        in_band(s.v, 0.75, 1.25);
        pass = pass && ok;
        detail += std::string(name) + " slopes u=" + fmt3(s.u) + " H1=" + fmt3(s.h1) +
                  " v=" + fmt3(s.v) + "; ";
    }
    report("1 theta=0 rate in [0.75,1.25]", pass, detail);
    if (!pass) {
        std::printf("       note: with u0=sin(2*pi*x) the theta=0 scheme's implicit damping\n"
                    "       (amplitude factor exp(-lambda*tau*T/2), lambda=4*pi^2) saturates the\n"
                    "       strong error on the coarse grids; the supplementary line below shows\n"
                    "       the first-order rate once the wave is resolved.\n");
    }

    // Supplementary diagnostic (not a gate): same configuration driven by the
    // fundamental mode cos(pi x / 2), where all four levels resolve the wave.
    experiment::ConvergenceConfig cfg;
    cfg.spec = problem::builtin("test1");
    cfg.spec.u0 = [](double x) { return std::cos(0.5 * kPi * x); };
    cfg.theta = 0.0;
    cfg.m = 256;
    cfg.levels = {4, 8, 16, 32};
    cfg.reference = 256;
    cfg.samples = 40;
    cfg.base_seed = 2024;
    const auto rep = experiment::convergence_study(cfg, workers);
    std::printf("       supplementary (fundamental-mode test1, theta=0): slopes u=%s H1=%s v=%s\n",
                fmt3(experiment::fitted_order(rep, &experiment::ConvergenceRow::err_u_l2)).c_str(),
                fmt3(experiment::fitted_order(rep, &experiment::ConvergenceRow::err_u_h1)).c_str(),
                fmt3(experiment::fitted_order(rep, &experiment::ConvergenceRow::err_v_l2)).c_str());
}

void criterion2(int workers) {
    const Slopes s = study_slopes("test2", 0.5, workers);
    const bool pass = in_band(s.u, 1.25, 1.8) && in_band(s.v, 0.8, 1.3);
    report("2 theta=1/2 rate: u in [1.25,1.8], v in [0.8,1.3]", pass,
           "slopes u=" + fmt3(s.u) + " v=" + fmt3(s.v) + " (H1=" + fmt3(s.h1) + ")");
}

void criterion3(int workers) {
    bool pass = true;
    std::string detail;
    double prev_diff = 0.0;
    for (std::int64_t n : {4, 8, 16}) {
        const auto rep = noise::moment_report(100000, {947, 0}, {1.0, n}, workers);
        const double tau = rep.tau;
        const bool bar_ok = std::abs(rep.m2_bar - tau) <= 3.0 * rep.se_bar;
        const bool hat_ok = std::abs(rep.m2_hat - tau * tau * tau / 3.0) <= 3.0 * rep.se_hat;
        bool ratio_ok = true;
        if (prev_diff > 0.0) ratio_ok = prev_diff / rep.m2_diff >= 16.0;
        pass = pass && bar_ok && hat_ok && ratio_ok;
        detail += "tau=1/" + std::to_string(n) + (bar_ok ? " bar:ok" : " bar:BAD") +
                  (hat_ok ? " hat:ok" : " hat:BAD");
        if (prev_diff > 0.0) {
            detail += " ratio=" + fmt3(prev_diff / rep.m2_diff);
        }
        detail += "; ";
        prev_diff = rep.m2_diff;
    }
    report("3 increment moments (3 SE bands, diff ratio >= 16)", pass, detail);
}

void criterion4(int workers) {
    bool pass = true;
    std::string detail;
    for (double theta : {0.0, 0.5}) {
        experiment::StabilityConfig cfg;
        cfg.spec = problem::builtin("test2");
        cfg.theta = theta;
        cfg.m = 256;
        cfg.levels = {8, 16, 32, 64};
        cfg.samples = 200;
        cfg.base_seed = 515;
        const auto rep = experiment::stability_sweep(cfg, workers);
        const double finest = rep.rows.back().mean_max_energy;
        double worst = 0.0;
        bool finite = true;
        for (const auto& row : rep.rows) {
            if (!std::isfinite(row.mean_max_energy)) finite = false;
            worst = std::max(worst, std::abs(row.mean_max_energy - finest) / finest);
            if (row.mean_max_energy > 10.0 * finest) finite = false;
        }
        pass = pass && finite && worst < 0.25;
        detail += "theta=" + fmt3(theta) + " max dev=" + fmt3(100.0 * worst) + "%; ";
    }
    report("4 energy stability across levels (<25%, no blow-up)", pass, detail);
}

void criterion5(int workers) {
    // (a) closed-form oracle at T=1.
    problem::ProblemSpec spec = problem::builtin("deterministic");
    spec.u0 = [](double x) { return std::sin(kPi * x); };
    const fem1d::FemOperators ops = fem1d::assemble_operators({-1.0, 1.0, 128});
    stepper::SchemeConfig scheme;
    scheme.theta = 0.5;
    scheme.grid = {1.0, 64};
    const auto incr = noise::zero_increments(1.0, std::vector<std::int64_t>{64});
    const auto run =
        stepper::run_trajectory(spec, ops, scheme, incr[0], std::vector<std::int64_t>{64});
    const Field target = fem1d::l2_project([](double x) { return oracles::exact_wave_u(1.0, x); },
                                           ops.mesh(), ops);
    const auto& u_final = run.recorded.at(64).first;
    Field diff(u_final.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u_final[i] - target[i];
    const double err = fem1d::norm_l2(diff, ops);

    // (b) slope vs the N_ref = 1024 reference.
    experiment::ConvergenceConfig cfg;
    cfg.spec = spec;
    cfg.theta = 0.5;
    cfg.m = 128;
    cfg.levels = {8, 16, 32, 64};
    cfg.reference = 1024;
    cfg.samples = 1;
    cfg.base_seed = 0;
    const auto rep = experiment::convergence_study(cfg, workers);
    const double slope = experiment::fitted_order(rep, &experiment::ConvergenceRow::err_u_l2);

    const bool pass = err < 5e-3 && in_band(slope, 1.8, 2.2);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "L2 err at T=1: %.3e (<5e-3), slope=%s", err,
                  fmt3(slope).c_str());
    report("5 deterministic oracle (error + slope 2.0 +/- 0.2)", pass, buf);
}

void criterion6(int) {
    const fem1d::FemOperators ops = fem1d::assemble_operators({-1.0, 1.0, 32});
    std::mt19937_64 rng(60001);
    std::normal_distribution<double> gauss;
    double worst_kin = 0.0, worst_mom = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const bool half = rep % 2 == 1;
        const problem::ProblemSpec spec = problem::builtin(half ? "test2" : "test1");
        stepper::SchemeConfig scheme;
        scheme.theta = half ? 0.5 : 0.0;
        scheme.grid = {1.0, 8};
        stepper::TrajectoryState state;
        state.n = 1;
        state.u = oracles::random_field(rng, -1.0, 1.0, 32, 0.8);
        state.v = oracles::random_field(rng, -1.0, 1.0, 32, 0.8);
        if (half) state.u_prev = oracles::random_field(rng, -1.0, 1.0, 32, 0.8);
        const double bar = std::sqrt(scheme.grid.tau()) * gauss(rng);
        const double hat = std::sqrt(std::pow(scheme.grid.tau(), 3) / 3.0) * gauss(rng);
        const auto next = half ? stepper::step_theta_half(state, spec, ops, scheme, bar, hat)
                               : stepper::step_theta0(state, spec, ops, scheme, bar, hat);
        const auto res = oracles::scheme_residuals(state, next, spec, ops.mesh().h(),
                                                   scheme.grid.tau(), scheme.theta, bar, hat);
        worst_kin = std::max(worst_kin, res.kinematic);
        worst_mom = std::max(worst_mom, res.momentum);
    }
    const bool pass = worst_kin <= 1e-9 && worst_mom <= 1e-9;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max rel residual: kinematic %.2e, momentum %.2e", worst_kin,
                  worst_mom);
    report("6 scheme residuals <= 1e-9 on 1000 random steps", pass, buf);
}

void criterion7(int workers) {
    // Same sample family as criterion 1: seed 2024, levels plus reference.
    const std::vector<std::int64_t> levels{4, 8, 16, 32, 256};
    std::vector<char> ok(100, 0);
    parallel_for(100, workers, [&](std::int64_t s) {
        const auto incr =
            noise::simulate_increments({2024, static_cast<std::uint64_t>(s)}, 1.0, levels);
        bool good = true;
        for (std::size_t j = 0; j + 1 < incr.size(); ++j) {
            good = good && experiment::coupling_exact(incr[j], incr[j + 1]);
        }
        good = good && experiment::coupling_exact(incr.front(), incr.back());
        ok[static_cast<std::size_t>(s)] = good ? 1 : 0;
    });
    int bad = 0;
    for (char c : ok) bad += c == 0;
    report("7 coupling exactness (bit-exact, 0 tolerance)", bad == 0,
           bad == 0 ? "all 100 samples exact" : std::to_string(bad) + " samples violated");
}

}  // namespace

int main(int argc, char** argv) {
    int workers = default_workers();
    for (int i = 1; i < argc - 1; ++i) {
        if (std::strcmp(argv[i], "--workers") == 0) workers = std::atoi(argv[i + 1]);
    }
    std::printf("acceptance suite (workers=%d)\n", workers);
    criterion1(workers);
    criterion2(workers);
    criterion3(workers);
    criterion4(workers);
    criterion5(workers);
    criterion6(workers);
    criterion7(workers);
    std::printf("%s\n", g_all_pass ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED");
    return g_all_pass ? 0 : 1;
}
