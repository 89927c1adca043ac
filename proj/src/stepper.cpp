#include "swave/stepper.hpp"

#include <algorithm>
#include <cmath>

namespace swave::stepper {

namespace {

/// Picard iteration on the drift term: solves
///   (M + alpha*A) u = rhs_const + drift_weight * M F(u)
/// with the shifted factorization reused across iterations. Returns the
/// fixed point and the iteration count via `iterations`.
Field picard_solve(const Field& u_guess, const Field& rhs_const, double alpha,
                   double drift_weight, const problem::ProblemSpec& spec,
                   const fem1d::FemOperators& ops, const SchemeConfig& cfg, int& iterations) {
    Field u = u_guess;
    Field rhs(rhs_const.size());
    for (int k = 1; k <= cfg.picard_max; ++k) {
        const Field f = nodal_apply(spec.drift, u);
        const Field mf = ops.mass().multiply(f);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs_const[i] + drift_weight * mf[i];
        Field u_new = ops.solve_shifted(alpha, rhs);

        Field diff = u_new;
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= u[i];
        const double change = fem1d::norm_l2(diff, ops);
        const double scale = std::max(fem1d::norm_l2(u_new, ops), 1e-300);
        u = std::move(u_new);
        if (!std::isfinite(change) || !std::isfinite(scale)) {
            throw PicardDivergedError("Picard iteration produced a non-finite iterate");
        }
        if (change <= cfg.picard_tol * scale) {
            iterations = k;
            return u;
        }
    }
    throw PicardDivergedError("Picard iteration did not converge in " +
                              std::to_string(cfg.picard_max) +
                              " iterations (time step too large for the drift's Lipschitz bound?)");
}

void check_state(const TrajectoryState& state, const fem1d::FemOperators& ops) {
    const std::size_t n = static_cast<std::size_t>(ops.mesh().interior_nodes());
    if (state.u.size() != n || state.v.size() != n) {
        throw std::invalid_argument("stepper: state dimension does not match the mesh");
    }
}

}  // namespace

void validate(const SchemeConfig& cfg) {
    if (!(cfg.theta == 0.0 || cfg.theta == 0.5)) {
        throw std::invalid_argument("scheme: theta must be exactly 0 or 0.5");
    }
    if (!(cfg.picard_tol > 0.0)) throw std::invalid_argument("scheme: picard_tol must be > 0");
    if (cfg.picard_max < 1) throw std::invalid_argument("scheme: picard_max must be >= 1");
    noise::validate(cfg.grid);
}

Field nodal_apply(const std::function<double(double)>& f, const Field& u) {
    Field out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = f(u[i]);
    return out;
}

std::pair<Field, Field> initial_fields(const problem::ProblemSpec& spec,
                                       const fem1d::FemOperators& ops) {
    return {fem1d::l2_project(spec.u0, ops.mesh(), ops),
            fem1d::l2_project(spec.v0, ops.mesh(), ops)};
}

namespace {

TrajectoryState first_step_from(const Field& u0, const Field& v0,
                                const problem::ProblemSpec& spec,
                                const fem1d::FemOperators& ops, const SchemeConfig& cfg,
                                double bar0, double hat0) {
    const double tau = cfg.grid.tau();
    const Field s0 = nodal_apply(spec.diffusion, u0);
    const Field f0 = nodal_apply(spec.drift, u0);
    const Field lap0 = fem1d::apply_discrete_laplacian(ops, u0);

    TrajectoryState state;
    state.n = 1;
    state.u.resize(u0.size());
    state.v.resize(u0.size());
    for (std::size_t i = 0; i < u0.size(); ++i) {
        state.u[i] = u0[i] + tau * v0[i] + 0.5 * tau * tau * (lap0[i] + f0[i]) -
                     s0[i] * hat0 + tau * s0[i] * bar0;
        state.v[i] = (state.u[i] - u0[i] + s0[i] * hat0) / tau;
    }
    if (cfg.theta == 0.5) state.u_prev = u0;
    require_finite(state.u, "first step (u)");
    require_finite(state.v, "first step (v)");
    return state;
}

}  // namespace

TrajectoryState initial_step(const problem::ProblemSpec& spec, const fem1d::FemOperators& ops,
                             const SchemeConfig& cfg, const noise::IncrementLevel& incr) {
    validate(cfg);
    if (incr.bar.empty() || incr.hat.empty()) {
        throw std::invalid_argument("initial_step: increment level does not cover step 0");
    }
    auto [u0, v0] = initial_fields(spec, ops);
    return first_step_from(u0, v0, spec, ops, cfg, incr.bar[0], incr.hat[0]);
}

TrajectoryState step_theta0(const TrajectoryState& state, const problem::ProblemSpec& spec,
                            const fem1d::FemOperators& ops, const SchemeConfig& cfg,
                            double bar_n, double hat_n) {
    check_state(state, ops);
    const double tau = cfg.grid.tau();
    const double alpha = tau * tau;

    const Field s = nodal_apply(spec.diffusion, state.u);
    Field base(state.u.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        base[i] = state.u[i] + tau * state.v[i] + s[i] * (tau * bar_n - hat_n);
    }
    const Field rhs_const = ops.mass().multiply(base);

    TrajectoryState next;
    next.n = state.n + 1;
    next.u = picard_solve(state.u, rhs_const, alpha, tau * tau, spec, ops, cfg,
                          next.picard_iterations);
    next.v.resize(state.u.size());
    for (std::size_t i = 0; i < next.v.size(); ++i) {
        next.v[i] = (next.u[i] - state.u[i] + s[i] * hat_n) / tau;
    }
    require_finite(next.u, "theta=0 step (u)");
    require_finite(next.v, "theta=0 step (v)");
    return next;
}

TrajectoryState step_theta_half(const TrajectoryState& state, const problem::ProblemSpec& spec,
                                const fem1d::FemOperators& ops, const SchemeConfig& cfg,
                                double bar_n, double hat_n) {
    check_state(state, ops);
    if (state.u_prev.size() != state.u.size()) {
        throw MissingLagError("theta=1/2 step requires the lag field u^{n-1}");
    }
    const double tau = cfg.grid.tau();
    const double alpha = 0.5 * tau * tau;

    const Field s = nodal_apply(spec.diffusion, state.u);
    const Field sprime = nodal_apply(spec.diffusion_derivative, state.u);
    Field base(state.u.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        // The Gateaux derivative of the pointwise diffusion acts as
        // multiplication by sigma'(u^n) v^n.
        const double d = sprime[i] * state.v[i];
        base[i] = state.u[i] + tau * state.v[i] + s[i] * (tau * bar_n - hat_n) +
                  tau * d * hat_n;
    }
    Field rhs_const = ops.mass().multiply(base);
    const Field a_lag = ops.stiffness().multiply(state.u_prev);
    const Field f_lag = ops.mass().multiply(nodal_apply(spec.drift, state.u_prev));
    for (std::size_t i = 0; i < rhs_const.size(); ++i) {
        rhs_const[i] += -alpha * a_lag[i] + alpha * f_lag[i];
    }

    TrajectoryState next;
    next.n = state.n + 1;
    next.u = picard_solve(state.u, rhs_const, alpha, alpha, spec, ops, cfg,
                          next.picard_iterations);
    next.v.resize(state.u.size());
    for (std::size_t i = 0; i < next.v.size(); ++i) {
        next.v[i] = (next.u[i] - state.u[i] + s[i] * hat_n) / tau;
    }
    next.u_prev = state.u;
    require_finite(next.u, "theta=1/2 step (u)");
    require_finite(next.v, "theta=1/2 step (v)");
    return next;
}

double discrete_energy(const TrajectoryState& state, const fem1d::FemOperators& ops) {
    return ops.mass().quadratic_form(state.v) + ops.stiffness().quadratic_form(state.u);
}

TrajectoryResult run_trajectory(const problem::ProblemSpec& spec, const fem1d::FemOperators& ops,
                                const SchemeConfig& cfg, const noise::IncrementLevel& incr,
                                std::span<const std::int64_t> record) {
    validate(cfg);
    if (!(incr.grid == cfg.grid)) {
        throw std::invalid_argument("run_trajectory: increment grid does not match the scheme grid");
    }
    const std::int64_t steps = cfg.grid.steps;
    if (static_cast<std::int64_t>(incr.bar.size()) != steps ||
        static_cast<std::int64_t>(incr.hat.size()) != steps) {
        throw std::invalid_argument("run_trajectory: increment arrays have the wrong length");
    }

    std::vector<bool> want(static_cast<std::size_t>(steps) + 1, false);
    for (std::int64_t idx : record) {
        if (idx < 0 || idx > steps) {
            throw std::invalid_argument("run_trajectory: record index " + std::to_string(idx) +
                                        " out of range");
        }
        want[static_cast<std::size_t>(idx)] = true;
    }

    TrajectoryResult result;
    result.energy.resize(static_cast<std::size_t>(steps) + 1);

    auto [u0, v0] = initial_fields(spec, ops);
    require_finite(u0, "initial data (u0)");
    require_finite(v0, "initial data (v0)");
    {
        TrajectoryState s0;
        s0.u = u0;
        s0.v = v0;
        result.energy[0] = discrete_energy(s0, ops);
        if (want[0]) result.recorded.emplace(0, std::make_pair(u0, v0));
    }

    TrajectoryState state;
    try {
        state = first_step_from(u0, v0, spec, ops, cfg, incr.bar[0], incr.hat[0]);
    } catch (const std::exception& e) {
        throw TrajectoryError(0, e.what());
    }
    result.energy[1] = discrete_energy(state, ops);
    if (want[1]) result.recorded.emplace(1, std::make_pair(state.u, state.v));

    for (std::int64_t n = 1; n < steps; ++n) {
        try {
            const double bar = incr.bar[static_cast<std::size_t>(n)];
            const double hat = incr.hat[static_cast<std::size_t>(n)];
            state = cfg.theta == 0.0 ? step_theta0(state, spec, ops, cfg, bar, hat)
                                     : step_theta_half(state, spec, ops, cfg, bar, hat);
        } catch (const std::exception& e) {
            throw TrajectoryError(n, e.what());
        }
        result.max_picard_iterations =
            std::max(result.max_picard_iterations, state.picard_iterations);
        result.energy[static_cast<std::size_t>(n) + 1] = discrete_energy(state, ops);
        if (want[static_cast<std::size_t>(n) + 1]) {
            result.recorded.emplace(n + 1, std::make_pair(state.u, state.v));
        }
    }
    return result;
}

}  // namespace swave::stepper
