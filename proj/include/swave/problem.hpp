#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace swave::problem {

/// The continuous problem: domain, horizon, drift F, diffusion sigma and its
/// derivative (all acting pointwise on the solution value), initial fields,
/// and the declared Lipschitz constants used by the implicit solver.
struct ProblemSpec {
    std::string name;
    double a = -1.0;
    double b = 1.0;
    double horizon = 1.0;
    std::function<double(double)> drift;                 // F(u)
    std::function<double(double)> diffusion;             // sigma(u)
    std::function<double(double)> diffusion_derivative;  // sigma'(u)
    std::function<double(double)> u0;
    std::function<double(double)> v0;
    double lipschitz_drift = 0.0;
    double lipschitz_diffusion = 0.0;
    /// True when sigma is identically zero, allowing increment generation to
    /// be skipped entirely (the results are identical either way).
    bool zero_noise = false;
};

/// Named problems: "test1" (F=-u, sigma=u), "test2" (F=cos u, sigma=sin u),
/// "deterministic" (F=0, sigma=0). All on (-1,1), T=1, u0=sin(2*pi*x), v0=0.
/// Throws std::invalid_argument on an unknown name.
ProblemSpec builtin(std::string_view name);

}  // namespace swave::problem
