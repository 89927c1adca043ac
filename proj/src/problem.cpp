#include "swave/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace swave::problem {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

ProblemSpec base_spec(std::string name) {
    ProblemSpec spec;
    spec.name = std::move(name);
    spec.a = -1.0;
    spec.b = 1.0;
    spec.horizon = 1.0;
    spec.u0 = [](double x) { return std::sin(kTwoPi * x); };
    spec.v0 = [](double) { return 0.0; };
    return spec;
}

}  // namespace

ProblemSpec builtin(std::string_view name) {
    if (name == "test1") {
        ProblemSpec spec = base_spec("test1");
        spec.drift = [](double u) { return -u; };
        spec.diffusion = [](double u) { return u; };
        spec.diffusion_derivative = [](double) { return 1.0; };
        spec.lipschitz_drift = 1.0;
        spec.lipschitz_diffusion = 1.0;
        return spec;
    }
    if (name == "test2") {
        ProblemSpec spec = base_spec("test2");
        spec.drift = [](double u) { return std::cos(u); };
        spec.diffusion = [](double u) { return std::sin(u); };
        spec.diffusion_derivative = [](double u) { return std::cos(u); };
        spec.lipschitz_drift = 1.0;
        spec.lipschitz_diffusion = 1.0;
        return spec;
    }
    if (name == "deterministic") {
        ProblemSpec spec = base_spec("deterministic");
        spec.drift = [](double) { return 0.0; };
        spec.diffusion = [](double) { return 0.0; };
        spec.diffusion_derivative = [](double) { return 0.0; };
        spec.lipschitz_drift = 0.0;
        spec.lipschitz_diffusion = 0.0;
        spec.zero_noise = true;
        return spec;
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) +
                                "' (expected test1, test2, deterministic)");
}

}  // namespace swave::problem
