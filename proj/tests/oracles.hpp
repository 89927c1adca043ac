// Test-side oracles, independent of the library's solver paths: quadrature,
// hand-rolled P1 stencils and tridiagonal solve, power iteration, the exact
// deterministic wave solution, and direct residual evaluation of the two
// discrete scheme equations.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "swave/field.hpp"
#include "swave/problem.hpp"
#include "swave/stepper.hpp"

namespace oracles {

using swave::Field;

inline constexpr double kPi = 3.14159265358979323846;

/// Composite 5-point Gauss-Legendre quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels) {
    static const double node[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
    static const double weight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < 5; ++k) total += weight[k] * f(mid + 0.5 * h * node[k]);
    }
    return total * 0.5 * h;
}

/// P1 mass stencil on a uniform mesh, applied directly from the analytic
/// element integrals (2h/3 diagonal, h/6 off-diagonal).
inline Field mass_apply(double h, const Field& x) {
    const std::size_t n = x.size();
    Field y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = (2.0 * h / 3.0) * x[i];
        if (i > 0) s += (h / 6.0) * x[i - 1];
        if (i + 1 < n) s += (h / 6.0) * x[i + 1];
        y[i] = s;
    }
    return y;
}

/// P1 stiffness stencil (2/h diagonal, -1/h off-diagonal).
inline Field stiffness_apply(double h, const Field& x) {
    const std::size_t n = x.size();
    Field y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = (2.0 / h) * x[i];
        if (i > 0) s -= x[i - 1] / h;
        if (i + 1 < n) s -= x[i + 1] / h;
        y[i] = s;
    }
    return y;
}

/// Symmetric tridiagonal solve by plain Gaussian elimination (local copy so
/// the oracle does not share the library's factorization path).
inline Field tridiag_solve(std::vector<double> diag, std::vector<double> off, Field rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

inline Field mass_solve(double h, std::size_t n, const Field& rhs) {
    return tridiag_solve(std::vector<double>(n, 2.0 * h / 3.0),
                         std::vector<double>(n - 1, h / 6.0), rhs);
}

/// Largest generalized eigenvalue of A x = lambda M x by power iteration.
inline double max_generalized_eigenvalue(double h, std::size_t n, int iterations = 500) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Field x(n);
    for (double& v : x) v = unif(rng);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Field y = mass_solve(h, n, stiffness_apply(h, x));
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : y) v /= norm;
        x = std::move(y);
        const Field ax = stiffness_apply(h, x);
        const Field mx = mass_apply(h, x);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += x[i] * ax[i];
            den += x[i] * mx[i];
        }
        lambda = num / den;
    }
    return lambda;
}

/// L2 error between the P1 interpolant of a coefficient vector (zero at the
/// boundary) and a smooth function, by per-element quadrature.
inline double l2_error_vs_function(const Field& u, const std::function<double(double)>& f,
                                   double a, double b, int m) {
    const double h = (b - a) / m;
    double total = 0.0;
    for (int e = 0; e < m; ++e) {
        const double xl = a + e * h;
        const double ul = e == 0 ? 0.0 : u[e - 1];
        const double ur = e == m - 1 ? 0.0 : u[e];
        total += integrate(
            [&](double x) {
                const double t = (x - xl) / h;
                const double uh = ul * (1.0 - t) + ur * t;
                const double d = uh - f(x);
                return d * d;
            },
            xl, xl + h, 4);
    }
    return std::sqrt(total);
}

/// Closed-form solution of the noise-free wave problem with u0 = sin(pi x),
/// v0 = 0 on (-1, 1).
inline double exact_wave_u(double t, double x) { return std::sin(kPi * x) * std::cos(kPi * t); }
inline double exact_wave_v(double t, double x) {
    return -kPi * std::sin(kPi * x) * std::sin(kPi * t);
}

inline double euclid(const Field& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Relative residuals of the two discrete equations for one accepted step,
/// evaluated directly from the stencils (independent of the Picard path).
/// Works for both schemes; pass the lag field only when theta = 1/2.
struct StepResiduals {
    double kinematic;  // displacement/velocity relation
    double momentum;   // velocity update equation
};

inline StepResiduals scheme_residuals(const swave::stepper::TrajectoryState& before,
                                      const swave::stepper::TrajectoryState& after,
                                      const swave::problem::ProblemSpec& spec, double h,
                                      double tau, double theta, double bar_n, double hat_n) {
    using swave::stepper::nodal_apply;
    const std::size_t n = before.u.size();
    const Field s = nodal_apply(spec.diffusion, before.u);

    Field r1(n);
    for (std::size_t i = 0; i < n; ++i) {
        r1[i] = after.u[i] - before.u[i] - tau * after.v[i] + s[i] * hat_n;
    }
    const Field mr1 = mass_apply(h, r1);
    double scale1 = std::max({euclid(mass_apply(h, after.u)), euclid(mass_apply(h, before.u)),
                              tau * euclid(mass_apply(h, after.v))});

    // momentum equation: M(v+ - v) + tau*A*u_theta - tau*M*F_theta
    //                    - bar*M*s - 2*theta*hat*M*(sigma'(u) v) = 0
    Field u_theta(n), f_theta(n);
    const Field f_next = nodal_apply(spec.drift, after.u);
    if (theta == 0.0) {
        u_theta = after.u;
        f_theta = f_next;
    } else {
        const Field f_prev = nodal_apply(spec.drift, before.u_prev);
        for (std::size_t i = 0; i < n; ++i) {
            u_theta[i] = 0.5 * (after.u[i] + before.u_prev[i]);
            f_theta[i] = 0.5 * (f_next[i] + f_prev[i]);
        }
    }
    Field dv(n);
    for (std::size_t i = 0; i < n; ++i) dv[i] = after.v[i] - before.v[i];
    const Field m_dv = mass_apply(h, dv);
    const Field a_ut = stiffness_apply(h, u_theta);
    const Field m_ft = mass_apply(h, f_theta);
    const Field m_s = mass_apply(h, s);
    Field m_d(n, 0.0);
    if (theta != 0.0) {
        Field d(n);
        const Field sp = nodal_apply(spec.diffusion_derivative, before.u);
        for (std::size_t i = 0; i < n; ++i) d[i] = sp[i] * before.v[i];
        m_d = mass_apply(h, d);
    }
    Field r2(n);
    for (std::size_t i = 0; i < n; ++i) {
        r2[i] = m_dv[i] + tau * a_ut[i] - tau * m_ft[i] - bar_n * m_s[i] -
                2.0 * theta * hat_n * m_d[i];
    }
    double scale2 = std::max({euclid(m_dv), tau * euclid(a_ut), tau * euclid(m_ft),
                              std::abs(bar_n) * euclid(m_s),
                              std::abs(2.0 * theta * hat_n) * euclid(m_d)});

    StepResiduals res;
    res.kinematic = scale1 > 0.0 ? euclid(mr1) / scale1 : euclid(mr1);
    res.momentum = scale2 > 0.0 ? euclid(r2) / scale2 : euclid(r2);
    return res;
}

/// Smooth-ish random field: a few random Fourier modes sampled at the nodes.
inline Field random_field(std::mt19937_64& rng, double a, double b, int m, double amplitude) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int modes = 4;
    std::vector<double> coef(modes);
    for (double& c : coef) c = amplitude * unif(rng);
    Field u(static_cast<std::size_t>(m - 1));
    const double h = (b - a) / m;
    for (int i = 1; i < m; ++i) {
        const double x = a + i * h;
        double s = 0.0;
        for (int k = 0; k < modes; ++k) s += coef[k] * std::sin((k + 1) * kPi * (x - a) / (b - a));
        u[static_cast<std::size_t>(i - 1)] = s;
    }
    return u;
}

}  // namespace oracles
