#include "swave/fem1d.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace swave::fem1d {

void validate(const SpatialMesh& mesh) {
    if (!(mesh.a < mesh.b)) {
        throw std::invalid_argument("mesh: require a < b");
    }
    if (mesh.m < 2) {
        throw std::invalid_argument("mesh: require m >= 2, got " + std::to_string(mesh.m));
    }
}

void SymTridiag::multiply(const Field& x, Field& y) const {
    const int n = size();
    if (static_cast<int>(x.size()) != n) {
        throw std::invalid_argument("SymTridiag::multiply: dimension mismatch");
    }
    y.resize(x.size());
    for (int i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += off[i - 1] * x[i - 1];
        if (i + 1 < n) s += off[i] * x[i + 1];
        y[i] = s;
    }
}

Field SymTridiag::multiply(const Field& x) const {
    Field y;
    multiply(x, y);
    return y;
}

double SymTridiag::quadratic_form(const Field& x) const {
    const int n = size();
    if (static_cast<int>(x.size()) != n) {
        throw std::invalid_argument("SymTridiag::quadratic_form: dimension mismatch");
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += diag[i] * x[i] * x[i];
    for (int i = 0; i + 1 < n; ++i) s += 2.0 * off[i] * x[i] * x[i + 1];
    return s;
}

TridiagFactor factorize(const SymTridiag& s) {
    const int n = s.size();
    TridiagFactor f;
    f.d.resize(n);
    f.l.assign(n > 0 ? n - 1 : 0, 0.0);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        double di = s.diag[i];
        if (i > 0) di -= f.l[i - 1] * f.l[i - 1] * prev;
        if (!(di > 0.0)) {
            throw std::runtime_error("factorize: matrix is not positive definite");
        }
        f.d[i] = di;
        if (i + 1 < n) f.l[i] = s.off[i] / di;
        prev = di;
    }
    return f;
}

void TridiagFactor::solve_in_place(Field& x) const {
    const int n = static_cast<int>(d.size());
    if (static_cast<int>(x.size()) != n) {
        throw std::invalid_argument("TridiagFactor::solve: dimension mismatch");
    }
    for (int i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
    for (int i = 0; i < n; ++i) x[i] /= d[i];
    for (int i = n - 2; i >= 0; --i) x[i] -= l[i] * x[i + 1];
}

Field TridiagFactor::solve(const Field& rhs) const {
    Field x = rhs;
    solve_in_place(x);
    return x;
}

FemOperators::FemOperators(const SpatialMesh& mesh) : mesh_(mesh) {
    validate(mesh);
    const int n = mesh.interior_nodes();
    const double h = mesh.h();
    mass_.diag.assign(n, 2.0 * h / 3.0);
    mass_.off.assign(n > 0 ? n - 1 : 0, h / 6.0);
    stiffness_.diag.assign(n, 2.0 / h);
    stiffness_.off.assign(n > 0 ? n - 1 : 0, -1.0 / h);
}

FemOperators assemble_operators(const SpatialMesh& mesh) { return FemOperators(mesh); }

const TridiagFactor& FemOperators::factor_for(double alpha) const {
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("solve_shifted: require alpha >= 0");
    }
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(alpha);
    if (it == cache_.end()) {
        SymTridiag shifted;
        const int n = mass_.size();
        shifted.diag.resize(n);
        shifted.off.resize(n > 0 ? n - 1 : 0);
        for (int i = 0; i < n; ++i) shifted.diag[i] = mass_.diag[i] + alpha * stiffness_.diag[i];
        for (int i = 0; i + 1 < n; ++i) shifted.off[i] = mass_.off[i] + alpha * stiffness_.off[i];
        auto factor = std::make_unique<const TridiagFactor>(factorize(shifted));
        it = cache_.emplace(alpha, std::move(factor)).first;
        factorizations_.fetch_add(1);
    }
    return *it->second;
}

Field FemOperators::solve_shifted(double alpha, const Field& rhs) const {
    if (static_cast<int>(rhs.size()) != mass_.size()) {
        throw std::invalid_argument("solve_shifted: dimension mismatch");
    }
    return factor_for(alpha).solve(rhs);
}

Field l2_project(const std::function<double(double)>& f, const SpatialMesh& mesh,
                 const FemOperators& ops) {
    validate(mesh);
    const int n = mesh.interior_nodes();
    const double h = mesh.h();
    Field load(n, 0.0);

    // 3-point Gauss-Legendre on the reference element [0,1].
    static const double q[3] = {0.5 * (1.0 - std::sqrt(3.0 / 5.0)), 0.5,
                                0.5 * (1.0 + std::sqrt(3.0 / 5.0))};
    static const double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

    for (int e = 0; e < mesh.m; ++e) {
        const double xl = mesh.a + e * h;
        for (int k = 0; k < 3; ++k) {
            const double x = xl + q[k] * h;
            const double fx = f(x);
            if (!std::isfinite(fx)) {
                throw std::runtime_error("l2_project: function not finite at x = " +
                                         std::to_string(x));
            }
            const double contrib = w[k] * h * fx;
            // phi_{e} rises on this element, phi_{e+1}... interior indices are
            // 1..m-1; local left node index e, right node index e+1.
            if (e >= 1) load[e - 1] += contrib * (1.0 - q[k]);
            if (e + 1 <= n) load[e] += contrib * q[k];
        }
    }
    return ops.solve_shifted(0.0, load);
}

double norm_l2(const Field& u, const FemOperators& ops) {
    return std::sqrt(std::max(0.0, ops.mass().quadratic_form(u)));
}

double norm_h1_semi(const Field& u, const FemOperators& ops) {
    return std::sqrt(std::max(0.0, ops.stiffness().quadratic_form(u)));
}

Field apply_discrete_laplacian(const FemOperators& ops, const Field& u) {
    Field au = ops.stiffness().multiply(u);
    Field x = ops.solve_shifted(0.0, au);
    for (double& v : x) v = -v;
    return x;
}

}  // namespace swave::fem1d
