#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "swave/field.hpp"

namespace swave::fem1d {

/// Uniform partition of (a, b) into m subintervals, homogeneous Dirichlet
/// boundary. Unknowns live at the m-1 interior nodes.
struct SpatialMesh {
    double a = -1.0;
    double b = 1.0;
    int m = 2;

    double h() const { return (b - a) / m; }
    int interior_nodes() const { return m - 1; }
    /// Interior node i, i = 1..m-1.
    double node(int i) const { return a + i * h(); }
};

void validate(const SpatialMesh& mesh);

/// Symmetric tridiagonal matrix stored by diagonals.
struct SymTridiag {
    std::vector<double> diag;  // size n
    std::vector<double> off;   // size n-1

    int size() const { return static_cast<int>(diag.size()); }
    void multiply(const Field& x, Field& y) const;
    Field multiply(const Field& x) const;
    /// x^T S x
    double quadratic_form(const Field& x) const;
};

/// LDL^T factorization of a SPD tridiagonal matrix (Thomas algorithm).
struct TridiagFactor {
    std::vector<double> d;  // pivots
    std::vector<double> l;  // subdiagonal multipliers

    void solve_in_place(Field& x) const;
    Field solve(const Field& rhs) const;
};

/// Throws std::runtime_error if a pivot is not strictly positive.
TridiagFactor factorize(const SymTridiag& s);

/// Mass and stiffness matrices of the P1 space on a uniform mesh plus a
/// cache of LDL^T factorizations of (M + alpha*A), keyed by alpha.
/// Immutable after assembly except the cache (populate-once, shared readers).
class FemOperators {
public:
    explicit FemOperators(const SpatialMesh& mesh);

    FemOperators(const FemOperators&) = delete;
    FemOperators& operator=(const FemOperators&) = delete;

    const SpatialMesh& mesh() const { return mesh_; }
    const SymTridiag& mass() const { return mass_; }
    const SymTridiag& stiffness() const { return stiffness_; }

    /// Solve (M + alpha*A) x = rhs, rhs in load (dual) form. alpha >= 0.
    Field solve_shifted(double alpha, const Field& rhs) const;

    /// Number of factorizations computed so far (cache misses).
    std::size_t factorization_count() const { return factorizations_.load(); }

private:
    const TridiagFactor& factor_for(double alpha) const;

    SpatialMesh mesh_;
    SymTridiag mass_;
    SymTridiag stiffness_;

    mutable std::mutex cache_mutex_;
    mutable std::map<double, std::unique_ptr<const TridiagFactor>> cache_;
    mutable std::atomic<std::size_t> factorizations_{0};
};

FemOperators assemble_operators(const SpatialMesh& mesh);

/// L^2-projection onto the P1 space: solves M c = (f, phi_i) with the load
/// computed by 3-point Gauss quadrature per element.
Field l2_project(const std::function<double(double)>& f, const SpatialMesh& mesh,
                 const FemOperators& ops);

/// sqrt(u^T M u)
double norm_l2(const Field& u, const FemOperators& ops);
/// sqrt(u^T A u)
double norm_h1_semi(const Field& u, const FemOperators& ops);

/// Discrete Laplacian: -M^{-1} A u.
Field apply_discrete_laplacian(const FemOperators& ops, const Field& u);

}  // namespace swave::fem1d
