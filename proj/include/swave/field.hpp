#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace swave {

/// Nodal coefficients of a P1 function at the interior nodes of a mesh.
using Field = std::vector<double>;

inline bool all_finite(const Field& u) {
    for (double x : u) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

/// Hard error on NaN/Inf; a non-finite field means the solve diverged.
inline void require_finite(const Field& u, const std::string& what) {
    if (!all_finite(u)) {
        throw std::runtime_error(what + ": field contains NaN or Inf");
    }
}

inline void require_same_size(const Field& a, const Field& b, const char* what) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": field dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

inline double dot(const Field& a, const Field& b) {
    require_same_size(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace swave
