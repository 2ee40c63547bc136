#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"

namespace ghostvar {

/// Eigen-decomposition of a symmetric matrix.
///
/// `eigenvalues` are sorted descending; column i of `eigenvectors` pairs with
/// eigenvalue i and has its largest-magnitude component positive.
struct SymEigen {
    Vector eigenvalues;
    Matrix eigenvectors;

    [[nodiscard]] Vector eigenvector(std::size_t i) const { return eigenvectors.column(i); }
};

inline bool is_symmetric(const Matrix& s, double rel_tol = 1e-10) {
    if (s.rows() != s.cols()) return false;
    const double scale = std::max(max_abs(s), std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(s(i, j) - s(j, i)) > rel_tol * scale) return false;
    return true;
}

/// Cyclic Jacobi rotations, at most `max_sweeps` sweeps.
inline SymEigen sym_eigen(const Matrix& s, int max_sweeps = 100) {
    require(s.rows() == s.cols(), ErrorCode::NotSymmetric, "matrix is not square");
    require(s.all_finite(), ErrorCode::NonFinite, "matrix has non-finite entries");
    require(is_symmetric(s), ErrorCode::NotSymmetric, "matrix is not symmetric within 1e-10");
    const std::size_t n = s.rows();

    Matrix a = s;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i) = 0.5 * (s(i, j) + s(j, i));
    Matrix v = Matrix::identity(n);

    const double scale = frobenius_norm(a);
    const double eps = std::numeric_limits<double>::epsilon();
    bool converged = n <= 1 || scale == 0.0;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= eps * scale) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                // Skip rotations that cannot change the diagonal in floating point.
                if (sweep > 3 && std::abs(apq) <= eps * 1e-2 * std::min(std::abs(app), std::abs(aqq))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) > 1e-12 * scale)
            fail(ErrorCode::NoConvergence, "Jacobi iteration did not converge in " + std::to_string(max_sweeps) +
                                               " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = order[i];
        out.eigenvalues[i] = a(src, src);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(v(k, src)) > std::abs(v(arg, src)) + 1e-14) arg = k;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, i) = sign * v(k, src);
    }
    return out;
}

}  // namespace ghostvar
