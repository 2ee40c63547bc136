#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"

namespace ghostvar {

/// Householder QR with column pivoting, A·P = Q·R.
///
/// Construction rejects rank-deficient input: a pivot |R_kk| below
/// `rank_tolerance` times the leading pivot |R_00| raises RankDeficient.
class PivotedQR {
public:
    static constexpr double kRankTolerance = 1e-10;

    explicit PivotedQR(const Matrix& a, double rank_tolerance = kRankTolerance)
        : n_(a.rows()), k_(a.cols()), perm_(a.cols()) {
        require(n_ >= k_, ErrorCode::DimensionMismatch, "QR needs at least as many rows as columns");
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        cols_.resize(k_);
        for (std::size_t j = 0; j < k_; ++j) cols_[j] = a.column(j);
        betas_.assign(k_, 0.0);
        r_ = Matrix(k_, k_);

        for (std::size_t s = 0; s < k_; ++s) {
            std::size_t best = s;
            double best_norm = -1.0;
            for (std::size_t j = s; j < k_; ++j) {
                double nrm = 0.0;
                for (std::size_t i = s; i < n_; ++i) nrm += cols_[j][i] * cols_[j][i];
                if (nrm > best_norm) {
                    best_norm = nrm;
                    best = j;
                }
            }
            if (best != s) {
                std::swap(cols_[s], cols_[best]);
                std::swap(perm_[s], perm_[best]);
                for (std::size_t i = 0; i < s; ++i) std::swap(r_(i, s), r_(i, best));
            }

            Vector& v = cols_[s];
            const double alpha = std::sqrt(best_norm);
            if (s == 0) lead_pivot_ = alpha;
            if (!(alpha > rank_tolerance * lead_pivot_) || lead_pivot_ == 0.0)
                fail(ErrorCode::RankDeficient,
                     "column " + std::to_string(perm_[s]) + " is collinear with the others");

            const double diag = v[s] >= 0.0 ? -alpha : alpha;
            v[s] -= diag;
            double vnorm2 = 0.0;
            for (std::size_t i = s; i < n_; ++i) vnorm2 += v[i] * v[i];
            betas_[s] = vnorm2 > 0.0 ? 2.0 / vnorm2 : 0.0;
            r_(s, s) = diag;

            for (std::size_t j = s + 1; j < k_; ++j) {
                Vector& c = cols_[j];
                double d = 0.0;
                for (std::size_t i = s; i < n_; ++i) d += v[i] * c[i];
                d *= betas_[s];
                for (std::size_t i = s; i < n_; ++i) c[i] -= d * v[i];
                r_(s, j) = c[s];
            }
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return n_; }
    [[nodiscard]] std::size_t cols() const noexcept { return k_; }
    [[nodiscard]] const Matrix& r() const noexcept { return r_; }
    [[nodiscard]] const std::vector<std::size_t>& permutation() const noexcept { return perm_; }

    /// Qᵀ y.
    [[nodiscard]] Vector apply_qt(std::span<const double> y) const {
        require(y.size() == n_, ErrorCode::DimensionMismatch, "QR right-hand side length mismatch");
        Vector w(y.begin(), y.end());
        for (std::size_t s = 0; s < k_; ++s) {
            const Vector& v = cols_[s];
            double d = 0.0;
            for (std::size_t i = s; i < n_; ++i) d += v[i] * w[i];
            d *= betas_[s];
            for (std::size_t i = s; i < n_; ++i) w[i] -= d * v[i];
        }
        return w;
    }

    /// Least-squares solution of A x ≈ y.
    [[nodiscard]] Vector solve(std::span<const double> y) const {
        const Vector qty = apply_qt(y);
        Vector z(k_);
        for (std::size_t ii = k_; ii-- > 0;) {
            double s = qty[ii];
            for (std::size_t j = ii + 1; j < k_; ++j) s -= r_(ii, j) * z[j];
            z[ii] = s / r_(ii, ii);
        }
        Vector x(k_);
        for (std::size_t j = 0; j < k_; ++j) x[perm_[j]] = z[j];
        return x;
    }

    /// (AᵀA)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ.
    [[nodiscard]] Matrix inverse_gram() const {
        Matrix rinv(k_, k_);
        for (std::size_t j = 0; j < k_; ++j) {
            rinv(j, j) = 1.0 / r_(j, j);
            for (std::size_t ii = j; ii-- > 0;) {
                double s = 0.0;
                for (std::size_t m = ii + 1; m <= j; ++m) s += r_(ii, m) * rinv(m, j);
                rinv(ii, j) = -s / r_(ii, ii);
            }
        }
        Matrix out(k_, k_);
        for (std::size_t a = 0; a < k_; ++a)
            for (std::size_t b = a; b < k_; ++b) {
                double s = 0.0;
                for (std::size_t m = b; m < k_; ++m) s += rinv(a, m) * rinv(b, m);
                out(perm_[a], perm_[b]) = s;
                out(perm_[b], perm_[a]) = s;
            }
        return out;
    }

private:
    std::size_t n_;
    std::size_t k_;
    std::vector<std::size_t> perm_;
    std::vector<Vector> cols_;  // Householder vectors in rows s..n-1 of column s
    Vector betas_;
    Matrix r_;
    double lead_pivot_ = 0.0;
};

}  // namespace ghostvar
