#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ghostvar/error.hpp"
#include "ghostvar/linalg/eigen.hpp"
#include "ghostvar/linalg/matrix.hpp"

namespace ghostvar {

/// xoshiro256** seeded through splitmix64. Uses only integer arithmetic and
/// IEEE sqrt/log, so a seed gives the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound), unbiased by rejection.
    std::uint64_t below(std::uint64_t bound) {
        require(bound > 0, ErrorCode::InvalidArgument, "empty integer range");
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % bound;
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Independent child stream; the parent advances by one draw.
    Rng fork() { return Rng(next_u64()); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fisher–Yates permutation of 0..n-1.
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

/// Lower factor L with P·S·Pᵀ = L·Lᵀ from a diagonally pivoted Cholesky.
/// Columns past the numerical rank are zero, so PSD matrices are accepted.
struct PivotedCholesky {
    Matrix lower;                     ///< in original variable order: S ≈ lower·lowerᵀ
    std::size_t rank = 0;
};

inline PivotedCholesky pivoted_cholesky(const Matrix& s, double tol = 1e-12) {
    require(is_symmetric(s), ErrorCode::NotPositiveSemiDefinite, "covariance is not symmetric");
    const std::size_t n = s.rows();
    Matrix a = s;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Matrix l(n, n);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, s(i, i));
    const double threshold = tol * std::max(max_diag, 1.0);

    std::size_t rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (a(perm[i], perm[i]) > a(perm[piv], perm[piv])) piv = i;
        std::swap(perm[k], perm[piv]);
        for (std::size_t c = 0; c < k; ++c) std::swap(l(k, c), l(piv, c));
        const double d = a(perm[k], perm[k]);
        if (d < -threshold)
            fail(ErrorCode::NotPositiveSemiDefinite, "covariance has a negative pivot " + std::to_string(d));
        if (d <= threshold) {
            for (std::size_t i = k; i < n; ++i)
                if (a(perm[i], perm[i]) < -threshold)
                    fail(ErrorCode::NotPositiveSemiDefinite, "covariance has a negative pivot");
            break;
        }
        ++rank;
        const double root = std::sqrt(d);
        l(k, k) = root;
        for (std::size_t i = k + 1; i < n; ++i) l(i, k) = a(perm[i], perm[k]) / root;
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j <= i; ++j) {
                const double upd = a(perm[i], perm[j]) - l(i, k) * l(j, k);
                a(perm[i], perm[j]) = upd;
                a(perm[j], perm[i]) = upd;
            }
    }
    PivotedCholesky out;
    out.rank = rank;
    out.lower = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < n; ++c) out.lower(perm[i], c) = l(i, c);
    return out;
}

/// n i.i.d. rows from N(mean, cov).
inline Matrix mvn_sample(std::span<const double> mean, const Matrix& cov, std::size_t n, Rng& rng) {
    require(cov.rows() == mean.size() && cov.cols() == mean.size(), ErrorCode::DimensionMismatch,
            "mean and covariance dimensions differ");
    const std::size_t p = mean.size();
    const PivotedCholesky chol = pivoted_cholesky(cov);
    Matrix out(n, p);
    Vector z(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : z) v = rng.normal();
        auto row = out.row(i);
        for (std::size_t a = 0; a < p; ++a) {
            double s = mean[a];
            for (std::size_t c = 0; c < chol.rank; ++c) s += chol.lower(a, c) * z[c];
            row[a] = s;
        }
    }
    return out;
}

}  // namespace ghostvar
