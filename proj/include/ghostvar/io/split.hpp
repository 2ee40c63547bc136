#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/linalg/random.hpp"

namespace ghostvar {

/// Row indices of a seeded train/test partition.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline SplitIndices split_indices(std::size_t n, std::size_t n_train, std::uint64_t seed) {
    require(n_train <= n, ErrorCode::TooFewRows, "training size exceeds row count");
    Rng rng(seed);
    const auto perm = random_permutation(n, rng);
    SplitIndices out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return out;
}

/// Shuffles rows with `seed` and puts round(fraction·n) of them in train.
/// Both parts need at least p+2 rows.
inline SplitSample split_rows(const Dataset& data, std::size_t n_train, std::uint64_t seed) {
    const std::size_t n = data.rows();
    const std::size_t need = data.cols() + 2;
    require(n_train <= n && n_train >= need && n - n_train >= need, ErrorCode::TooFewRows,
            "split leaves " + std::to_string(n_train) + " training and " +
                std::to_string(n >= n_train ? n - n_train : 0) + " test rows; each part needs at least " +
                std::to_string(need));
    const auto idx = split_indices(n, n_train, seed);
    return {data.select_rows(idx.train), data.select_rows(idx.test)};
}

inline SplitSample split(const Dataset& data, double fraction, std::uint64_t seed) {
    require(fraction > 0.0 && fraction < 1.0, ErrorCode::InvalidArgument, "split fraction must lie in (0,1)");
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.rows())));
    return split_rows(data, n_train, seed);
}

}  // namespace ghostvar
