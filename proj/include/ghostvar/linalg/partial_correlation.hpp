#pragma once

#include <cstddef>
#include <vector>

#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/ols.hpp"

namespace ghostvar {

/// Correlation between columns j and k after removing, by OLS with intercept,
/// the linear effect of every other column.
inline double partial_correlation_direct(const Matrix& x, std::size_t j, std::size_t k) {
    require(x.cols() >= 3, ErrorCode::DimensionMismatch, "partial correlation needs at least 3 columns");
    require(j < x.cols() && k < x.cols() && j != k, ErrorCode::InvalidArgument, "bad column pair");
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < x.cols(); ++c)
        if (c != j && c != k) rest.push_back(c);
    const Matrix r = x.select_columns(rest);
    // Full-rank check on the whole matrix, not just the conditioning set.
    (void)PivotedQR(with_intercept(x));
    const OlsFit fj = ols_fit(r, x.column(j), true);
    const OlsFit fk = ols_fit(r, x.column(k), true);
    const double num = dot(fj.residuals, fk.residuals);
    return num / std::sqrt(fj.rss * fk.rss);
}

}  // namespace ghostvar
