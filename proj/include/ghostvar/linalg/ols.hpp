#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/qr.hpp"

namespace ghostvar {

/// Ordinary least squares fit with the usual inference statistics.
///
/// Coefficients are ordered (intercept, regressor 0, ..., regressor p-1) when
/// `has_intercept` is set, otherwise just the regressors. The solver is a
/// Householder QR with column pivoting (see PivotedQR).
struct OlsFit {
    Vector coefficients;
    bool has_intercept = false;
    Vector fitted;
    Vector residuals;
    double rss = 0.0;
    double sigma2_hat = 0.0;  ///< rss / (n - columns of design), i.e. n-p-1 with intercept
    double sigma2_n = 0.0;    ///< rss / n
    Vector std_errors;
    Vector t_values;
    Vector f_values;  ///< t², the single-coefficient F statistic
    double r2 = 0.0;
    double r2_adjusted = 0.0;
    std::size_t n = 0;
    std::size_t p = 0;  ///< regressors, excluding the intercept
    Matrix unscaled_covariance;  ///< (DᵀD)⁻¹ for design D

    [[nodiscard]] std::size_t offset() const noexcept { return has_intercept ? 1 : 0; }
    [[nodiscard]] std::size_t df_residual() const noexcept { return n - p - offset(); }
    [[nodiscard]] double intercept() const noexcept { return has_intercept ? coefficients[0] : 0.0; }
    /// Coefficient of regressor j (0-based, intercept excluded).
    [[nodiscard]] double slope(std::size_t j) const { return coefficients.at(j + offset()); }
    [[nodiscard]] Vector slopes() const {
        return Vector(coefficients.begin() + static_cast<std::ptrdiff_t>(offset()), coefficients.end());
    }
    [[nodiscard]] double t_value(std::size_t j) const { return t_values.at(j + offset()); }
    [[nodiscard]] double f_value(std::size_t j) const { return f_values.at(j + offset()); }

    [[nodiscard]] Vector predict(const Matrix& x) const {
        require(x.cols() == p, ErrorCode::DimensionMismatch, "prediction matrix has wrong column count");
        Vector out(x.rows());
        const double b0 = intercept();
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double s = b0;
            auto r = x.row(i);
            for (std::size_t j = 0; j < p; ++j) s += coefficients[j + offset()] * r[j];
            out[i] = s;
        }
        return out;
    }
};

inline Matrix with_intercept(const Matrix& x) {
    Matrix d(x.rows(), x.cols() + 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        d(i, 0) = 1.0;
        for (std::size_t j = 0; j < x.cols(); ++j) d(i, j + 1) = x(i, j);
    }
    return d;
}

inline OlsFit ols_fit(const Matrix& x, std::span<const double> y, bool intercept) {
    require(x.rows() == y.size(), ErrorCode::DimensionMismatch, "X has " + std::to_string(x.rows()) +
                                                                    " rows but y has " + std::to_string(y.size()));
    require(x.all_finite(), ErrorCode::NonFinite, "design matrix contains non-finite values");
    const Matrix design = intercept ? with_intercept(x) : x;
    const std::size_t n = design.rows();
    const std::size_t k = design.cols();
    require(n > k, ErrorCode::DimensionMismatch, "OLS needs more rows than design columns");

    const PivotedQR qr(design);
    OlsFit fit;
    fit.has_intercept = intercept;
    fit.n = n;
    fit.p = x.cols();
    fit.coefficients = qr.solve(y);
    fit.fitted = design * fit.coefficients;
    fit.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = y[i] - fit.fitted[i];
    fit.rss = dot(fit.residuals, fit.residuals);
    fit.sigma2_hat = fit.rss / static_cast<double>(n - k);
    fit.sigma2_n = fit.rss / static_cast<double>(n);
    fit.unscaled_covariance = qr.inverse_gram();

    fit.std_errors.resize(k);
    fit.t_values.resize(k);
    fit.f_values.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        fit.std_errors[j] = std::sqrt(fit.sigma2_hat * fit.unscaled_covariance(j, j));
        fit.t_values[j] = fit.coefficients[j] / fit.std_errors[j];
        fit.f_values[j] = fit.t_values[j] * fit.t_values[j];
    }

    // R convention: centred total sum of squares with an intercept, raw otherwise.
    double tss = 0.0;
    const double ybar = intercept ? mean(y) : 0.0;
    for (double v : y) tss += (v - ybar) * (v - ybar);
    fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
    const double df_total = static_cast<double>(intercept ? n - 1 : n);
    fit.r2_adjusted = 1.0 - (1.0 - fit.r2) * df_total / static_cast<double>(n - k);
    return fit;
}

/// Coefficients of the model without regressor `omitted`, recovered from the
/// full fit and the auxiliary regression of that regressor on the others:
/// β̂₀ = β̂_x + α̂·β̂_z. Both fits must share rows and intercept setting.
inline Vector ols_omit_update(const OlsFit& full, const OlsFit& aux, std::size_t omitted) {
    require(omitted < full.p, ErrorCode::DimensionMismatch, "omitted regressor index out of range");
    require(aux.has_intercept == full.has_intercept && aux.p + 1 == full.p && aux.n == full.n,
            ErrorCode::DimensionMismatch, "auxiliary fit does not match the full fit");
    const double beta_z = full.slope(omitted);
    Vector reduced;
    reduced.reserve(aux.coefficients.size());
    if (full.has_intercept) reduced.push_back(full.intercept() + aux.intercept() * beta_z);
    for (std::size_t j = 0, a = 0; j < full.p; ++j) {
        if (j == omitted) continue;
        reduced.push_back(full.slope(j) + aux.slope(a) * beta_z);
        ++a;
    }
    return reduced;
}

}  // namespace ghostvar
