#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/qr.hpp"
#include "ghostvar/linalg/random.hpp"
#include "ghostvar/predictors/linear.hpp"

namespace ghostvar {

enum class ScenarioId { Example1, Example2, Example3 };

inline ScenarioId parse_scenario(const std::string& s) {
    if (s == "ex1") return ScenarioId::Example1;
    if (s == "ex2") return ScenarioId::Example2;
    if (s == "ex3") return ScenarioId::Example3;
    fail(ErrorCode::InvalidArgument, "unknown scenario '" + s + "' (expected ex1, ex2 or ex3)");
}

inline const char* to_string(ScenarioId id) noexcept {
    switch (id) {
        case ScenarioId::Example1: return "ex1";
        case ScenarioId::Example2: return "ex2";
        case ScenarioId::Example3: return "ex3";
    }
    return "";
}

struct ScenarioSpec {
    ScenarioId id = ScenarioId::Example1;
    std::size_t n1 = 2000;
    std::size_t n2 = 1000;
    std::uint64_t seed = 1;
    bool zero_correlation = false;  ///< all feature correlations set to 0
};

struct ScenarioTruth {
    Matrix covariance;
    double noise_variance = 1.0;
    Vector coefficients;  ///< linear scenarios only
    /// Var(Xⱼ | X₋ⱼ) = 1/(Σ⁻¹)ⱼⱼ
    Vector conditional_variances;
};

struct Scenario {
    ScenarioSpec spec;
    SplitSample data;
    ScenarioTruth truth;
    std::optional<BasisSpec> oracle_basis;
};

inline Vector conditional_variances(const Matrix& cov) {
    const PivotedCholesky ch = pivoted_cholesky(cov);
    require(ch.rank == cov.rows(), ErrorCode::RankDeficient, "covariance is singular");
    const Matrix prec = PivotedQR(ch.lower.transpose()).inverse_gram();
    Vector out(cov.rows());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = 1.0 / prec(j, j);
    return out;
}

/// Var of one coordinate of an m-variable equicorrelated block given the rest.
inline double equicorrelated_conditional_variance(std::size_t m, double rho) {
    const double md = static_cast<double>(m);
    return (1.0 - rho) * (1.0 + (md - 1.0) * rho) / (1.0 + (md - 2.0) * rho);
}

namespace detail {

inline void check_sizes(const ScenarioSpec& spec) {
    require(spec.n1 >= 10 && spec.n2 >= 10, ErrorCode::TooFewRows, "scenario sample sizes must be at least 10");
}

inline std::vector<std::string> numbered_names(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
    return names;
}

template <class Response>
Dataset draw_mvn(const std::vector<std::string>& names, const Matrix& cov, std::size_t n, double noise_sd, Rng& rng,
                 Response&& response) {
    const Vector zero(cov.rows(), 0.0);
    Matrix x = mvn_sample(zero, cov, n, rng);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = response(x.row(i)) + noise_sd * rng.normal();
    return {names, std::move(x), std::move(y)};
}

}  // namespace detail

/// Y = X₁ + X₂ + X₃ + ε, corr(X₂, X₃) = 0.95, X₁ independent, Var(ε) = 1.
inline Scenario gen_example1(const ScenarioSpec& spec) {
    detail::check_sizes(spec);
    const double rho = spec.zero_correlation ? 0.0 : 0.95;
    Scenario s;
    s.spec = spec;
    s.truth.covariance = Matrix{{1, 0, 0}, {0, 1, rho}, {0, rho, 1}};
    s.truth.noise_variance = 1.0;
    s.truth.coefficients = {1.0, 1.0, 1.0};
    s.truth.conditional_variances = conditional_variances(s.truth.covariance);
    const auto names = detail::numbered_names(3);
    Rng rng(spec.seed);
    auto f = [](std::span<const double> x) { return x[0] + x[1] + x[2]; };
    s.data.train = detail::draw_mvn(names, s.truth.covariance, spec.n1, 1.0, rng, f);
    s.data.test = detail::draw_mvn(names, s.truth.covariance, spec.n2, 1.0, rng, f);
    return s;
}

/// Y = cos X₁ + ½(cos X₂ + cos X₃) + ½X₂X₃ + cos X₄ + cos X₅ + ε, Var(ε) = ¼,
/// correlation 0.95 within {X₁,X₂} and within {X₃,X₄,X₅}.
inline Scenario gen_example2(const ScenarioSpec& spec) {
    detail::check_sizes(spec);
    const double r = spec.zero_correlation ? 0.0 : 0.95;
    Scenario s;
    s.spec = spec;
    s.truth.covariance = Matrix{{1, r, 0, 0, 0}, {r, 1, 0, 0, 0}, {0, 0, 1, r, r}, {0, 0, r, 1, r}, {0, 0, r, r, 1}};
    s.truth.noise_variance = 0.25;
    s.truth.conditional_variances = conditional_variances(s.truth.covariance);
    s.oracle_basis = BasisSpec{BasisTerm::cosine(0), BasisTerm::cosine(1), BasisTerm::cosine(2),
                               BasisTerm::cosine(3), BasisTerm::cosine(4), BasisTerm::product(1, 2)};
    const auto names = detail::numbered_names(5);
    Rng rng(spec.seed);
    auto f = [](std::span<const double> x) {
        return std::cos(x[0]) + 0.5 * (std::cos(x[1]) + std::cos(x[2])) + 0.5 * x[1] * x[2] + std::cos(x[3]) +
               std::cos(x[4]);
    };
    s.data.train = detail::draw_mvn(names, s.truth.covariance, spec.n1, 0.5, rng, f);
    s.data.test = detail::draw_mvn(names, s.truth.covariance, spec.n2, 0.5, rng, f);
    return s;
}

inline constexpr std::size_t kExample3Blocks = 4;
inline constexpr std::size_t kExample3BlockSize = 50;

/// 200 standard normal variables in four blocks of 50. Blocks 1 and 3 are
/// independent; blocks 2 and 4 are equicorrelated with ρ = 0.95 through one
/// shared factor per block, X = √ρ·F + √(1-ρ)·η.
/// Y = ½·Σ block 1 + Σ block 2 + ε, ε ~ N(0, 1).
inline Scenario gen_example3(const ScenarioSpec& spec) {
    detail::check_sizes(spec);
    constexpr std::size_t m = kExample3BlockSize;
    constexpr std::size_t p = kExample3Blocks * m;
    const double rho = spec.zero_correlation ? 0.0 : 0.95;
    const bool correlated[kExample3Blocks] = {false, true, false, true};

    Scenario s;
    s.spec = spec;
    s.truth.covariance = Matrix::identity(p);
    for (std::size_t b = 0; b < kExample3Blocks; ++b)
        if (correlated[b])
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < m; ++k)
                    if (j != k) s.truth.covariance(b * m + j, b * m + k) = rho;
    s.truth.noise_variance = 1.0;
    s.truth.coefficients.assign(p, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        s.truth.coefficients[j] = 0.5;
        s.truth.coefficients[m + j] = 1.0;
    }
    s.truth.conditional_variances.assign(p, 1.0);
    for (std::size_t b = 0; b < kExample3Blocks; ++b)
        if (correlated[b])
            for (std::size_t j = 0; j < m; ++j)
                s.truth.conditional_variances[b * m + j] = equicorrelated_conditional_variance(m, rho);

    std::vector<std::string> names;
    for (std::size_t b = 1; b <= kExample3Blocks; ++b)
        for (std::size_t j = 1; j <= m; ++j) names.push_back("x" + std::to_string(b) + "_" + std::to_string(j));

    Rng rng(spec.seed);
    const double a = std::sqrt(rho);
    const double c = std::sqrt(1.0 - rho);
    auto draw = [&](std::size_t n) {
        Matrix x(n, p);
        Vector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t b = 0; b < kExample3Blocks; ++b) {
                if (correlated[b]) {
                    const double factor = rng.normal();
                    for (std::size_t j = 0; j < m; ++j) x(i, b * m + j) = a * factor + c * rng.normal();
                } else {
                    for (std::size_t j = 0; j < m; ++j) x(i, b * m + j) = rng.normal();
                }
            }
            double mu = 0.0;
            for (std::size_t j = 0; j < 2 * m; ++j) mu += s.truth.coefficients[j] * x(i, j);
            y[i] = mu + rng.normal();
        }
        return Dataset{names, std::move(x), std::move(y)};
    };
    s.data.train = draw(spec.n1);
    s.data.test = draw(spec.n2);
    return s;
}

inline Scenario generate_scenario(const ScenarioSpec& spec) {
    switch (spec.id) {
        case ScenarioId::Example1: return gen_example1(spec);
        case ScenarioId::Example2: return gen_example2(spec);
        case ScenarioId::Example3: return gen_example3(spec);
    }
    fail(ErrorCode::InvalidArgument, "unknown scenario");
}

}  // namespace ghostvar
