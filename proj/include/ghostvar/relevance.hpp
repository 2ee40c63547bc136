#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/linalg/distributions.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/ols.hpp"
#include "ghostvar/linalg/random.hpp"
#include "ghostvar/parallel.hpp"
#include "ghostvar/predictors/linear.hpp"
#include "ghostvar/predictors/prediction_function.hpp"

namespace ghostvar {

// ---------------------------------------------------------------------------
// Ghost variables

/// Per-variable ghost columns x̂ⱼ = Ê(Xⱼ | X₋ⱼ) on the test sample.
struct GhostColumnSet {
    Matrix ghosts;             ///< n₂×p, column j replaces test column j
    Vector residual_variance;  ///< σ̂²_[j] = ‖xⱼ - x̂ⱼ‖²/n₂
    /// coefficients[j] = (intercept, slopes on the other columns in column order).
    std::vector<Vector> coefficients;

    [[nodiscard]] std::size_t p() const noexcept { return ghosts.cols(); }
    [[nodiscard]] Matrix residuals(const Matrix& x) const { return x - ghosts; }
};

enum class GhostSolver {
    Joint,     ///< every regression read off one inverse of the centred Gram matrix
    Separate,  ///< p independent OLS fits
};

namespace detail {

inline std::vector<Vector> ghost_coefficients_joint(const Matrix& x) {
    const std::size_t p = x.cols();
    const Vector mu = column_means(x);
    Matrix xc = x;
    for (std::size_t i = 0; i < xc.rows(); ++i)
        for (std::size_t j = 0; j < p; ++j) xc(i, j) -= mu[j];
    const Matrix minv = PivotedQR(xc).inverse_gram();
    std::vector<Vector> coef(p);
    for (std::size_t j = 0; j < p; ++j) {
        Vector c;
        c.reserve(p);
        double intercept = mu[j];
        c.push_back(0.0);
        for (std::size_t k = 0; k < p; ++k) {
            if (k == j) continue;
            const double b = -minv(k, j) / minv(j, j);
            c.push_back(b);
            intercept -= b * mu[k];
        }
        c[0] = intercept;
        coef[j] = std::move(c);
    }
    return coef;
}

inline std::vector<Vector> ghost_coefficients_separate(const Matrix& x) {
    std::vector<Vector> coef(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) coef[j] = ols_fit(x.drop_column(j), x.column(j), true).coefficients;
    return coef;
}

}  // namespace detail

/// Ghost regressions fitted on `fit_on` (usually the test features) and
/// evaluated on `apply_to`. Every regression includes an intercept.
inline GhostColumnSet fit_ghosts(const Matrix& fit_on, const Matrix& apply_to, GhostSolver solver = GhostSolver::Joint) {
    const std::size_t p = fit_on.cols();
    require(p >= 2, ErrorCode::DimensionMismatch, "ghost variables need at least two features");
    require(apply_to.cols() == p, ErrorCode::SchemaMismatch, "ghost fit and target matrices differ in columns");
    require(fit_on.rows() > p, ErrorCode::TooFewRows, "ghost regressions need more rows than features");
    require(fit_on.all_finite() && apply_to.all_finite(), ErrorCode::NonFinite, "features contain non-finite values");
    // Rank check with the intercept column, as the regressions use it.
    (void)PivotedQR(with_intercept(fit_on));

    GhostColumnSet set;
    set.coefficients = solver == GhostSolver::Joint ? detail::ghost_coefficients_joint(fit_on)
                                                    : detail::ghost_coefficients_separate(fit_on);
    const std::size_t n = apply_to.rows();
    set.ghosts = Matrix(n, p);
    set.residual_variance.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const Vector& c = set.coefficients[j];
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = apply_to.row(i);
            double g = c[0];
            for (std::size_t k = 0, a = 1; k < p; ++k) {
                if (k == j) continue;
                g += c[a++] * row[k];
            }
            set.ghosts(i, j) = g;
            ss += (row[j] - g) * (row[j] - g);
        }
        set.residual_variance[j] = ss / static_cast<double>(n);
    }
    return set;
}

inline GhostColumnSet fit_ghosts(const Matrix& test_features, GhostSolver solver = GhostSolver::Joint) {
    return fit_ghosts(test_features, test_features, solver);
}

// ---------------------------------------------------------------------------
// Permutations

/// One independent permutation of the test rows per variable.
struct PermutationPlan {
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> permutations;

    static PermutationPlan generate(std::size_t n2, std::size_t p, std::uint64_t seed) {
        PermutationPlan plan;
        plan.seed = seed;
        Rng rng(seed);
        plan.permutations.reserve(p);
        for (std::size_t j = 0; j < p; ++j) plan.permutations.push_back(random_permutation(n2, rng));
        return plan;
    }

    /// The same row permutation for every variable.
    static PermutationPlan generate_shared(std::size_t n2, std::size_t p, std::uint64_t seed) {
        PermutationPlan plan;
        plan.seed = seed;
        Rng rng(seed);
        plan.permutations.assign(p, random_permutation(n2, rng));
        return plan;
    }

    static PermutationPlan identity(std::size_t n2, std::size_t p) {
        PermutationPlan plan;
        std::vector<std::size_t> id(n2);
        for (std::size_t i = 0; i < n2; ++i) id[i] = i;
        plan.permutations.assign(p, id);
        return plan;
    }

    void validate(std::size_t n2, std::size_t p) const {
        require(permutations.size() == p, ErrorCode::SchemaMismatch, "permutation plan has wrong variable count");
        std::vector<char> seen(n2);
        for (const auto& perm : permutations) {
            require(perm.size() == n2, ErrorCode::SchemaMismatch, "permutation plan has wrong length");
            std::ranges::fill(seen, 0);
            for (std::size_t v : perm) {
                require(v < n2 && !seen[v], ErrorCode::InvalidArgument, "permutation is not a bijection");
                seen[v] = 1;
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Prediction changes

/// Column j holds m̂(X) - m̂(X with column j replaced by replacement(j)).
/// m̂(X) is evaluated once and reused.
template <class Replacement>
Matrix prediction_changes(const PredictionFunction& model, const Matrix& x, Replacement&& replacement,
                          std::size_t threads = 1) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const Vector base = model.predict(x);
    Matrix a(n, p);
    parallel_for(p, threads, [&](std::size_t j) {
        Matrix modified = x;
        const Vector col = replacement(j);
        modified.set_column(j, col);
        const Vector changed = model.predict(modified);
        for (std::size_t i = 0; i < n; ++i) a(i, j) = base[i] - changed[i];
    });
    return a;
}

inline Matrix ghost_changes(const PredictionFunction& model, const Matrix& x, const GhostColumnSet& ghosts,
                            std::size_t threads = 1) {
    require(ghosts.ghosts.rows() == x.rows() && ghosts.p() == x.cols(), ErrorCode::SchemaMismatch,
            "ghosts were built for a different matrix");
    return prediction_changes(model, x, [&](std::size_t j) { return ghosts.ghosts.column(j); }, threads);
}

inline Matrix permutation_changes(const PredictionFunction& model, const Matrix& x, const PermutationPlan& plan,
                                  std::size_t threads = 1) {
    plan.validate(x.rows(), x.cols());
    return prediction_changes(
        model, x,
        [&](std::size_t j) {
            Vector col(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i) col[i] = x(plan.permutations[j][i], j);
            return col;
        },
        threads);
}

/// (1/n)‖column j‖² for every column.
inline Vector mean_squares(const Matrix& a) {
    Vector out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * a(i, j);
    for (double& v : out) v /= static_cast<double>(a.rows());
    return out;
}

// ---------------------------------------------------------------------------
// Relevance measures

inline double estimate_mspe(const PredictionFunction& model, const Dataset& test) {
    require(model.info().variables == test.names, ErrorCode::SchemaMismatch, "test columns do not match the model");
    const Vector pred = model.predict(test.features);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (test.response[i] - pred[i]) * (test.response[i] - pred[i]);
    return s / static_cast<double>(pred.size());
}

/// Rel_Gh(Xⱼ) = (1/n₂)‖m̂(X₂) - m̂(X₂ with column j replaced by its ghost)‖².
inline Vector relevance_ghost(const PredictionFunction& model, const Dataset& test, const GhostColumnSet& ghosts,
                              std::size_t threads = 1) {
    require(model.info().variables == test.names, ErrorCode::SchemaMismatch, "test columns do not match the model");
    return mean_squares(ghost_changes(model, test.features, ghosts, threads));
}

/// Rel_RP(Xⱼ) = (1/n₂)‖m̂(X₂) - m̂(X₂ with column j permuted)‖².
inline Vector relevance_permutation(const PredictionFunction& model, const Dataset& test,
                                    const PermutationPlan& plan, std::size_t threads = 1) {
    require(model.info().variables == test.names, ErrorCode::SchemaMismatch, "test columns do not match the model");
    return mean_squares(permutation_changes(model, test.features, plan, threads));
}

/// Average of Rel_RP over `repeats` independent plans drawn from `seed`.
inline Vector relevance_permutation_repeated(const PredictionFunction& model, const Dataset& test,
                                             std::size_t repeats, std::uint64_t seed, std::size_t threads = 1) {
    require(repeats >= 1, ErrorCode::InvalidArgument, "need at least one permutation repeat");
    Rng rng(seed);
    Vector acc(test.cols(), 0.0);
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto plan = PermutationPlan::generate(test.rows(), test.cols(), rng.next_u64());
        const Vector rel = relevance_permutation(model, test, plan, threads);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += rel[j];
    }
    for (double& v : acc) v /= static_cast<double>(repeats);
    return acc;
}

namespace detail {

inline std::vector<std::size_t> checked_omit_set(std::span<const std::size_t> omit, std::size_t p) {
    require(!omit.empty(), ErrorCode::InvalidArgument, "omission set is empty");
    std::vector<std::size_t> out(omit.begin(), omit.end());
    std::ranges::sort(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    require(out.back() < p, ErrorCode::InvalidArgument, "omitted variable index out of range");
    require(out.size() < p, ErrorCode::InvalidArgument, "cannot omit every variable");
    return out;
}

inline PredictionFunction refit_without(const ModelFactory& factory, const Dataset& train,
                                        std::span<const std::size_t> omit) {
    try {
        return factory(train.drop_columns(omit));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RankDeficient) throw;
        fail(ErrorCode::RefitFailed, e.what());
    } catch (const std::exception& e) {
        fail(ErrorCode::RefitFailed, e.what());
    }
}

}  // namespace detail

/// Rel_Om on the test sample: the family is refitted on the training set
/// without the omitted columns and compared with `full` on the test set.
/// Works for single variables and groups.
inline double relevance_omission(const ModelFactory& factory, const PredictionFunction& full,
                                 const SplitSample& split, std::span<const std::size_t> omit) {
    check_schema(split.train, split.test);
    const auto set = detail::checked_omit_set(omit, split.p());
    const PredictionFunction reduced = detail::refit_without(factory, split.train, set);
    const Vector a = full.predict(split.test.features);
    const Vector b = reduced.predict(split.test.drop_columns(set).features);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

/// Rel_Om evaluated on the training sample itself.
inline double relevance_omission_train(const ModelFactory& factory, const PredictionFunction& full,
                                       const Dataset& train, std::span<const std::size_t> omit) {
    const auto set = detail::checked_omit_set(omit, train.cols());
    const PredictionFunction reduced = detail::refit_without(factory, train, set);
    const Vector a = full.predict(train.features);
    const Vector b = reduced.predict(train.drop_columns(set).features);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

/// F_{1, n₁-p-1, 1-α} · σ̂² / n₁: the level-α threshold for a relevance of a
/// linear OLS model. Not meaningful for other model families.
inline double critical_value(double sigma2_hat, std::size_t n1, std::size_t p, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidProbability, "alpha must lie in (0,1)");
    require(n1 > p + 1, ErrorCode::TooFewRows, "critical value needs n1 > p + 1");
    if (sigma2_hat == 0.0) return 0.0;
    return f_quantile(1.0, static_cast<double>(n1 - p - 1), 1.0 - alpha) * sigma2_hat / static_cast<double>(n1);
}

// ---------------------------------------------------------------------------
// Linear-model identities

struct GhostFIdentityRow {
    double rel_ghost = 0.0;
    double scaled_relevance = 0.0;  ///< (n₁/σ̂²)·Rel_Gh
    double f_value = 0.0;
    double sigma2_zx_test = 0.0;   ///< σ̂²_{z.x,n₂}
    double sigma2_zx_train = 0.0;  ///< σ̂²_{z.x,n₁}
    double f_transformed = 0.0;    ///< F·σ̂²_{z.x,n₂}/σ̂²_{z.x,n₁}
    double beta2_sigma2 = 0.0;     ///< β̂²·σ̂²_{z.x,n₂}
};

struct GhostFIdentityCheck {
    std::vector<GhostFIdentityRow> rows;
    double max_f_discrepancy = 0.0;         ///< relative, scaled relevance vs transformed F
    double max_identity_discrepancy = 0.0;  ///< relative, Rel_Gh vs β̂²σ̂²
};

inline double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Fits OLS on the training sample and ghosts on the test sample, then
/// evaluates both sides of (n₁/σ̂²)Rel_Gh(Z) = F_z·σ̂²_{z.x,n₂}/σ̂²_{z.x,n₁}
/// and Rel_Gh(Z) = β̂_z²σ̂²_{z.x,n₂} for every variable.
inline GhostFIdentityCheck ghost_f_identity_check(const SplitSample& split) {
    check_schema(split.train, split.test);
    const PredictionFunction model = fit_linear(split.train);
    const OlsFit& fit = model.model_as<LinearModel>()->ols();
    const GhostColumnSet ghosts = fit_ghosts(split.test.features);
    const Vector rel = relevance_ghost(model, split.test, ghosts);
    const GhostColumnSet train_ghosts = fit_ghosts(split.train.features);
    const double n1 = static_cast<double>(split.train.rows());

    GhostFIdentityCheck out;
    for (std::size_t j = 0; j < split.p(); ++j) {
        GhostFIdentityRow r;
        r.rel_ghost = rel[j];
        r.scaled_relevance = n1 / fit.sigma2_hat * rel[j];
        r.f_value = fit.f_value(j);
        r.sigma2_zx_test = ghosts.residual_variance[j];
        r.sigma2_zx_train = train_ghosts.residual_variance[j];
        r.f_transformed = r.f_value * r.sigma2_zx_test / r.sigma2_zx_train;
        r.beta2_sigma2 = fit.slope(j) * fit.slope(j) * r.sigma2_zx_test;
        out.max_f_discrepancy = std::max(out.max_f_discrepancy, relative_gap(r.scaled_relevance, r.f_transformed));
        out.max_identity_discrepancy = std::max(out.max_identity_discrepancy, relative_gap(r.rel_ghost, r.beta2_sigma2));
        out.rows.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct RelevanceReport {
    std::vector<std::string> variables;
    std::optional<Vector> ghost;
    std::optional<Vector> permutation;
    std::optional<Vector> omission;
    std::optional<Vector> ghost_scaled;
    std::optional<Vector> permutation_scaled;
    std::optional<Vector> omission_scaled;
    double mspe_hat = 0.0;
    std::optional<double> critical_value;  ///< linear families only
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double alpha = 0.01;

    /// Fills the *_scaled fields as raw / mspe_hat.
    void rescale() {
        auto scale = [&](const std::optional<Vector>& raw, std::optional<Vector>& out) {
            if (!raw) {
                out.reset();
                return;
            }
            Vector s = *raw;
            for (double& v : s) v = mspe_hat > 0.0 ? v / mspe_hat : 0.0;
            out = std::move(s);
        };
        scale(ghost, ghost_scaled);
        scale(permutation, permutation_scaled);
        scale(omission, omission_scaled);
    }
};

}  // namespace ghostvar
