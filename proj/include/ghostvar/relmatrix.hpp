#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/linalg/eigen.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/qr.hpp"
#include "ghostvar/predictors/linear.hpp"
#include "ghostvar/predictors/prediction_function.hpp"
#include "ghostvar/relevance.hpp"

namespace ghostvar {

enum class ReplacementMethod { Ghost, Permutation };

inline const char* to_string(ReplacementMethod m) noexcept {
    return m == ReplacementMethod::Ghost ? "ghost" : "permutation";
}

/// n₂×p matrix A; column j is Ŷ₂ - Ŷ₂ with variable j replaced.
struct CaseVariableMatrix {
    Matrix a;
    ReplacementMethod method = ReplacementMethod::Ghost;
    std::vector<std::string> names;
};

inline CaseVariableMatrix build_A(const PredictionFunction& model, const Dataset& test, const GhostColumnSet& ghosts,
                                  std::size_t threads = 1) {
    require(model.info().variables == test.names, ErrorCode::SchemaMismatch, "test columns do not match the model");
    require(test.cols() >= 2, ErrorCode::DimensionMismatch, "relevance matrix needs at least two variables");
    return {ghost_changes(model, test.features, ghosts, threads), ReplacementMethod::Ghost, test.names};
}

inline CaseVariableMatrix build_A(const PredictionFunction& model, const Dataset& test, const PermutationPlan& plan,
                                  std::size_t threads = 1) {
    require(model.info().variables == test.names, ErrorCode::SchemaMismatch, "test columns do not match the model");
    require(test.cols() >= 2, ErrorCode::DimensionMismatch, "relevance matrix needs at least two variables");
    return {permutation_changes(model, test.features, plan, threads), ReplacementMethod::Permutation, test.names};
}

/// V = AᵀA/n₂ with its spectrum.
struct RelevanceMatrix {
    Matrix v;
    SymEigen eigen;
    double total_relevance = 0.0;  ///< trace(V)
    Vector explained;              ///< λᵢ / Σλ
    Matrix centered_covariance;    ///< covariance of the columns of A (denominator n₂)
    ReplacementMethod method = ReplacementMethod::Ghost;
    std::vector<std::string> names;

    [[nodiscard]] std::size_t p() const noexcept { return v.rows(); }
    [[nodiscard]] Vector diagonal() const {
        Vector d(p());
        for (std::size_t j = 0; j < p(); ++j) d[j] = v(j, j);
        return d;
    }
};

inline constexpr double kEigenClamp = 1e-12;

inline RelevanceMatrix relevance_matrix(const CaseVariableMatrix& cvm) {
    const Matrix& a = cvm.a;
    require(a.rows() >= 1 && a.cols() >= 1, ErrorCode::DimensionMismatch, "empty case-variable matrix");
    require(a.all_finite(), ErrorCode::NonFinite, "case-variable matrix has non-finite entries");
    const double n = static_cast<double>(a.rows());
    RelevanceMatrix rm;
    rm.method = cvm.method;
    rm.names = cvm.names;
    rm.v = gram(a);
    for (double& x : rm.v.data()) x /= n;
    rm.total_relevance = trace(rm.v);

    const Vector mu = column_means(a);
    rm.centered_covariance = rm.v;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t k = 0; k < a.cols(); ++k) rm.centered_covariance(j, k) -= mu[j] * mu[k];

    rm.eigen = sym_eigen(rm.v);
    const double floor = kEigenClamp * rm.total_relevance;
    for (double& l : rm.eigen.eigenvalues)
        if (l < floor) l = 0.0;
    const double sum = std::accumulate(rm.eigen.eigenvalues.begin(), rm.eigen.eigenvalues.end(), 0.0);
    rm.explained.resize(rm.eigen.eigenvalues.size());
    for (std::size_t i = 0; i < rm.explained.size(); ++i)
        rm.explained[i] = sum > 0.0 ? rm.eigen.eigenvalues[i] / sum : 0.0;
    return rm;
}

// ---------------------------------------------------------------------------
// Partial correlations

/// Off-diagonal ρ̂_jk = -v_jk/√(v_jj v_kk); diagonal -1. Entries involving a
/// variable with zero relevance are NaN and listed in `undefined`.
struct PartialCorrelationMatrix {
    Matrix rho;
    std::vector<std::size_t> undefined;
};

inline PartialCorrelationMatrix partial_corr_from_matrix(const Matrix& v, bool strict = true) {
    const std::size_t p = v.rows();
    require(v.cols() == p, ErrorCode::DimensionMismatch, "matrix must be square");
    PartialCorrelationMatrix out{Matrix(p, p), {}};
    for (std::size_t j = 0; j < p; ++j)
        if (!(v(j, j) > 0.0)) out.undefined.push_back(j);
    if (strict && !out.undefined.empty())
        fail(ErrorCode::ZeroRelevanceVariable,
             "variable " + std::to_string(out.undefined.front()) + " has zero relevance; partial correlation undefined");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) {
            if (v(j, j) > 0.0 && v(k, k) > 0.0)
                out.rho(j, k) = j == k ? -1.0 : -v(j, k) / std::sqrt(v(j, j) * v(k, k));
            else
                out.rho(j, k) = nan;
        }
    return out;
}

/// Only meaningful for linear models, where V = diag(β̂)·G·diag(β̂). The raw
/// entries -v_jk/sqrt(v_jj·v_kk) carry the sign of β̂_j·β̂_k; pass the slopes
/// to the overload below to undo it.
inline PartialCorrelationMatrix partial_corr_from_V(const RelevanceMatrix& v, bool strict = true) {
    return partial_corr_from_matrix(v.v, strict);
}

/// Sign-corrected partial correlations: entry (j,k) is multiplied by
/// sign(β̂_j·β̂_k), which recovers -g_jk/sqrt(g_jj·g_kk) exactly.
inline PartialCorrelationMatrix partial_corr_from_V(const RelevanceMatrix& v, std::span<const double> slopes,
                                                    bool strict = true) {
    require(slopes.size() == v.p(), ErrorCode::DimensionMismatch, "one slope per variable expected");
    PartialCorrelationMatrix out = partial_corr_from_matrix(v.v, strict);
    for (std::size_t j = 0; j < v.p(); ++j)
        for (std::size_t k = 0; k < v.p(); ++k)
            if (j != k && slopes[j] * slopes[k] < 0.0) out.rho(j, k) = -out.rho(j, k);
    return out;
}

/// -s^{jk}/√(s^{jj}s^{kk}) from the inverse sample covariance, diagonal -1.
inline Matrix partial_corr_from_covariance(const Matrix& x) {
    const std::size_t p = x.cols();
    const Vector mu = column_means(x);
    Matrix xc = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < p; ++j) xc(i, j) -= mu[j];
    const Matrix s_inv = PivotedQR(xc).inverse_gram();
    Matrix rho(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k)
            rho(j, k) = j == k ? -1.0 : -s_inv(j, k) / std::sqrt(s_inv(j, j) * s_inv(k, k));
    return rho;
}

// ---------------------------------------------------------------------------
// G and the inverse-covariance link

/// G = (X₂ - X̂₂)ᵀ(X₂ - X̂₂)/n₂.
inline Matrix ghost_residual_gram(const Matrix& test_features, const GhostColumnSet& ghosts) {
    Matrix g = gram(ghosts.residuals(test_features));
    for (double& x : g.data()) x /= static_cast<double>(test_features.rows());
    return g;
}

struct GhostGramCheck {
    Matrix g;
    Matrix rhs;                   ///< ((n₂-1)/n₂)·diag(σ̃²)·S₂⁻¹·diag(σ̃²)
    double max_abs_discrepancy = 0.0;
    double relative_discrepancy = 0.0;  ///< max_abs / ‖G‖_max
};

/// Compares G with ((n₂-1)/n₂)·diag(σ̃²)·S₂⁻¹·diag(σ̃²). S₂ is the sample
/// covariance with denominator n₂-1, and σ̃²_[j] = ‖xⱼ - x̂ⱼ‖²/(n₂-1) uses
/// the same denominator; with that convention the identity is exact.
inline GhostGramCheck ghost_gram_check(const Matrix& test_features, const GhostColumnSet& ghosts) {
    const std::size_t n = test_features.rows();
    const std::size_t p = test_features.cols();
    require(ghosts.ghosts.rows() == n && ghosts.p() == p, ErrorCode::SchemaMismatch,
            "ghosts were built for a different matrix");
    GhostGramCheck out;
    out.g = ghost_residual_gram(test_features, ghosts);

    const Vector mu = column_means(test_features);
    Matrix xc = test_features;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) xc(i, j) -= mu[j];
    Matrix s_inv = PivotedQR(xc).inverse_gram();
    const double nm1 = static_cast<double>(n - 1);
    for (double& x : s_inv.data()) x *= nm1;

    const double nd = static_cast<double>(n);
    Vector s2(p);
    for (std::size_t j = 0; j < p; ++j) s2[j] = ghosts.residual_variance[j] * nd / nm1;
    out.rhs = Matrix(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) out.rhs(j, k) = nm1 / nd * s2[j] * s_inv(j, k) * s2[k];
    out.max_abs_discrepancy = max_abs(out.g - out.rhs);
    const double scale = max_abs(out.g);
    out.relative_discrepancy = scale > 0.0 ? out.max_abs_discrepancy / scale : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Permutation relevance matrix in the linear case

struct RpStructureCheck {
    Matrix v_tilde;
    Matrix approximation;  ///< 2·diag(β̂)·S₂·diag(β̂), S₂ with denominator n₂
    double relative_discrepancy = 0.0;  ///< ‖Ṽ - approx‖_max / ‖Ṽ‖_max
};

/// The factor 2 off the diagonal needs X₂'ᵀX₂' = X₂ᵀX₂, which holds when
/// every column is shuffled by the same row permutation. With independent
/// per-variable permutations the off-diagonal entries tend to β̂ⱼβ̂ₖsⱼₖ.
inline RpStructureCheck rp_matrix_structure_check(const PredictionFunction& model, const Dataset& test,
                                                  const PermutationPlan& plan) {
    const auto lin = model.model_as<LinearModel>();
    require(lin != nullptr, ErrorCode::InvalidArgument, "permutation structure check needs a linear model");
    const Vector beta = lin->ols().slopes();
    RpStructureCheck out;
    out.v_tilde = relevance_matrix(build_A(model, test, plan)).v;

    Matrix s = covariance(test.features);
    const double n = static_cast<double>(test.rows());
    for (double& x : s.data()) x *= (n - 1.0) / n;
    const std::size_t p = beta.size();
    out.approximation = Matrix(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) out.approximation(j, k) = 2.0 * beta[j] * s(j, k) * beta[k];
    const double scale = max_abs(out.v_tilde);
    out.relative_discrepancy = scale > 0.0 ? max_abs(out.v_tilde - out.approximation) / scale : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Eigen report

struct EigenComponent {
    std::size_t index = 0;  ///< 0-based rank in the descending spectrum
    double eigenvalue = 0.0;
    double explained = 0.0;
    Vector eigenvector;
};

/// Eigenpairs explaining at least `threshold` of the total relevance.
inline std::vector<EigenComponent> eigen_report(const RelevanceMatrix& rm, double threshold = 0.01) {
    std::vector<EigenComponent> out;
    for (std::size_t i = 0; i < rm.explained.size(); ++i)
        if (rm.explained[i] >= threshold)
            out.push_back({i, rm.eigen.eigenvalues[i], rm.explained[i], rm.eigen.eigenvectors.column(i)});
    return out;
}

// ---------------------------------------------------------------------------
// Clustering

enum class Linkage { Average, Complete, Single };

inline Linkage parse_linkage(const std::string& s) {
    if (s == "average") return Linkage::Average;
    if (s == "complete") return Linkage::Complete;
    if (s == "single") return Linkage::Single;
    fail(ErrorCode::InvalidArgument, "unknown linkage '" + s + "'");
}

inline const char* to_string(Linkage l) noexcept {
    switch (l) {
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
        case Linkage::Single: return "single";
    }
    return "";
}

/// Agglomerative merge history. Leaves are 0..p-1; the cluster created by
/// merge m has id p+m.
struct ClusterTree {
    struct Merge {
        std::size_t left = 0;
        std::size_t right = 0;
        double height = 0.0;
        std::size_t size = 0;
    };
    std::vector<Merge> merges;
    std::vector<std::string> labels;
    Linkage linkage = Linkage::Average;

    [[nodiscard]] std::size_t leaves() const noexcept { return labels.size(); }

    /// Cluster index per leaf when the tree is cut into k clusters. Clusters
    /// are numbered by their smallest leaf.
    [[nodiscard]] std::vector<std::size_t> cut(std::size_t k) const {
        const std::size_t p = leaves();
        require(k >= 1 && k <= p, ErrorCode::InvalidArgument, "cluster count out of range");
        std::vector<std::size_t> parent(2 * p);
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (std::size_t m = 0; m < p - k; ++m) {
            parent[find(merges[m].left)] = p + m;
            parent[find(merges[m].right)] = p + m;
        }
        std::vector<std::size_t> label(p);
        std::vector<std::size_t> root_ids;
        for (std::size_t i = 0; i < p; ++i) {
            const std::size_t r = find(i);
            auto it = std::ranges::find(root_ids, r);
            if (it == root_ids.end()) {
                root_ids.push_back(r);
                label[i] = root_ids.size() - 1;
            } else {
                label[i] = static_cast<std::size_t>(it - root_ids.begin());
            }
        }
        return label;
    }
};

/// Similarity s_jk = v_jk², distance d_jk = 1 - s_jk / max_{j≠k} s_jk.
inline Matrix similarity_distance(const Matrix& v) {
    const std::size_t p = v.rows();
    double smax = 0.0;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k)
            if (j != k) smax = std::max(smax, v(j, k) * v(j, k));
    require(smax > 0.0, ErrorCode::DegenerateSimilarity, "all off-diagonal relevance entries are zero");
    Matrix d(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) d(j, k) = j == k ? 0.0 : 1.0 - v(j, k) * v(j, k) / smax;
    return d;
}

/// Agglomerative clustering on a distance matrix. Ties go to the pair with
/// the smallest (row, column) position among active clusters.
inline ClusterTree agglomerate(const Matrix& dist, Linkage linkage, std::vector<std::string> labels) {
    const std::size_t p = dist.rows();
    require(p >= 2, ErrorCode::DimensionMismatch, "clustering needs at least two variables");
    require(labels.size() == p, ErrorCode::DimensionMismatch, "label count does not match matrix size");
    Matrix d = dist;
    std::vector<std::size_t> id(p);
    std::vector<std::size_t> size(p, 1);
    std::vector<char> active(p, 1);
    std::iota(id.begin(), id.end(), std::size_t{0});

    ClusterTree tree;
    tree.labels = std::move(labels);
    tree.linkage = linkage;
    for (std::size_t m = 0; m + 1 < p; ++m) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < p; ++j)
                if (active[j] && d(i, j) < best) {
                    best = d(i, j);
                    bi = i;
                    bj = j;
                }
        }
        tree.merges.push_back({std::min(id[bi], id[bj]), std::max(id[bi], id[bj]), best, size[bi] + size[bj]});
        for (std::size_t k = 0; k < p; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            double nd = 0.0;
            switch (linkage) {
                case Linkage::Average:
                    nd = (static_cast<double>(size[bi]) * d(bi, k) + static_cast<double>(size[bj]) * d(bj, k)) /
                         static_cast<double>(size[bi] + size[bj]);
                    break;
                case Linkage::Complete: nd = std::max(d(bi, k), d(bj, k)); break;
                case Linkage::Single: nd = std::min(d(bi, k), d(bj, k)); break;
            }
            d(bi, k) = d(k, bi) = nd;
        }
        active[bj] = 0;
        size[bi] += size[bj];
        id[bi] = p + m;
    }
    return tree;
}

inline ClusterTree cluster_variables(const RelevanceMatrix& rm, Linkage linkage = Linkage::Average) {
    require(rm.p() >= 2, ErrorCode::DimensionMismatch, "clustering needs at least two variables");
    return agglomerate(similarity_distance(rm.v), linkage, rm.names);
}

}  // namespace ghostvar
