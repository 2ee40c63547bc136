#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ghostvar/linalg/distributions.hpp"
#include "ghostvar/linalg/eigen.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/ols.hpp"
#include "ghostvar/linalg/partial_correlation.hpp"
#include "ghostvar/linalg/qr.hpp"
#include "ghostvar/linalg/random.hpp"
#include "ghostvar/synthetic.hpp"
#include "support/oracles.hpp"

using namespace ghostvar;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST(Matrix, BasicOps) {
    const Matrix a{{1, 2}, {3, 4}, {5, 6}};
    EXPECT_EQ(a.rows(), 3u);
    EXPECT_EQ(a.transpose()(1, 2), 6.0);
    const Matrix g = gram(a);
    EXPECT_EQ(g, (Matrix{{35, 44}, {44, 56}}));
    EXPECT_EQ(a.drop_column(0).column(0), (Vector{2, 4, 6}));
    EXPECT_DOUBLE_EQ(trace(g), 91.0);
    EXPECT_THROW(Matrix(2, 2, Vector{1, 2, 3}), Error);
}

TEST(Matrix, CovarianceMatchesEigen) {
    oracle::Gen g(11);
    const Matrix x = g.correlated(40, 4);
    const Eigen::MatrixXd e = oracle::to_eigen(x);
    const Eigen::MatrixXd c = e.rowwise() - e.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / 39.0;
    EXPECT_LT((oracle::to_eigen(covariance(x)) - cov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, ExactLinearDataNoIntercept) {
    const Matrix x{{1}, {2}, {3}};
    const OlsFit fit = ols_fit(x, Vector{2, 4, 6}, false);
    EXPECT_NEAR(fit.coefficients[0], 2.0, 1e-14);
    EXPECT_NEAR(fit.rss, 0.0, 1e-24);
    EXPECT_NEAR(fit.sigma2_hat, 0.0, 1e-24);
    for (double r : fit.residuals) EXPECT_NEAR(r, 0.0, 1e-14);
}

TEST(Ols, MatchesNormalEquations) {
    oracle::Gen g(3);
    for (bool intercept : {false, true}) {
        const Matrix x = g.correlated(50, 4);
        const Vector y = g.vector(50);
        const OlsFit fit = ols_fit(x, y, intercept);
        const Eigen::VectorXd ref = oracle::normal_equations(x, y, intercept);
        ASSERT_EQ(fit.coefficients.size(), static_cast<std::size_t>(ref.size()));
        for (std::size_t k = 0; k < fit.coefficients.size(); ++k)
            EXPECT_LT(rel_err(fit.coefficients[k], ref(static_cast<Eigen::Index>(k))), 1e-8);
    }
}

TEST(Ols, InferenceFieldInvariants) {
    oracle::Gen g(5);
    const Matrix x = g.correlated(80, 3);
    const Vector y = g.vector(80);
    const OlsFit fit = ols_fit(x, y, true);
    const double rss = std::inner_product(fit.residuals.begin(), fit.residuals.end(), fit.residuals.begin(), 0.0);
    EXPECT_NEAR(fit.sigma2_hat, rss / (80.0 - 3.0 - 1.0), 1e-14);
    for (std::size_t k = 0; k < fit.f_values.size(); ++k) EXPECT_EQ(fit.f_values[k], fit.t_values[k] * fit.t_values[k]);
    // Residuals orthogonal to every regressor and to the constant.
    const double scale = norm2(fit.residuals);
    EXPECT_LT(std::abs(std::accumulate(fit.residuals.begin(), fit.residuals.end(), 0.0)), 1e-8 * scale * std::sqrt(80.0));
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_LT(std::abs(dot(x.column(j), fit.residuals)), 1e-8 * scale * norm2(x.column(j)));
    // Standard errors from σ̂²(XᵀX)⁻¹.
    Eigen::MatrixXd a(80, 4);
    a << Eigen::VectorXd::Ones(80), oracle::to_eigen(x);
    const Eigen::MatrixXd cov = fit.sigma2_hat * (a.transpose() * a).inverse();
    for (Eigen::Index k = 0; k < 4; ++k)
        EXPECT_LT(rel_err(fit.std_errors[static_cast<std::size_t>(k)], std::sqrt(cov(k, k))), 1e-8);
}

TEST(Ols, ProjectionIsIdempotent) {
    oracle::Gen g(8);
    const Matrix x = g.correlated(60, 5);
    const OlsFit first = ols_fit(x, g.vector(60), true);
    const OlsFit second = ols_fit(x, first.fitted, true);
    for (std::size_t i = 0; i < 60; ++i) EXPECT_NEAR(second.fitted[i], first.fitted[i], 1e-9);
}

TEST(Ols, RejectsCollinearColumns) {
    oracle::Gen g(2);
    Matrix x = g.correlated(30, 3);
    for (std::size_t i = 0; i < 30; ++i) x(i, 2) = 2.0 * x(i, 0) - x(i, 1);
    try {
        (void)ols_fit(x, g.vector(30), true);
        FAIL() << "expected RankDeficient";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    }
    EXPECT_THROW((void)ols_fit(x, g.vector(29), true), Error);
}

TEST(Ols, ExampleOneTrainingFit) {
    const Scenario s = gen_example1({ScenarioId::Example1, 2000, 1000, 1});
    const OlsFit fit = ols_fit(s.data.train.features, s.data.train.response, true);
    const double expected_t[] = {43.5, 14.5, 13.6};
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fit.t_value(j), expected_t[j], 0.15 * expected_t[j]) << j;
    EXPECT_NEAR(fit.r2, 0.8326, 0.03);
}

TEST(OlsOmitUpdate, MatchesDirectRefit) {
    oracle::Gen g(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix xz = g.correlated(100, 4);
        const Vector y = g.vector(100);
        const std::size_t z = static_cast<std::size_t>(rep % 4);
        const OlsFit full = ols_fit(xz, y, true);
        const OlsFit aux = ols_fit(xz.drop_column(z), xz.column(z), true);
        const Vector reduced = ols_omit_update(full, aux, z);
        const Eigen::VectorXd direct = oracle::normal_equations(xz.drop_column(z), y, true);
        const double scale = direct.cwiseAbs().maxCoeff();
        for (std::size_t k = 0; k < reduced.size(); ++k)
            EXPECT_LE(std::abs(reduced[k] - direct(static_cast<Eigen::Index>(k))), 1e-8 * scale);
    }
}

TEST(OlsOmitUpdate, OrthogonalRegressorLeavesCoefficientsUnchanged) {
    // Columns centred and exactly orthogonal: α̂ = 0.
    const Matrix xz{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {2, 0}, {-2, 0}};
    const Vector y{1.0, 0.3, -0.2, 2.0, 1.1, -0.7};
    const OlsFit full = ols_fit(xz, y, true);
    const OlsFit aux = ols_fit(xz.drop_column(1), xz.column(1), true);
    const Vector reduced = ols_omit_update(full, aux, 1);
    EXPECT_NEAR(reduced[1], full.slope(0), 1e-14);
}

TEST(SymEigen, TrivialSpectra) {
    const SymEigen id = sym_eigen(Matrix::identity(3));
    for (double l : id.eigenvalues) EXPECT_DOUBLE_EQ(l, 1.0);
    const SymEigen d = sym_eigen(Matrix::diagonal(Vector{3, 1, 2}));
    EXPECT_EQ(d.eigenvalues, (Vector{3, 2, 1}));
    EXPECT_EQ(d.eigenvectors.column(0), (Vector{1, 0, 0}));
    EXPECT_EQ(d.eigenvectors.column(1), (Vector{0, 0, 1}));
    EXPECT_EQ(d.eigenvectors.column(2), (Vector{0, 1, 0}));
}

TEST(SymEigen, RandomReconstructionAndInvariants) {
    oracle::Gen g(99);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix b = g.correlated(8, 8);
        const Matrix s = b + b.transpose();
        const SymEigen e = sym_eigen(s);
        const Eigen::MatrixXd q = oracle::to_eigen(e.eigenvectors);
        const Eigen::VectorXd l = oracle::to_eigen(e.eigenvalues);
        const Eigen::MatrixXd se = oracle::to_eigen(s);
        const double norm = se.norm();
        EXPECT_LT((q * l.asDiagonal() * q.transpose() - se).norm(), 1e-9 * norm);
        EXPECT_LT((q.transpose() * q - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
        for (Eigen::Index i = 0; i < 8; ++i) {
            EXPECT_LT((se * q.col(i) - l(i) * q.col(i)).norm(), 1e-9 * norm);
            if (i > 0) {
                EXPECT_GE(l(i - 1), l(i));
            }
            Eigen::Index arg = 0;
            q.col(i).cwiseAbs().maxCoeff(&arg);
            EXPECT_GT(q(arg, i), 0.0);
        }
        EXPECT_LT(rel_err(l.sum(), se.trace()), 1e-9);
        EXPECT_LT(rel_err(l.squaredNorm(), se.squaredNorm()), 1e-9);
        // Same spectrum as Eigen's solver.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(se);
        for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(l(i), ref.eigenvalues()(7 - i), 1e-9 * norm);
    }
}

TEST(SymEigen, RejectsAsymmetricInput) {
    try {
        (void)sym_eigen(Matrix{{1, 2}, {0, 1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
    }
}

TEST(FQuantile, RoundTripAndMonotone) {
    const double median = f_quantile(1, 10, 0.5);
    EXPECT_NEAR(f_cdf(median, 1, 10), 0.5, 1e-9);
    double prev = 0.0;
    for (double p = 0.05; p < 1.0; p += 0.05) {
        const double q = f_quantile(3, 17, p);
        EXPECT_GT(q, prev);
        EXPECT_NEAR(f_cdf(q, 3, 17), p, 1e-9);
        prev = q;
    }
}

TEST(FQuantile, MatchesQuadratureOracle) {
    // Frozen from oracle::f_quantile_quadrature; recomputed below as a check on the oracle itself.
    EXPECT_NEAR(f_quantile(1, 996, 0.99), oracle::f_quantile_quadrature(1, 996, 0.99), 1e-6);
    EXPECT_NEAR(f_quantile(2, 20, 0.95), oracle::f_quantile_quadrature(2, 20, 0.95), 1e-6);
    EXPECT_NEAR(f_quantile(2, 20, 0.95), 3.4928284767, 1e-6);
}

TEST(FQuantile, InvalidProbability) {
    for (double p : {0.0, 1.0, -0.1, 1.5}) {
        try {
            (void)f_quantile(1, 10, p);
            FAIL() << p;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidProbability);
        }
    }
}

TEST(Rng, ReproducibleStream) {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        if (i == 0) {
            EXPECT_NE(x, c.next_u64());
        }
    }
    Rng r(7);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(13), 13u);
}

TEST(Rng, PermutationIsBijection) {
    Rng r(5);
    auto p = random_permutation(257, r);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
}

TEST(MvnSample, IdentityCovariance) {
    Rng r(17);
    const Matrix x = mvn_sample(Vector(3, 0.0), Matrix::identity(3), 100000, r);
    const Matrix c = covariance(x);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c(i, j), i == j ? 1.0 : 0.0, 0.02);
}

TEST(MvnSample, HighCorrelation) {
    Rng r(18);
    const Matrix cov{{1, 0, 0}, {0, 1, 0.95}, {0, 0.95, 1}};
    const Matrix x = mvn_sample(Vector(3, 0.0), cov, 100000, r);
    EXPECT_NEAR(pearson(x.column(1), x.column(2)), 0.95, 0.01);
}

TEST(MvnSample, EdgeCases) {
    Rng r(1);
    EXPECT_EQ(mvn_sample(Vector(2, 0.0), Matrix::identity(2), 0, r).rows(), 0u);
    // Singular PSD covariance is accepted.
    const Matrix x = mvn_sample(Vector(2, 0.0), Matrix{{1, 1}, {1, 1}}, 10, r);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(x(i, 0), x(i, 1), 1e-12);
    try {
        (void)mvn_sample(Vector(2, 0.0), Matrix{{1, 2}, {2, 1}}, 10, r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPositiveSemiDefinite);
    }
}

TEST(PartialCorrelation, IndependentColumnsNearZero) {
    Rng r(3);
    const Matrix x = mvn_sample(Vector(4, 0.0), Matrix::identity(4), 10000, r);
    EXPECT_NEAR(partial_correlation_direct(x, 0, 1), 0.0, 0.03);
}

TEST(PartialCorrelation, MatchesInverseCovariance) {
    oracle::Gen g(4);
    const Matrix x = g.correlated(200, 5);
    const Eigen::MatrixXd e = oracle::to_eigen(x);
    const Eigen::MatrixXd c = e.rowwise() - e.colwise().mean();
    const Eigen::MatrixXd s_inv = (c.transpose() * c / 199.0).inverse();
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t k = j + 1; k < 5; ++k) {
            const auto jj = static_cast<Eigen::Index>(j), kk = static_cast<Eigen::Index>(k);
            const double ref = -s_inv(jj, kk) / std::sqrt(s_inv(jj, jj) * s_inv(kk, kk));
            EXPECT_NEAR(partial_correlation_direct(x, j, k), ref, 1e-10);
        }
}

TEST(PartialCorrelation, ExampleOneTestSample) {
    const Scenario s = gen_example1({ScenarioId::Example1, 2000, 1000, 1});
    EXPECT_NEAR(partial_correlation_direct(s.data.test.features, 1, 2), 0.95, 0.01);
}

TEST(PartialCorrelation, Preconditions) {
    oracle::Gen g(6);
    EXPECT_THROW((void)partial_correlation_direct(g.correlated(20, 2), 0, 1), Error);
    Matrix x = g.correlated(20, 3);
    for (std::size_t i = 0; i < 20; ++i) x(i, 2) = x(i, 0) + x(i, 1);
    try {
        (void)partial_correlation_direct(x, 0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    }
}

TEST(ResidualAngle, CosineIdentity) {
    // cos∠(a - P_b a, b - P_a b) = -cos∠(a, b).
    oracle::Gen g(10);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t d = g.index(2, 20);
        const Eigen::VectorXd a = oracle::to_eigen(g.vector(d));
        const Eigen::VectorXd b = oracle::to_eigen(g.vector(d));
        const Eigen::VectorXd ra = a - a.dot(b) / b.dot(b) * b;
        const Eigen::VectorXd rb = b - b.dot(a) / a.dot(a) * a;
        const double lhs = ra.dot(rb) / (ra.norm() * rb.norm());
        const double rhs = -a.dot(b) / (a.norm() * b.norm());
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}
