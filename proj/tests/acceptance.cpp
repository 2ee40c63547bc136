// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ghostvar/ghostvar.hpp"
#include "support/oracles.hpp"

using namespace ghostvar;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel_gap(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

/// The shared battery: 20 linear instances, n1 = 400, n2 = 200, p cycling through 2..8.
std::vector<SplitSample> battery() {
    oracle::Gen g(20240601);
    std::vector<SplitSample> out;
    for (std::size_t i = 0; i < 20; ++i) out.push_back(oracle::linear_instance(g, 400, 200, 2 + i % 7));
    return out;
}

/// Coefficients by QR; the inverse Gram matrix is only used for F statistics.
struct OracleFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd inv;
    double sigma2 = 0.0;
};

OracleFit oracle_fit(const Dataset& d) {
    const Eigen::Index n = static_cast<Eigen::Index>(d.rows());
    Eigen::MatrixXd a(n, static_cast<Eigen::Index>(d.cols()) + 1);
    a << Eigen::VectorXd::Ones(n), oracle::to_eigen(d.features);
    OracleFit f;
    f.inv = (a.transpose() * a).inverse();
    f.beta = a.colPivHouseholderQr().solve(oracle::to_eigen(d.response));
    f.sigma2 = (oracle::to_eigen(d.response) - a * f.beta).squaredNorm() / static_cast<double>(n - a.cols());
    return f;
}

double oracle_f(const OracleFit& f, std::size_t j) {
    const auto k = static_cast<Eigen::Index>(j) + 1;
    return f.beta(k) * f.beta(k) / (f.sigma2 * f.inv(k, k));
}

ModelFactory linear_factory() {
    return [](const Dataset& d) { return fit_linear(d); };
}

Outcome criterion1(const std::vector<SplitSample>& cases) {
    double worst_f = 0.0, worst_id = 0.0;
    for (const auto& s : cases) {
        const PredictionFunction m = fit_linear(s.train);
        const Vector rel = relevance_ghost(m, s.test, fit_ghosts(s.test.features));
        const OracleFit of = oracle_fit(s.train);
        const Eigen::MatrixXd x1 = oracle::to_eigen(s.train.features);
        const Eigen::MatrixXd x2 = oracle::to_eigen(s.test.features);
        const double n1 = static_cast<double>(s.train.rows()), n2 = static_cast<double>(s.test.rows());
        for (std::size_t j = 0; j < s.p(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double s2_test = oracle::residual_on_rest(x2, jj).squaredNorm() / n2;
            const double s2_train = oracle::residual_on_rest(x1, jj).squaredNorm() / n1;
            worst_f = std::max(worst_f, rel_gap(n1 / of.sigma2 * rel[j], oracle_f(of, j) * s2_test / s2_train));
            const double b = of.beta(jj + 1);
            worst_id = std::max(worst_id, rel_gap(rel[j], b * b * s2_test));
        }
    }
    return {worst_f < 1e-8 && worst_id < 1e-10,
            "max rel gap F form " + fmt("%.2e", worst_f) + ", beta^2 sigma^2 form " + fmt("%.2e", worst_id)};
}

Outcome criterion2(const std::vector<SplitSample>& cases) {
    double worst_train = 0.0, worst_test = 0.0;
    for (const auto& s : cases) {
        const PredictionFunction m = fit_linear(s.train);
        const OracleFit of = oracle_fit(s.train);
        const double n1 = static_cast<double>(s.train.rows()), n2 = static_cast<double>(s.test.rows());
        for (std::size_t j = 0; j < s.p(); ++j) {
            const std::size_t omit[] = {j};
            const double tr = relevance_omission_train(linear_factory(), m, s.train, omit);
            worst_train = std::max(worst_train, rel_gap(n1 / of.sigma2 * tr, oracle_f(of, j)));

            const double te = relevance_omission(linear_factory(), m, s, omit);
            const Eigen::VectorXd alpha =
                oracle::least_squares(s.train.features.drop_column(j), s.train.features.column(j), true);
            Eigen::MatrixXd d(static_cast<Eigen::Index>(n2), static_cast<Eigen::Index>(s.p()));
            d << Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n2)), oracle::to_eigen(s.test.features.drop_column(j));
            const double r2 = (oracle::to_eigen(s.test.features.column(j)) - d * alpha).squaredNorm() / n2;
            const double b = of.beta(static_cast<Eigen::Index>(j) + 1);
            worst_test = std::max(worst_test, rel_gap(te, b * b * r2));
        }
    }
    return {worst_train < 1e-8 && worst_test < 1e-10,
            "max rel gap train/F " + fmt("%.2e", worst_train) + ", test closed form " + fmt("%.2e", worst_test)};
}

Outcome criterion3(const std::vector<SplitSample>& cases) {
    double worst_res = 0.0, worst_inv = 0.0;
    for (const auto& s : cases) {
        const PredictionFunction m = fit_linear(s.train);
        const RelevanceMatrix rm = relevance_matrix(build_A(m, s.test, fit_ghosts(s.test.features)));
        const PartialCorrelationMatrix pc = partial_corr_from_V(rm, m.model_as<LinearModel>()->ols().slopes());
        const Eigen::MatrixXd x = oracle::to_eigen(s.test.features);
        const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
        const Eigen::MatrixXd sinv = (xc.transpose() * xc / static_cast<double>(x.rows() - 1)).inverse();
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            for (Eigen::Index k = j + 1; k < x.cols(); ++k) {
                const Eigen::VectorXd rj = oracle::residual_on_rest(x, j);
                const Eigen::VectorXd rk = oracle::residual_on_rest(x, k);
                const double res = rj.dot(rk) / (rj.norm() * rk.norm());
                const double inv = -sinv(j, k) / std::sqrt(sinv(j, j) * sinv(k, k));
                const double got = pc.rho(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
                // Residual-residual correlation of the two ghost regressions is minus the partial correlation.
                worst_res = std::max(worst_res, std::abs(got + res));
                worst_inv = std::max(worst_inv, std::abs(got - inv));
            }
    }
    return {worst_res < 1e-9 && worst_inv < 1e-9,
            "max abs gap residual oracle " + fmt("%.2e", worst_res) + ", inverse covariance " + fmt("%.2e", worst_inv)};
}

Outcome criterion4(const std::vector<SplitSample>& cases) {
    double worst = 0.0, worst_lib = 0.0;
    for (const auto& s : cases) {
        const GhostColumnSet gh = fit_ghosts(s.test.features);
        const Matrix g = ghost_residual_gram(s.test.features, gh);
        const Eigen::MatrixXd x = oracle::to_eigen(s.test.features);
        const double n2 = static_cast<double>(x.rows());
        const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
        const Eigen::MatrixXd sinv = (xc.transpose() * xc / (n2 - 1.0)).inverse();
        Eigen::VectorXd s2(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) s2(j) = oracle::residual_on_rest(x, j).squaredNorm() / (n2 - 1.0);
        const Eigen::MatrixXd rhs = ((n2 - 1.0) / n2) * s2.asDiagonal() * sinv * s2.asDiagonal();
        const Eigen::MatrixXd ge = oracle::to_eigen(g);
        worst = std::max(worst, (ge - rhs).cwiseAbs().maxCoeff() / ge.cwiseAbs().maxCoeff());
        worst_lib = std::max(worst_lib, ghost_gram_check(s.test.features, gh).relative_discrepancy);
    }
    return {worst < 1e-9 && worst_lib < 1e-9,
            "max rel gap vs oracle " + fmt("%.2e", worst) + ", ghost_gram_check " + fmt("%.2e", worst_lib)};
}

Outcome criterion5() {
    oracle::Gen g(5);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t d = g.index(2, 30);
        const Vector a = g.vector(d), b = g.vector(d);
        const Matrix am = Matrix::from_columns({a}), bm = Matrix::from_columns({b});
        const Vector ra = ols_fit(bm, a, false).residuals;
        const Vector rb = ols_fit(am, b, false).residuals;
        const double lhs = dot(ra, rb) / (norm2(ra) * norm2(rb));
        const double rhs = -dot(a, b) / (norm2(a) * norm2(b));
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return {worst < 1e-12, "max abs gap " + fmt("%.2e", worst) + " over 1000 pairs"};
}

Outcome criterion6(const std::vector<SplitSample>& cases) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Dataset& d = cases[i].train;
        const std::size_t z = i % d.cols();
        const OlsFit full = ols_fit(d.features, d.response, true);
        const OlsFit aux = ols_fit(d.features.drop_column(z), d.features.column(z), true);
        const Vector upd = ols_omit_update(full, aux, z);
        const Eigen::VectorXd direct = oracle::least_squares(d.features.drop_column(z), d.response, true);
        for (std::size_t k = 0; k < upd.size(); ++k)
            worst = std::max(worst, std::abs(upd[k] - direct(static_cast<Eigen::Index>(k))));
    }
    return {worst < 1e-8, "max abs gap " + fmt("%.2e", worst)};
}

Outcome criterion7() {
    const Scenario sc = generate_scenario({ScenarioId::Example1, 2000, 1000, kSeed});
    const PredictionFunction m = fit_linear(sc.data.train);
    const CaseVariableMatrix a = build_A(m, sc.data.test, fit_ghosts(sc.data.test.features));
    const RelevanceMatrix v = relevance_matrix(a);
    const std::array<std::array<double, 3>, 3> ref{{{0.926, 0.000, 0.001}, {0.000, 0.106, -0.092}, {0.001, -0.092, 0.090}}};
    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(v.v(j, k) - ref[j][k]));
    const double corr = pearson(a.a.column(1), a.a.column(2));
    const double third = v.explained[2];

    const RelevanceMatrix vt =
        relevance_matrix(build_A(m, sc.data.test, PermutationPlan::generate(1000, 3, kSeed)));
    const Vector rp = vt.diagonal();
    const double spread = *std::ranges::max_element(rp) / *std::ranges::min_element(rp);
    const double min_rp_eig = *std::ranges::min_element(vt.explained);

    const bool ok = worst <= 0.05 && std::abs(corr + 0.95) <= 0.02 && third < 0.01 && spread <= 2.0 && min_rp_eig >= 0.05;
    return {ok, "V max entry gap " + fmt("%.3f", worst) + ", corr(A2,A3) " + fmt("%.4f", corr) + ", 3rd eig " +
                    fmt("%.4f", third) + " of trace, RP max/min " + fmt("%.2f", spread) + ", min RP eig " +
                    fmt("%.3f", min_rp_eig) + " of trace"};
}

/// Smallest number of leaves whose cluster label disagrees with the true group,
/// over all assignments of cluster labels to groups.
std::size_t misassigned(const std::vector<std::size_t>& label, const std::vector<std::size_t>& truth, std::size_t k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t best = label.size();
    do {
        std::size_t miss = 0;
        for (std::size_t i = 0; i < label.size(); ++i) miss += perm[label[i]] != truth[i];
        best = std::min(best, miss);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Outcome criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t m = kExample3BlockSize;
    const Scenario sc = generate_scenario({ScenarioId::Example3, 2000, 1000, kSeed});
    const PredictionFunction model = fit_linear(sc.data.train);
    const RelevanceMatrix v = relevance_matrix(build_A(model, sc.data.test, fit_ghosts(sc.data.test.features)));
    const Vector gh = v.diagonal();
    const Vector rp = relevance_permutation(model, sc.data.test, PermutationPlan::generate(1000, 4 * m, kSeed));

    auto block_min = [&](const Vector& r, std::size_t b) { return *std::min_element(r.begin() + b * m, r.begin() + (b + 1) * m); };
    auto block_max = [&](const Vector& r, std::size_t b) { return *std::max_element(r.begin() + b * m, r.begin() + (b + 1) * m); };
    auto block_mean = [&](const Vector& r, std::size_t b) {
        return std::accumulate(r.begin() + b * m, r.begin() + (b + 1) * m, 0.0) / static_cast<double>(m);
    };
    const double min1 = block_min(gh, 0), max2 = block_max(gh, 1), min2 = block_min(gh, 1);
    const double max34 = std::max(block_max(gh, 2), block_max(gh, 3));
    const bool order12 = min1 > max2;
    const double ratio = std::min(min1, min2) / max34;
    const bool reversed = block_max(rp, 0) < block_min(rp, 1);

    const Vector& lam = v.eigen.eigenvalues;
    const double drop50 = lam[49] / lam[50];
    const double drop99 = lam[98] / lam[99];
    const double tail = std::accumulate(lam.begin() + 100, lam.end(), 0.0) / v.total_relevance;

    std::vector<std::size_t> truth(4 * m);
    for (std::size_t j = 0; j < 4 * m; ++j) truth[j] = std::min<std::size_t>(j / m, 2);
    const std::size_t miss = misassigned(cluster_variables(v, Linkage::Average).cut(3), truth, 3);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool ok = order12 && ratio > 10.0 && reversed && drop50 > 3.0 && drop99 > 3.0 && tail < 0.02 && miss <= 5 &&
                    secs <= 60.0;
    return {ok, std::string("block1>block2 ") + (order12 ? "yes" : "no") + ", min(b1,b2)/max(b3,b4) " + fmt("%.2f", ratio) +
                    " (need >10), RP reversed " + (reversed ? "yes" : "no") + " (means " + fmt("%.3f", block_mean(rp, 0)) +
                    " vs " + fmt("%.3f", block_mean(rp, 1)) + "), l50/l51 " + fmt("%.2f", drop50) + " (need >3), l99/l100 " +
                    fmt("%.2f", drop99) + ", tail " + fmt("%.4f", tail) + ", 3-cluster misassigned " +
                    std::to_string(miss) + " (need <=5), " + fmt("%.1f", secs) + " s"};
}

Outcome criterion9() {
    const Scenario sc = generate_scenario({ScenarioId::Example1, 2000, 1000, kSeed});
    const PredictionFunction m = fit_linear(sc.data.train);
    const Vector beta = m.model_as<LinearModel>()->ols().slopes();
    const Vector rp = relevance_permutation(m, sc.data.test, PermutationPlan::generate(1000, 3, kSeed));
    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const Vector col = sc.data.test.features.column(j);
        const double approx = 2.0 * beta[j] * beta[j] * variance_n(col) * 1000.0 / 999.0;
        worst = std::max(worst, std::abs(rp[j] - approx) / approx);
    }
    const RpStructureCheck chk = rp_matrix_structure_check(m, sc.data.test, PermutationPlan::generate_shared(1000, 3, kSeed));
    return {worst < 0.10 && chk.relative_discrepancy < 0.15,
            "max rel gap Rel_RP vs 2 b^2 Var " + fmt("%.3f", worst) + ", V-tilde structure " +
                fmt("%.3f", chk.relative_discrepancy) + " (shared permutation)"};
}

Outcome criterion10() {
    oracle::Gen g(10);
    const MlpShape shape{3, 5};
    Matrix x = g.correlated(40, 3);
    const Vector y = g.vector(40);
    Vector theta(shape.parameter_count());
    for (double& t : theta) t = g.uniform(-0.5, 0.5);
    const Vector grad = mlp_gradient(shape, theta, x, y, 0.5);
    double worst = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        Vector tp = theta, tm = theta;
        tp[k] += 1e-6;
        tm[k] -= 1e-6;
        const double fd = (mlp_objective(shape, tp, x, y, 0.5) - mlp_objective(shape, tm, x, y, 0.5)) / 2e-6;
        worst = std::max(worst, std::abs(fd - grad[k]) / std::max(std::abs(grad[k]), 1e-3));
    }

    const Scenario sc = generate_scenario({ScenarioId::Example1, 2000, 1000, kSeed});
    const GhostColumnSet gh = fit_ghosts(sc.data.test.features);
    const Vector lin = relevance_ghost(fit_linear(sc.data.train), sc.data.test, gh);
    Rng rng(kSeed);
    const Vector net = relevance_ghost(fit_mlp(sc.data.train, {10, 0.5, 3000, 0.5, 0.5}, rng), sc.data.test, gh);
    auto order = [](const Vector& r) {
        std::vector<std::size_t> o(r.size());
        std::iota(o.begin(), o.end(), std::size_t{0});
        std::ranges::sort(o, [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
        return o;
    };
    const auto ol = order(lin), on = order(net);
    auto show = [](const std::vector<std::size_t>& o) {
        std::string s;
        for (std::size_t j : o) s += (s.empty() ? "x" : ">x") + std::to_string(j + 1);
        return s;
    };
    return {worst < 1e-4 && ol == on && on[0] == 0,
            "gradient rel err " + fmt("%.2e", worst) + ", linear order " + show(ol) + ", mlp order " + show(on)};
}

Outcome criterion11() {
    double worst = 0.0;
    for (double d1 : {1.0, 2.0, 5.0})
        for (double d2 : {10.0, 100.0, 1000.0})
            for (double p : {0.9, 0.95, 0.99})
                worst = std::max(worst, std::abs(f_quantile(d1, d2, p) - oracle::f_quantile_quadrature(d1, d2, p)));
    return {worst < 1e-6, "max abs gap " + fmt("%.2e", worst) + " over 27 grid points"};
}

Outcome criterion12() {
    const Scenario sc = generate_scenario({ScenarioId::Example1, 2000, 1000, kSeed});
    const PredictionFunction lin = fit_linear(sc.data.train);
    std::vector<std::string> argv{GHOSTVAR_LINEAR_PREDICTOR};
    for (double c : lin.model_as<LinearModel>()->ols().coefficients) argv.push_back(format_double(c));
    const PredictionFunction ext = external_predictor({argv, 60.0, 100000}, sc.data.names());
    const GhostColumnSet gh = fit_ghosts(sc.data.test.features);
    const Vector a = relevance_ghost(lin, sc.data.test, gh);
    const Vector b = relevance_ghost(ext, sc.data.test, gh);
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    return {worst < 1e-9, "max abs gap " + fmt("%.2e", worst)};
}

}  // namespace

int main() {
    const auto cases = battery();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"ghost relevance vs F statistic identity", [&] { return criterion1(cases); }},
        {"omission relevance identities", [&] { return criterion2(cases); }},
        {"partial correlations from V", [&] { return criterion3(cases); }},
        {"ghost residual Gram vs inverse test covariance", [&] { return criterion4(cases); }},
        {"residual angle cosine identity", criterion5},
        {"omitted-variable coefficient update", [&] { return criterion6(cases); }},
        {"Example 1 relevance matrices", criterion7},
        {"Example 3 block structure", criterion8},
        {"permutation relevance approximation", criterion9},
        {"MLP gradient and ghost ordering", criterion10},
        {"F quantile vs quadrature", criterion11},
        {"external predictor round trip", criterion12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
