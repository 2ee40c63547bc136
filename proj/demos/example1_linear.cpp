// Three correlated regressors, the last two nearly collinear. Compares ghost
// and permutation relevance for a linear fit and prints the relevance matrices.
#include <cstdio>

#include "ghostvar/ghostvar.hpp"

using namespace ghostvar;

namespace {

void print_matrix(const char* title, const Matrix& m) {
    std::printf("%s\n", title);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) std::printf(" %9.4f", m(i, j));
        std::printf("\n");
    }
}

void print_spectrum(const RelevanceMatrix& rm) {
    for (const EigenComponent& c : eigen_report(rm, 0.0)) {
        std::printf("  lambda%zu = %.4f (%.1f%%) u =", c.index + 1, c.eigenvalue, 100.0 * c.explained);
        for (double u : c.eigenvector) std::printf(" %7.3f", u);
        std::printf("\n");
    }
}

}  // namespace

int main() {
    const Scenario sc = generate_scenario({ScenarioId::Example1, 2000, 1000, 1});
    const PredictionFunction model = fit_linear(sc.data.train);
    const OlsFit& ols = model.model_as<LinearModel>()->ols();
    std::printf("R2 %.4f\n", ols.r2);
    for (std::size_t j = 0; j < 3; ++j)
        std::printf("  %s beta %.4f t %.2f F %.2f\n", sc.data.names()[j].c_str(), ols.slope(j), ols.t_value(j), ols.f_value(j));

    const double cv = critical_value(ols.sigma2_hat, sc.data.train.rows(), 3, 0.01);
    std::printf("critical value at 1%%: %.5f\n\n", cv);

    const RelevanceMatrix gh = relevance_matrix(build_A(model, sc.data.test, fit_ghosts(sc.data.test.features)));
    print_matrix("ghost V", gh.v);
    print_spectrum(gh);

    const RelevanceMatrix rp =
        relevance_matrix(build_A(model, sc.data.test, PermutationPlan::generate(sc.data.test.rows(), 3, 1)));
    print_matrix("\npermutation V", rp.v);
    print_spectrum(rp);

    const PartialCorrelationMatrix pc = partial_corr_from_V(gh, ols.slopes());
    print_matrix("\npartial correlations from ghost V", pc.rho);
    return 0;
}
