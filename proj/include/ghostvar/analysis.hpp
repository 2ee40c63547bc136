#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/io/csv.hpp"
#include "ghostvar/io/split.hpp"
#include "ghostvar/linalg/random.hpp"
#include "ghostvar/predictors/external.hpp"
#include "ghostvar/predictors/linear.hpp"
#include "ghostvar/predictors/mlp.hpp"
#include "ghostvar/relevance.hpp"
#include "ghostvar/relmatrix.hpp"
#include "ghostvar/synthetic.hpp"

namespace ghostvar {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct MethodSet {
    bool ghost = false;
    bool permutation = false;
    bool omission = false;

    [[nodiscard]] bool empty() const noexcept { return !ghost && !permutation && !omission; }
};

/// Comma-separated list of ghost, perm|permutation, omission|omit, all.
inline MethodSet parse_methods(const std::string& text) {
    MethodSet m;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string tok = text.substr(start, end - start);
        start = end + 1;
        if (tok.empty()) continue;
        if (tok == "ghost" || tok == "gh")
            m.ghost = true;
        else if (tok == "perm" || tok == "permutation" || tok == "rp")
            m.permutation = true;
        else if (tok == "omission" || tok == "omit" || tok == "om")
            m.omission = true;
        else if (tok == "all")
            m.ghost = m.permutation = m.omission = true;
        else
            fail(ErrorCode::InvalidArgument, "unknown method '" + tok + "'");
    }
    require(!m.empty(), ErrorCode::InvalidArgument, "no relevance method selected");
    return m;
}

enum class ModelFamily { Linear, Basis, Mlp, External };

inline ModelFamily parse_model_family(const std::string& s) {
    if (s == "linear" || s == "lm") return ModelFamily::Linear;
    if (s == "basis" || s == "basis_linear") return ModelFamily::Basis;
    if (s == "mlp" || s == "nnet") return ModelFamily::Mlp;
    if (s == "external") return ModelFamily::External;
    fail(ErrorCode::InvalidArgument, "unknown model family '" + s + "'");
}

inline const char* to_string(ModelFamily f) noexcept {
    switch (f) {
        case ModelFamily::Linear: return "linear";
        case ModelFamily::Basis: return "basis";
        case ModelFamily::Mlp: return "mlp";
        case ModelFamily::External: return "external";
    }
    return "";
}

struct RunConfig {
    // data
    std::string input;       ///< CSV path; empty when a scenario is used
    std::string test_input;  ///< optional CSV with a fixed test sample
    std::optional<ScenarioId> scenario;
    std::size_t scenario_n1 = 2000;
    std::size_t scenario_n2 = 1000;
    bool scenario_zero_correlation = false;
    std::string response = "y";
    double split_fraction = 0.7;
    std::optional<std::size_t> train_rows;  ///< overrides split_fraction

    // model
    ModelFamily model = ModelFamily::Linear;
    std::string basis;  ///< basis family; empty with a scenario means its oracle basis
    MlpConfig mlp;
    std::string predictor_cmd;
    double predictor_timeout = 60.0;

    // analysis
    MethodSet methods{true, true, false};
    std::uint64_t seed = 1;
    double alpha = 0.01;
    double eigen_threshold = 0.01;
    std::size_t permutation_repeats = 1;
    bool ghosts_on_train = false;
    Linkage linkage = Linkage::Average;
    std::vector<std::vector<std::string>> omit_groups;
    std::size_t threads = 1;

    std::string out_dir;

    void validate() const {
        require(input.empty() != !scenario.has_value(), ErrorCode::InvalidArgument,
                "give exactly one of an input file or a scenario");
        require(!methods.empty(), ErrorCode::InvalidArgument, "no relevance method selected");
        require(split_fraction > 0.0 && split_fraction < 1.0, ErrorCode::InvalidArgument,
                "split fraction must lie in (0,1)");
        require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
        require(eigen_threshold >= 0.0 && eigen_threshold <= 1.0, ErrorCode::InvalidArgument,
                "eigen threshold must lie in [0,1]");
        require(permutation_repeats >= 1, ErrorCode::InvalidArgument, "permutation repeats must be at least 1");
        require(model != ModelFamily::External || !predictor_cmd.empty(), ErrorCode::InvalidArgument,
                "external model needs a predictor command");
        require(model != ModelFamily::External || (!methods.omission && omit_groups.empty()),
                ErrorCode::InvalidArgument, "omission needs a refittable model family, not an external predictor");
        require(predictor_timeout > 0.0, ErrorCode::InvalidArgument, "predictor timeout must be positive");
    }
};

/// V or Ṽ with everything derived from it.
struct MatrixSummary {
    RelevanceMatrix matrix;
    std::vector<EigenComponent> eigen;
    std::optional<ClusterTree> tree;
    std::optional<PartialCorrelationMatrix> partial_correlations;  ///< linear family, ghost only
};

struct GroupOmission {
    std::vector<std::string> variables;
    double relevance = 0.0;
    double scaled = 0.0;
};

/// Per-variable F statistics of a linear fit next to the ghost relevance.
struct LinearDiagnostics {
    Vector f_values;
    Vector f_transformed;
    Vector scaled_ghost;  ///< (n₁/σ̂²)·Rel_Gh
    double sigma2_hat = 0.0;
    double r2 = 0.0;
    double r2_adjusted = 0.0;
    double max_identity_discrepancy = 0.0;
};

struct ReportBundle {
    RunConfig config;
    std::string config_hash;
    ModelInfo model;
    RelevanceReport relevance;
    std::optional<MatrixSummary> ghost;
    std::optional<MatrixSummary> permutation;
    std::vector<GroupOmission> groups;
    std::optional<LinearDiagnostics> linear;
    std::vector<std::string> warnings;
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(name) + ": " + e.message());
    }
}

struct RunSeeds {
    std::uint64_t split;
    std::uint64_t permutation;
    std::uint64_t model;
};

inline RunSeeds derive_seeds(std::uint64_t seed) {
    Rng rng(seed);
    RunSeeds s{};
    s.split = rng.next_u64();
    s.permutation = rng.next_u64();
    s.model = rng.next_u64();
    return s;
}

inline SplitSample load_data(const RunConfig& cfg, const RunSeeds& seeds, std::optional<BasisSpec>& oracle_basis) {
    if (cfg.scenario) {
        ScenarioSpec spec{*cfg.scenario, cfg.scenario_n1, cfg.scenario_n2, cfg.seed, cfg.scenario_zero_correlation};
        Scenario sc = generate_scenario(spec);
        oracle_basis = sc.oracle_basis;
        return std::move(sc.data);
    }
    Dataset data = ingest_csv(cfg.input, cfg.response);
    if (!cfg.test_input.empty()) {
        Dataset test = ingest_csv(cfg.test_input, cfg.response);
        check_schema(data, test);
        return {std::move(data), std::move(test)};
    }
    if (cfg.train_rows) return split_rows(data, *cfg.train_rows, seeds.split);
    return split(data, cfg.split_fraction, seeds.split);
}

inline std::optional<ModelFactory> make_factory(const RunConfig& cfg, const SplitSample& data,
                                                const std::optional<BasisSpec>& oracle_basis, std::uint64_t model_seed) {
    switch (cfg.model) {
        case ModelFamily::Linear: return ModelFactory(fit_linear);
        case ModelFamily::Basis: {
            BasisSpec basis;
            if (!cfg.basis.empty())
                basis = parse_basis(cfg.basis);
            else if (oracle_basis)
                basis = *oracle_basis;
            else
                fail(ErrorCode::InvalidArgument, "basis model needs --basis");
            validate_basis(basis, data.p());
            return basis_linear_factory(data.names(), basis);
        }
        case ModelFamily::Mlp: {
            const MlpConfig mlp = cfg.mlp;
            return ModelFactory([mlp, model_seed](const Dataset& train) {
                Rng rng(model_seed);
                return fit_mlp(train, mlp, rng);
            });
        }
        case ModelFamily::External: return std::nullopt;
    }
    return std::nullopt;
}

/// Partial correlations are added when `slopes` (linear family only) is given.
inline MatrixSummary summarize(RelevanceMatrix rm, const RunConfig& cfg, const Vector* slopes,
                               std::vector<std::string>& warnings) {
    MatrixSummary s;
    s.eigen = eigen_report(rm, cfg.eigen_threshold);
    if (rm.p() >= 2) {
        try {
            s.tree = cluster_variables(rm, cfg.linkage);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateSimilarity) throw;
            warnings.push_back(std::string(to_string(rm.method)) + " clustering skipped: " + e.message());
        }
    }
    if (slopes) {
        s.partial_correlations = partial_corr_from_V(rm, *slopes, false);
        if (!s.partial_correlations->undefined.empty())
            warnings.emplace_back("partial correlations undefined for variables with zero relevance");
    }
    s.matrix = std::move(rm);
    return s;
}

}  // namespace detail

/// Every field that can change an emitted number; paths of the output
/// directory and thread count are left out.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["input"] = cfg.input;
    j["test_input"] = cfg.test_input;
    j["scenario"] = cfg.scenario ? nlohmann::json(to_string(*cfg.scenario)) : nlohmann::json(nullptr);
    j["scenario_n1"] = cfg.scenario_n1;
    j["scenario_n2"] = cfg.scenario_n2;
    j["scenario_zero_correlation"] = cfg.scenario_zero_correlation;
    j["response"] = cfg.response;
    j["split_fraction"] = cfg.split_fraction;
    j["train_rows"] = cfg.train_rows ? nlohmann::json(*cfg.train_rows) : nlohmann::json(nullptr);
    j["model"] = to_string(cfg.model);
    j["basis"] = cfg.basis;
    j["mlp"] = {{"hidden", cfg.mlp.hidden},
                {"decay", cfg.mlp.decay},
                {"epochs", cfg.mlp.epochs},
                {"learning_rate", cfg.mlp.learning_rate},
                {"init_range", cfg.mlp.init_range}};
    j["predictor_cmd"] = cfg.predictor_cmd;
    nlohmann::json methods = nlohmann::json::array();
    if (cfg.methods.ghost) methods.push_back("ghost");
    if (cfg.methods.permutation) methods.push_back("permutation");
    if (cfg.methods.omission) methods.push_back("omission");
    j["methods"] = methods;
    j["seed"] = cfg.seed;
    j["alpha"] = cfg.alpha;
    j["eigen_threshold"] = cfg.eigen_threshold;
    j["permutation_repeats"] = cfg.permutation_repeats;
    j["ghosts_on_train"] = cfg.ghosts_on_train;
    j["linkage"] = to_string(cfg.linkage);
    j["omit_groups"] = cfg.omit_groups;
    return j;
}

/// FNV-1a 64 of the canonical (sorted-key, compact) config JSON, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    return out;
}

inline ReportBundle run_analysis(const RunConfig& cfg) {
    detail::stage("config", [&] { cfg.validate(); });
    const auto seeds = detail::derive_seeds(cfg.seed);

    ReportBundle out;
    out.config = cfg;
    out.config_hash = config_hash(cfg);

    std::optional<BasisSpec> oracle_basis;
    const SplitSample data = detail::stage("data", [&] { return detail::load_data(cfg, seeds, oracle_basis); });
    const std::size_t p = data.p();
    require(data.test.rows() > p, ErrorCode::TooFewRows, "data: test sample needs more rows than variables");

    const auto factory = detail::stage("fit", [&] { return detail::make_factory(cfg, data, oracle_basis, seeds.model); });
    const PredictionFunction model = detail::stage("fit", [&] {
        if (factory) return (*factory)(data.train);
        return external_predictor(ExternalPredictorConfig{{"/bin/sh", "-c", cfg.predictor_cmd}, cfg.predictor_timeout, 100000},
                                  data.names());
    });
    out.model = model.info();

    RelevanceReport& rep = out.relevance;
    rep.variables = data.names();
    rep.n1 = data.train.rows();
    rep.n2 = data.test.rows();
    rep.alpha = cfg.alpha;
    rep.mspe_hat = detail::stage("mspe", [&] { return estimate_mspe(model, data.test); });

    const bool linear = cfg.model == ModelFamily::Linear;
    const OlsFit* ols = linear ? &model.model_as<LinearModel>()->ols() : nullptr;
    if (linear) rep.critical_value = critical_value(ols->sigma2_hat, rep.n1, p, cfg.alpha);

    if (cfg.methods.ghost) {
        detail::stage("ghost", [&] {
            const GhostColumnSet ghosts = cfg.ghosts_on_train ? fit_ghosts(data.train.features, data.test.features)
                                                              : fit_ghosts(data.test.features);
            RelevanceMatrix rm = relevance_matrix(build_A(model, data.test, ghosts, cfg.threads));
            rep.ghost = rm.diagonal();
            const Vector slopes = linear ? ols->slopes() : Vector{};
            out.ghost = detail::summarize(std::move(rm), cfg, linear ? &slopes : nullptr, out.warnings);
        });
    }
    if (cfg.methods.permutation) {
        detail::stage("permutation", [&] {
            Rng rng(seeds.permutation);
            Vector acc(p, 0.0);
            for (std::size_t r = 0; r < cfg.permutation_repeats; ++r) {
                const auto plan = PermutationPlan::generate(rep.n2, p, rng.next_u64());
                RelevanceMatrix rm = relevance_matrix(build_A(model, data.test, plan, cfg.threads));
                for (std::size_t j = 0; j < p; ++j) acc[j] += rm.v(j, j);
                if (r == 0) out.permutation = detail::summarize(std::move(rm), cfg, nullptr, out.warnings);
            }
            for (double& v : acc) v /= static_cast<double>(cfg.permutation_repeats);
            rep.permutation = acc;
        });
    }
    if (cfg.methods.omission || !cfg.omit_groups.empty()) {
        detail::stage("omission", [&] {
            require(factory.has_value(), ErrorCode::InvalidArgument, "omission needs a refittable model family");
            if (cfg.methods.omission) {
                Vector om(p);
                for (std::size_t j = 0; j < p; ++j) {
                    const std::size_t idx[] = {j};
                    om[j] = relevance_omission(*factory, model, data, idx);
                }
                rep.omission = om;
            }
            for (const auto& group : cfg.omit_groups) {
                std::vector<std::size_t> idx;
                for (const auto& name : group) idx.push_back(data.train.index_of(name));
                const double rel = relevance_omission(*factory, model, data, idx);
                out.groups.push_back({group, rel, rep.mspe_hat > 0.0 ? rel / rep.mspe_hat : 0.0});
            }
        });
    }
    rep.rescale();

    if (linear && cfg.methods.ghost && !cfg.ghosts_on_train) {
        detail::stage("diagnostics", [&] {
            const GhostFIdentityCheck chk = ghost_f_identity_check(data);
            LinearDiagnostics d;
            for (const auto& row : chk.rows) {
                d.f_values.push_back(row.f_value);
                d.f_transformed.push_back(row.f_transformed);
                d.scaled_ghost.push_back(row.scaled_relevance);
            }
            d.sigma2_hat = ols->sigma2_hat;
            d.r2 = ols->r2;
            d.r2_adjusted = ols->r2_adjusted;
            d.max_identity_discrepancy = chk.max_f_discrepancy;
            out.linear = std::move(d);
        });
    }
    if (rep.n2 < p) out.warnings.emplace_back("test sample has fewer rows than variables");
    return out;
}

}  // namespace ghostvar
