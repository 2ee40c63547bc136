#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ghostvar/ghostvar.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericFailure = 4 };

int exit_code_for(ghostvar::ErrorCode code) {
    using ghostvar::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidProbability:
        case ErrorCode::SpawnFailed: return kConfigError;
        case ErrorCode::ParseError:
        case ErrorCode::MissingResponseColumn:
        case ErrorCode::EmptyFile:
        case ErrorCode::TooFewRows:
        case ErrorCode::SchemaMismatch:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::RankDeficient: return kDataError;
        case ErrorCode::NotSymmetric:
        case ErrorCode::NoConvergence:
        case ErrorCode::NotPositiveSemiDefinite:
        case ErrorCode::NonFinite:
        case ErrorCode::ProtocolViolation:
        case ErrorCode::Timeout:
        case ErrorCode::RefitFailed:
        case ErrorCode::ZeroRelevanceVariable:
        case ErrorCode::DegenerateSimilarity: return kNumericFailure;
    }
    return kNumericFailure;
}

// One line per diagnostic: "ghostvar: error code=<Code> exit=<n> message=<text>".
int report_error(const ghostvar::Error& e) {
    const int code = exit_code_for(e.code());
    std::cerr << "ghostvar: error code=" << ghostvar::to_string(e.code()) << " exit=" << code
              << " message=" << e.message() << '\n';
    return code;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        if (end > start) out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

struct AnalyzeArgs {
    std::string scenario;
    std::string methods = "ghost,perm";
    std::string model = "linear";
    std::string linkage = "average";
    std::vector<std::string> omit_groups;
    std::size_t train_rows = 0;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    ghostvar::require(static_cast<bool>(out), ghostvar::ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    out << text;
}

int run_analyze(ghostvar::RunConfig cfg, const AnalyzeArgs& args) {
    using namespace ghostvar;
    if (!args.scenario.empty()) cfg.scenario = parse_scenario(args.scenario);
    cfg.methods = parse_methods(args.methods);
    cfg.model = parse_model_family(args.model);
    if (!cfg.predictor_cmd.empty()) cfg.model = ModelFamily::External;
    cfg.linkage = parse_linkage(args.linkage);
    if (args.train_rows > 0) cfg.train_rows = args.train_rows;
    for (const auto& g : args.omit_groups) {
        auto names = split_commas(g);
        require(!names.empty(), ErrorCode::InvalidArgument, "empty omission group");
        cfg.omit_groups.push_back(std::move(names));
    }

    const ReportBundle bundle = run_analysis(cfg);
    for (const auto& w : bundle.warnings) std::cerr << "ghostvar: warning " << w << '\n';
    if (cfg.out_dir.empty()) {
        std::cout << report_to_json(bundle).dump(2) << '\n';
    } else {
        const auto files = write_report(bundle, cfg.out_dir);
        for (const auto& f : files) std::cout << (std::filesystem::path(cfg.out_dir) / f).string() << '\n';
    }
    return kOk;
}

int run_scenario(const std::string& id, std::uint64_t seed, std::size_t n1, std::size_t n2, bool zero_corr,
                 const std::string& out_dir) {
    using namespace ghostvar;
    const Scenario sc = generate_scenario({parse_scenario(id), n1, n2, seed, zero_corr});
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    require(!ec, ErrorCode::InvalidArgument, "cannot create output directory '" + out_dir + "'");
    const std::filesystem::path dir(out_dir);
    export_csv((dir / "train.csv").string(), sc.data.train);
    export_csv((dir / "test.csv").string(), sc.data.test);

    nlohmann::json truth{{"scenario", id},
                         {"seed", seed},
                         {"n1", n1},
                         {"n2", n2},
                         {"zero_correlation", zero_corr},
                         {"variables", sc.data.names()},
                         {"noise_variance", sc.truth.noise_variance},
                         {"coefficients", sc.truth.coefficients},
                         {"conditional_variances", sc.truth.conditional_variances}};
    nlohmann::json cov = nlohmann::json::array();
    for (std::size_t i = 0; i < sc.truth.covariance.rows(); ++i) cov.push_back(sc.truth.covariance.column(i));
    truth["covariance"] = cov;
    if (sc.oracle_basis) {
        std::string basis;
        for (const auto& t : *sc.oracle_basis) {
            if (!basis.empty()) basis += ',';
            switch (t.kind) {
                case BasisTerm::Kind::Identity: basis += "id:" + std::to_string(t.j); break;
                case BasisTerm::Kind::Cosine: basis += "cos:" + std::to_string(t.j); break;
                case BasisTerm::Kind::Product: basis += "prod:" + std::to_string(t.j) + ":" + std::to_string(t.k); break;
            }
        }
        truth["oracle_basis"] = basis;
    }
    write_text(dir / "truth.json", truth.dump(2) + "\n");
    for (const char* f : {"train.csv", "test.csv", "truth.json"}) std::cout << (dir / f).string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable relevance for prediction models: ghost variables, permutations, omission"};
    app.set_version_flag("--version", ghostvar::kVersion);
    app.require_subcommand(1);

    ghostvar::RunConfig cfg;
    AnalyzeArgs args;
    auto* analyze = app.add_subcommand("analyze", "Fit a model and compute relevance measures");
    analyze->add_option("--input", cfg.input, "CSV file with a header row");
    analyze->add_option("--test-input", cfg.test_input, "CSV file used as the test sample (no splitting)");
    analyze->add_option("--scenario", args.scenario, "Synthetic scenario instead of --input")
        ->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
    analyze->add_option("--n1", cfg.scenario_n1, "Scenario training size")->capture_default_str();
    analyze->add_option("--n2", cfg.scenario_n2, "Scenario test size")->capture_default_str();
    analyze->add_flag("--zero-correlation", cfg.scenario_zero_correlation, "Scenario with uncorrelated features");
    analyze->add_option("--response", cfg.response, "Response column")->capture_default_str();
    analyze->add_option("--split", cfg.split_fraction, "Training fraction")->capture_default_str();
    analyze->add_option("--train-rows", args.train_rows, "Training rows (overrides --split)");
    analyze->add_option("--model", args.model, "linear, basis, mlp or external")->capture_default_str();
    analyze->add_option("--basis", cfg.basis, "Basis terms, e.g. cos:0,prod:1:2,id:3");
    analyze->add_option("--hidden", cfg.mlp.hidden, "MLP hidden units")->capture_default_str();
    analyze->add_option("--decay", cfg.mlp.decay, "MLP weight decay")->capture_default_str();
    analyze->add_option("--epochs", cfg.mlp.epochs, "MLP training epochs")->capture_default_str();
    analyze->add_option("--lr", cfg.mlp.learning_rate, "MLP learning rate")->capture_default_str();
    analyze->add_option("--predictor-cmd", cfg.predictor_cmd, "External predictor command (run through /bin/sh)");
    analyze->add_option("--timeout", cfg.predictor_timeout, "External predictor timeout, seconds")->capture_default_str();
    analyze->add_option("--methods", args.methods, "ghost, perm, omission or all, comma separated")
        ->capture_default_str();
    analyze->add_option("--omit-group", args.omit_groups, "Variables omitted together, comma separated (repeatable)");
    analyze->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    analyze->add_option("--alpha", cfg.alpha, "Level of the critical value")->capture_default_str();
    analyze->add_option("--eigen-threshold", cfg.eigen_threshold, "Minimum explained fraction in the eigen report")
        ->capture_default_str();
    analyze->add_option("--permutation-repeats", cfg.permutation_repeats, "Permutations averaged per variable")
        ->capture_default_str();
    analyze->add_flag("--ghosts-on-train", cfg.ghosts_on_train, "Fit ghost regressions on the training sample");
    analyze->add_option("--linkage", args.linkage, "average, complete or single")->capture_default_str();
    analyze->add_option("--threads", cfg.threads, "Worker threads for replaced-prediction passes")
        ->capture_default_str();
    analyze->add_option("--out", cfg.out_dir, "Output directory (JSON to stdout when omitted)");

    std::string scenario_id = "ex1";
    std::uint64_t scenario_seed = 1;
    std::size_t n1 = 2000, n2 = 1000;
    bool zero_corr = false;
    std::string scenario_out;
    auto* scenario = app.add_subcommand("scenario", "Write a synthetic scenario as train/test CSV files");
    scenario->add_option("--id", scenario_id, "ex1, ex2 or ex3")
        ->check(CLI::IsMember({"ex1", "ex2", "ex3"}))
        ->capture_default_str();
    scenario->add_option("--seed", scenario_seed, "Random seed")->capture_default_str();
    scenario->add_option("--n1", n1, "Training size")->capture_default_str();
    scenario->add_option("--n2", n2, "Test size")->capture_default_str();
    scenario->add_flag("--zero-correlation", zero_corr, "Uncorrelated features");
    scenario->add_option("--out", scenario_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*analyze) return run_analyze(cfg, args);
        return run_scenario(scenario_id, scenario_seed, n1, n2, zero_corr, scenario_out);
    } catch (const ghostvar::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "ghostvar: error code=Internal exit=" << kNumericFailure << " message=" << e.what() << '\n';
        return kNumericFailure;
    }
}
