#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghostvar/analysis.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/io/csv.hpp"
#include "ghostvar/io/svg.hpp"

namespace ghostvar {

namespace detail {

using nlohmann::json;

inline json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));  // NaN serializes as null
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json optional_vector(const std::optional<Vector>& v) { return v ? json(*v) : json(nullptr); }

inline json tree_json(const ClusterTree& t) {
    json merges = json::array();
    for (const auto& m : t.merges)
        merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
    return {{"linkage", to_string(t.linkage)}, {"labels", t.labels}, {"merges", merges}};
}

inline json summary_json(const MatrixSummary& s) {
    json eig = json::array();
    for (const auto& e : s.eigen)
        eig.push_back({{"index", e.index}, {"eigenvalue", e.eigenvalue}, {"explained", e.explained},
                       {"eigenvector", e.eigenvector}});
    json j{{"method", to_string(s.matrix.method)},
           {"variables", s.matrix.names},
           {"matrix", matrix_json(s.matrix.v)},
           {"centered_covariance", matrix_json(s.matrix.centered_covariance)},
           {"total_relevance", s.matrix.total_relevance},
           {"eigenvalues", s.matrix.eigen.eigenvalues},
           {"explained", s.matrix.explained},
           {"eigen_report", eig},
           {"cluster_tree", s.tree ? tree_json(*s.tree) : json(nullptr)},
           {"partial_correlations", nullptr}};
    if (s.partial_correlations) j["partial_correlations"] = matrix_json(s.partial_correlations->rho);
    return j;
}

}  // namespace detail

/// The report document; validates against schema/report.schema.json.
inline nlohmann::json report_to_json(const ReportBundle& b) {
    using detail::json;
    const RelevanceReport& r = b.relevance;
    json rel{{"variables", r.variables},
             {"ghost", detail::optional_vector(r.ghost)},
             {"permutation", detail::optional_vector(r.permutation)},
             {"omission", detail::optional_vector(r.omission)},
             {"ghost_scaled", detail::optional_vector(r.ghost_scaled)},
             {"permutation_scaled", detail::optional_vector(r.permutation_scaled)},
             {"omission_scaled", detail::optional_vector(r.omission_scaled)},
             {"mspe_hat", r.mspe_hat},
             {"critical_value", r.critical_value ? json(*r.critical_value) : json(nullptr)},
             {"n1", r.n1},
             {"n2", r.n2},
             {"alpha", r.alpha}};
    json groups = json::array();
    for (const auto& g : b.groups)
        groups.push_back({{"variables", g.variables}, {"relevance", g.relevance}, {"scaled", g.scaled}});
    json linear = nullptr;
    if (b.linear)
        linear = {{"f_values", b.linear->f_values},
                  {"f_transformed", b.linear->f_transformed},
                  {"scaled_ghost", b.linear->scaled_ghost},
                  {"sigma2_hat", b.linear->sigma2_hat},
                  {"r2", b.linear->r2},
                  {"r2_adjusted", b.linear->r2_adjusted},
                  {"max_identity_discrepancy", b.linear->max_identity_discrepancy}};
    return {{"schema_version", kReportSchemaVersion},
            {"metadata",
             {{"tool", "ghostvar"},
              {"version", kVersion},
              {"seed", b.config.seed},
              {"config_hash", b.config_hash},
              {"config", config_to_json(b.config)}}},
            {"model", {{"family", b.model.family}, {"variables", b.model.variables}, {"hyperparameters", b.model.hyperparameters}}},
            {"relevance", rel},
            {"group_omission", groups},
            {"ghost_matrix", b.ghost ? detail::summary_json(*b.ghost) : json(nullptr)},
            {"permutation_matrix", b.permutation ? detail::summary_json(*b.permutation) : json(nullptr)},
            {"linear_diagnostics", linear},
            {"warnings", b.warnings}};
}

/// One row per variable: raw and scaled relevance by method.
inline void write_relevance_csv(std::ostream& out, const RelevanceReport& r) {
    out << "variable,ghost,permutation,omission,ghost_scaled,permutation_scaled,omission_scaled\n";
    auto cell = [](const std::optional<Vector>& v, std::size_t j) { return v ? format_double((*v)[j]) : std::string(); };
    for (std::size_t j = 0; j < r.variables.size(); ++j)
        out << r.variables[j] << ',' << cell(r.ghost, j) << ',' << cell(r.permutation, j) << ','
            << cell(r.omission, j) << ',' << cell(r.ghost_scaled, j) << ',' << cell(r.permutation_scaled, j) << ','
            << cell(r.omission_scaled, j) << '\n';
}

/// Figure name -> SVG document.
inline std::vector<std::pair<std::string, std::string>> report_figures(const ReportBundle& b) {
    std::vector<std::pair<std::string, std::string>> figs;
    const RelevanceReport& r = b.relevance;
    auto relevance_panel = [&](const std::string& title, const Vector& values, bool with_critical) {
        svg::BarPanel p{title, r.variables, values, {}, true};
        if (with_critical && r.critical_value)
            p.lines.push_back({*r.critical_value, "#1f5fbf", "critical value, alpha = " + svg::tick(r.alpha)});
        return p;
    };
    if (r.ghost) figs.emplace_back("relevance_ghost.svg", svg::bar_figure({relevance_panel("Relevance by ghost variables", *r.ghost, true)}));
    if (r.permutation)
        figs.emplace_back("relevance_permutation.svg",
                          svg::bar_figure({relevance_panel("Relevance by random permutations", *r.permutation, false)}));
    if (r.omission)
        figs.emplace_back("relevance_omission.svg",
                          svg::bar_figure({relevance_panel("Relevance by omission", *r.omission, true)}));

    auto eigen_figures = [&](const MatrixSummary& s, const std::string& tag) {
        std::vector<std::string> idx;
        for (std::size_t i = 0; i < s.matrix.eigen.eigenvalues.size(); ++i) idx.push_back(std::to_string(i + 1));
        figs.emplace_back("eigenvalues_" + tag + ".svg",
                          svg::bar_figure({svg::BarPanel{"Eigenvalues of the " + tag + " relevance matrix", idx,
                                                         s.matrix.eigen.eigenvalues, {}, false}}));
        std::vector<svg::BarPanel> panels;
        for (const auto& e : s.eigen)
            panels.push_back({"Eigenvector " + std::to_string(e.index + 1) + " (" + svg::tick(100.0 * e.explained) + "%)",
                              s.matrix.names, e.eigenvector, {}, true});
        if (!panels.empty()) figs.emplace_back("eigenvectors_" + tag + ".svg", svg::bar_figure(panels, 3));
    };
    if (b.ghost) eigen_figures(*b.ghost, "ghost");
    if (b.permutation) eigen_figures(*b.permutation, "permutation");
    return figs;
}

/// Writes report.json, relevance.csv and the SVG figures into `dir`.
inline std::vector<std::string> write_report(const ReportBundle& b, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(!ec, ErrorCode::InvalidArgument, "cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name);
        require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write '" + (dir / name).string() + "'");
        out << content;
        written.push_back(name);
    };
    emit("report.json", report_to_json(b).dump(2) + "\n");
    std::ostringstream csv;
    write_relevance_csv(csv, b.relevance);
    emit("relevance.csv", csv.str());
    for (const auto& [name, doc] : report_figures(b)) emit(name, doc);
    return written;
}

}  // namespace ghostvar
