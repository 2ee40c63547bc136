#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <memory>
#include <string>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/linalg/ols.hpp"
#include "ghostvar/predictors/prediction_function.hpp"

namespace ghostvar {

/// OLS linear model with intercept.
class LinearModel final : public Model {
public:
    explicit LinearModel(OlsFit fit) : fit_(std::move(fit)) {}

    [[nodiscard]] Vector predict(const Matrix& x) const override { return fit_.predict(x); }
    [[nodiscard]] const OlsFit& ols() const noexcept { return fit_; }

private:
    OlsFit fit_;
};

inline PredictionFunction fit_linear(const Dataset& train) {
    auto model = std::make_shared<const LinearModel>(ols_fit(train.features, train.response, true));
    return {model, ModelInfo{train.names, "linear", {}}};
}

/// One feature transform of the raw columns.
struct BasisTerm {
    enum class Kind { Identity, Cosine, Product };
    Kind kind = Kind::Identity;
    std::size_t j = 0;
    std::size_t k = 0;  ///< second factor, Product only

    static BasisTerm identity(std::size_t j) { return {Kind::Identity, j, 0}; }
    static BasisTerm cosine(std::size_t j) { return {Kind::Cosine, j, 0}; }
    static BasisTerm product(std::size_t j, std::size_t k) { return {Kind::Product, j, k}; }

    [[nodiscard]] double apply(std::span<const double> row) const {
        switch (kind) {
            case Kind::Identity: return row[j];
            case Kind::Cosine: return std::cos(row[j]);
            case Kind::Product: return row[j] * row[k];
        }
        return 0.0;
    }

    [[nodiscard]] std::string label(const std::vector<std::string>& names) const {
        switch (kind) {
            case Kind::Identity: return names.at(j);
            case Kind::Cosine: return "cos(" + names.at(j) + ")";
            case Kind::Product: return names.at(j) + "*" + names.at(k);
        }
        return {};
    }

    friend bool operator==(const BasisTerm&, const BasisTerm&) = default;
};

using BasisSpec = std::vector<BasisTerm>;

inline void validate_basis(const BasisSpec& basis, std::size_t p) {
    require(!basis.empty(), ErrorCode::InvalidArgument, "basis is empty");
    for (const auto& t : basis)
        require(t.j < p && (t.kind != BasisTerm::Kind::Product || t.k < p), ErrorCode::InvalidArgument,
                "basis term references a column >= " + std::to_string(p));
}

inline Matrix featurize(const Matrix& x, const BasisSpec& basis) {
    Matrix f(x.rows(), basis.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto row = x.row(i);
        for (std::size_t t = 0; t < basis.size(); ++t) f(i, t) = basis[t].apply(row);
    }
    return f;
}

/// Parses "cos:0,prod:1:2,id:3".
inline BasisSpec parse_basis(const std::string& text) {
    BasisSpec out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string tok = text.substr(start, end - start);
        start = end + 1;
        if (tok.empty()) continue;
        std::vector<std::string> parts;
        std::size_t s = 0;
        while (true) {
            const std::size_t e = tok.find(':', s);
            parts.push_back(tok.substr(s, e == std::string::npos ? std::string::npos : e - s));
            if (e == std::string::npos) break;
            s = e + 1;
        }
        auto idx = [&](std::size_t i) -> std::size_t {
            try {
                return static_cast<std::size_t>(std::stoul(parts.at(i)));
            } catch (const std::exception&) {
                fail(ErrorCode::InvalidArgument, "bad basis term '" + tok + "'");
            }
        };
        if ((parts[0] == "id" || parts[0] == "identity") && parts.size() == 2)
            out.push_back(BasisTerm::identity(idx(1)));
        else if ((parts[0] == "cos" || parts[0] == "cosine") && parts.size() == 2)
            out.push_back(BasisTerm::cosine(idx(1)));
        else if ((parts[0] == "prod" || parts[0] == "product") && parts.size() == 3)
            out.push_back(BasisTerm::product(idx(1), idx(2)));
        else
            fail(ErrorCode::InvalidArgument, "bad basis term '" + tok + "'");
    }
    return out;
}

/// Linear model over a fixed feature basis. Predictions take RAW columns, so
/// replacing raw column j affects every term that reads j.
class BasisLinearModel final : public Model {
public:
    BasisLinearModel(BasisSpec basis, OlsFit fit) : basis_(std::move(basis)), fit_(std::move(fit)) {}

    [[nodiscard]] Vector predict(const Matrix& x) const override { return fit_.predict(featurize(x, basis_)); }
    [[nodiscard]] const OlsFit& ols() const noexcept { return fit_; }
    [[nodiscard]] const BasisSpec& basis() const noexcept { return basis_; }

private:
    BasisSpec basis_;
    OlsFit fit_;
};

inline PredictionFunction fit_basis_linear(const Dataset& train, const BasisSpec& basis) {
    validate_basis(basis, train.cols());
    auto model = std::make_shared<const BasisLinearModel>(
        basis, ols_fit(featurize(train.features, basis), train.response, true));
    return {model, ModelInfo{train.names, "basis_linear", {{"terms", static_cast<double>(basis.size())}}}};
}

/// Basis for the reduced column set after dropping `omitted` raw columns:
/// terms touching an omitted column are removed, the rest are re-indexed.
inline BasisSpec restrict_basis(const BasisSpec& basis, std::span<const std::size_t> omitted) {
    auto dropped = [&](std::size_t c) { return std::ranges::find(omitted, c) != omitted.end(); };
    auto shift = [&](std::size_t c) {
        std::size_t s = c;
        for (std::size_t o : omitted)
            if (o < c) --s;
        return s;
    };
    BasisSpec out;
    for (BasisTerm t : basis) {
        if (dropped(t.j) || (t.kind == BasisTerm::Kind::Product && dropped(t.k))) continue;
        t.j = shift(t.j);
        if (t.kind == BasisTerm::Kind::Product) t.k = shift(t.k);
        out.push_back(t);
    }
    return out;
}

/// Refits the basis model for omission relevance. The factory receives the
/// reduced dataset, whose missing columns are identified by name.
inline ModelFactory basis_linear_factory(const std::vector<std::string>& full_names, const BasisSpec& basis) {
    return [full_names, basis](const Dataset& train) {
        std::vector<std::size_t> omitted;
        for (std::size_t j = 0; j < full_names.size(); ++j)
            if (std::ranges::find(train.names, full_names[j]) == train.names.end()) omitted.push_back(j);
        return fit_basis_linear(train, restrict_basis(basis, omitted));
    };
}

}  // namespace ghostvar
