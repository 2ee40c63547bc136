#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"

namespace ghostvar {

/// Named feature columns plus a response vector.
struct Dataset {
    std::vector<std::string> names;  ///< feature names, one per column of `features`
    Matrix features;
    Vector response;
    std::string response_name = "y";

    Dataset() = default;
    Dataset(std::vector<std::string> names_, Matrix features_, Vector response_, std::string response_name_ = "y")
        : names(std::move(names_)),
          features(std::move(features_)),
          response(std::move(response_)),
          response_name(std::move(response_name_)) {
        require(names.size() == features.cols(), ErrorCode::DimensionMismatch,
                "feature name count does not match column count");
        require(response.size() == features.rows(), ErrorCode::DimensionMismatch,
                "response length does not match row count");
    }

    [[nodiscard]] std::size_t rows() const noexcept { return features.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return features.cols(); }

    [[nodiscard]] std::size_t index_of(const std::string& name) const {
        const auto it = std::ranges::find(names, name);
        require(it != names.end(), ErrorCode::SchemaMismatch, "unknown variable '" + name + "'");
        return static_cast<std::size_t>(it - names.begin());
    }

    [[nodiscard]] Dataset select_rows(std::span<const std::size_t> idx) const {
        Vector y(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) y[k] = response.at(idx[k]);
        return {names, features.select_rows(idx), std::move(y), response_name};
    }

    /// Dataset without the listed feature columns.
    [[nodiscard]] Dataset drop_columns(std::span<const std::size_t> drop) const {
        std::vector<std::size_t> keep;
        std::vector<std::string> kept_names;
        for (std::size_t j = 0; j < cols(); ++j) {
            if (std::ranges::find(drop, j) != drop.end()) continue;
            keep.push_back(j);
            kept_names.push_back(names[j]);
        }
        return {std::move(kept_names), features.select_columns(keep), response, response_name};
    }
};

/// Training and test samples with a shared schema.
struct SplitSample {
    Dataset train;
    Dataset test;

    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return train.names; }
    [[nodiscard]] std::size_t p() const noexcept { return train.cols(); }
};

inline void check_schema(const Dataset& a, const Dataset& b) {
    require(a.names == b.names, ErrorCode::SchemaMismatch, "datasets have different feature columns");
}

}  // namespace ghostvar
