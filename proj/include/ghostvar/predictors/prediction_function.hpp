#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"

namespace ghostvar {

struct ModelInfo {
    std::vector<std::string> variables;
    std::string family;
    std::map<std::string, double> hyperparameters;
};

/// Anything that maps an n×p feature matrix to n predictions.
class Model {
public:
    virtual ~Model() = default;
    [[nodiscard]] virtual Vector predict(const Matrix& x) const = 0;
};

/// Opaque, deterministic prediction function m̂: the only thing the relevance
/// machinery keeps from training.
class PredictionFunction {
public:
    PredictionFunction(std::shared_ptr<const Model> model, ModelInfo info)
        : model_(std::move(model)), info_(std::move(info)) {
        require(model_ != nullptr, ErrorCode::InvalidArgument, "null model");
    }

    /// Wraps a plain callable.
    static PredictionFunction from_callable(std::function<Vector(const Matrix&)> fn, ModelInfo info) {
        struct Callable final : Model {
            explicit Callable(std::function<Vector(const Matrix&)> f) : fn(std::move(f)) {}
            Vector predict(const Matrix& x) const override { return fn(x); }
            std::function<Vector(const Matrix&)> fn;
        };
        return {std::make_shared<const Callable>(std::move(fn)), std::move(info)};
    }

    [[nodiscard]] Vector predict(const Matrix& x) const {
        require(x.cols() == info_.variables.size(), ErrorCode::SchemaMismatch,
                "model expects " + std::to_string(info_.variables.size()) + " columns, got " +
                    std::to_string(x.cols()));
        Vector y = model_->predict(x);
        require(y.size() == x.rows(), ErrorCode::ProtocolViolation, "model returned wrong number of predictions");
        return y;
    }

    Vector operator()(const Matrix& x) const { return predict(x); }

    [[nodiscard]] const ModelInfo& info() const noexcept { return info_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return info_.variables.size(); }

    /// The concrete model, if it has type M.
    template <class M>
    [[nodiscard]] std::shared_ptr<const M> model_as() const {
        return std::dynamic_pointer_cast<const M>(model_);
    }

private:
    std::shared_ptr<const Model> model_;
    ModelInfo info_;
};

/// Refits a model family on a (possibly column-reduced) training set.
using ModelFactory = std::function<PredictionFunction(const Dataset&)>;

}  // namespace ghostvar
