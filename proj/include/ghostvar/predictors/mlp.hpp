#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"
#include "ghostvar/linalg/matrix.hpp"
#include "ghostvar/linalg/random.hpp"
#include "ghostvar/predictors/prediction_function.hpp"

namespace ghostvar {

struct MlpConfig {
    std::size_t hidden = 10;
    double decay = 0.5;
    std::size_t epochs = 3000;
    double learning_rate = 0.5;
    double init_range = 0.5;  ///< initial weights uniform on ±init_range
};

/// Layout of the parameter vector of a p-H-1 network:
/// [W1 row-major H×(p+1), bias in column 0] then [w2 (H+1), bias first].
struct MlpShape {
    std::size_t inputs = 0;
    std::size_t hidden = 0;

    [[nodiscard]] std::size_t parameter_count() const noexcept { return hidden * (inputs + 1) + hidden + 1; }
    [[nodiscard]] std::size_t w1(std::size_t h, std::size_t c) const noexcept { return h * (inputs + 1) + c; }
    [[nodiscard]] std::size_t w2(std::size_t h) const noexcept { return hidden * (inputs + 1) + h; }
};

namespace detail {

inline double logistic(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

inline double mlp_forward(const MlpShape& shape, std::span<const double> theta, std::span<const double> x,
                          std::span<double> hidden_out) {
    double out = theta[shape.w2(0)];
    for (std::size_t h = 0; h < shape.hidden; ++h) {
        double z = theta[shape.w1(h, 0)];
        for (std::size_t c = 0; c < shape.inputs; ++c) z += theta[shape.w1(h, c + 1)] * x[c];
        const double a = logistic(z);
        hidden_out[h] = a;
        out += theta[shape.w2(h + 1)] * a;
    }
    return out;
}

}  // namespace detail

/// Σ(y - f(x))² + decay·‖θ‖², on already standardized inputs and targets.
inline double mlp_objective(const MlpShape& shape, std::span<const double> theta, const Matrix& x,
                            std::span<const double> y, double decay) {
    Vector hid(shape.hidden);
    double e = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double r = detail::mlp_forward(shape, theta, x.row(i), hid) - y[i];
        e += r * r;
    }
    double w = 0.0;
    for (double t : theta) w += t * t;
    return e + decay * w;
}

/// Gradient of the squared-error part of mlp_objective (no decay term).
inline Vector mlp_data_gradient(const MlpShape& shape, std::span<const double> theta, const Matrix& x,
                                std::span<const double> y) {
    Vector g(theta.size(), 0.0);
    Vector hid(shape.hidden);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        const double r2 = 2.0 * (detail::mlp_forward(shape, theta, xi, hid) - y[i]);
        g[shape.w2(0)] += r2;
        for (std::size_t h = 0; h < shape.hidden; ++h) {
            const double a = hid[h];
            g[shape.w2(h + 1)] += r2 * a;
            const double delta = r2 * theta[shape.w2(h + 1)] * a * (1.0 - a);
            g[shape.w1(h, 0)] += delta;
            for (std::size_t c = 0; c < shape.inputs; ++c) g[shape.w1(h, c + 1)] += delta * xi[c];
        }
    }
    return g;
}

/// Full gradient of mlp_objective.
inline Vector mlp_gradient(const MlpShape& shape, std::span<const double> theta, const Matrix& x,
                           std::span<const double> y, double decay) {
    Vector g = mlp_data_gradient(shape, theta, x, y);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += 2.0 * decay * theta[k];
    return g;
}

/// One-hidden-layer network: logistic hidden units, linear output.
/// Inputs and the response are standardized with training statistics; the
/// network itself works in standardized units.
class MlpModel final : public Model {
public:
    MlpModel(MlpShape shape, Vector theta, Vector x_mean, Vector x_sd, double y_mean, double y_sd, double decay)
        : shape_(shape),
          theta_(std::move(theta)),
          x_mean_(std::move(x_mean)),
          x_sd_(std::move(x_sd)),
          y_mean_(y_mean),
          y_sd_(y_sd),
          decay_(decay) {}

    [[nodiscard]] Vector predict(const Matrix& x) const override {
        const Matrix xs = standardize(x);
        Vector hid(shape_.hidden);
        Vector out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i)
            out[i] = y_mean_ + y_sd_ * detail::mlp_forward(shape_, theta_, xs.row(i), hid);
        return out;
    }

    [[nodiscard]] Matrix standardize(const Matrix& x) const {
        Matrix xs(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) xs(i, j) = (x(i, j) - x_mean_[j]) / x_sd_[j];
        return xs;
    }

    [[nodiscard]] const MlpShape& shape() const noexcept { return shape_; }
    [[nodiscard]] const Vector& parameters() const noexcept { return theta_; }
    [[nodiscard]] double decay() const noexcept { return decay_; }

private:
    MlpShape shape_;
    Vector theta_;
    Vector x_mean_;
    Vector x_sd_;
    double y_mean_;
    double y_sd_;
    double decay_;
};

/// Full-batch gradient descent on Σ(y-f)² + decay·‖θ‖². Each epoch takes a
/// step of size learning_rate/n on the data term and applies the decay term
/// as its exact proximal shrink θ ← θ / (1 + 2·lr·decay/n), which keeps large
/// decay values stable.
inline MlpModel train_mlp(const Dataset& train, const MlpConfig& cfg, Rng& rng) {
    require(cfg.hidden >= 1, ErrorCode::InvalidArgument, "hidden layer needs at least one unit");
    require(cfg.decay >= 0.0, ErrorCode::InvalidArgument, "decay must be non-negative");
    require(train.rows() >= 2, ErrorCode::TooFewRows, "MLP training needs at least two rows");
    const std::size_t n = train.rows();
    const std::size_t p = train.cols();

    Vector x_mean = column_means(train.features);
    Vector x_sd(p);
    for (std::size_t j = 0; j < p; ++j) {
        const Vector col = train.features.column(j);
        const double sd = std::sqrt(variance_n(col) * static_cast<double>(n) / static_cast<double>(n - 1));
        x_sd[j] = sd > 0.0 ? sd : 1.0;
    }
    const double y_mean = mean(train.response);
    double y_sd = std::sqrt(variance_n(train.response) * static_cast<double>(n) / static_cast<double>(n - 1));
    if (!(y_sd > 0.0)) y_sd = 1.0;

    Matrix xs(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) xs(i, j) = (train.features(i, j) - x_mean[j]) / x_sd[j];
    Vector ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = (train.response[i] - y_mean) / y_sd;

    const MlpShape shape{p, cfg.hidden};
    Vector theta(shape.parameter_count());
    for (double& t : theta) t = rng.uniform(-cfg.init_range, cfg.init_range);

    const double step = cfg.learning_rate / static_cast<double>(n);
    const double shrink = 1.0 / (1.0 + 2.0 * step * cfg.decay);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Vector g = mlp_data_gradient(shape, theta, xs, ys);
        for (std::size_t k = 0; k < theta.size(); ++k) {
            theta[k] = (theta[k] - step * g[k]) * shrink;
            if (!std::isfinite(theta[k]))
                fail(ErrorCode::NonFinite, "MLP training diverged at epoch " + std::to_string(epoch) +
                                               "; lower the learning rate");
        }
    }
    return {shape, std::move(theta), std::move(x_mean), std::move(x_sd), y_mean, y_sd, cfg.decay};
}

inline PredictionFunction fit_mlp(const Dataset& train, const MlpConfig& cfg, Rng& rng) {
    auto model = std::make_shared<const MlpModel>(train_mlp(train, cfg, rng));
    return {model, ModelInfo{train.names,
                             "mlp",
                             {{"hidden", static_cast<double>(cfg.hidden)},
                              {"decay", cfg.decay},
                              {"epochs", static_cast<double>(cfg.epochs)},
                              {"learning_rate", cfg.learning_rate}}}};
}

}  // namespace ghostvar
