#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ghostvar/error.hpp"

namespace ghostvar {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, Vector data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        require(data_.size() == rows_ * cols_, ErrorCode::DimensionMismatch,
                "matrix data length does not equal rows*cols");
    }
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            require(r.size() == cols_, ErrorCode::DimensionMismatch, "ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static Matrix from_columns(const std::vector<Vector>& columns) {
        if (columns.empty()) return {};
        Matrix m(columns.front().size(), columns.size());
        for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(j, columns[j]);
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    [[nodiscard]] Vector column(std::size_t j) const {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_column(std::size_t j, std::span<const double> values) {
        require(values.size() == rows_, ErrorCode::DimensionMismatch, "column length mismatch");
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
    }

    [[nodiscard]] const Vector& data() const noexcept { return data_; }
    [[nodiscard]] Vector& data() noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Copy of the listed columns, in the given order.
    [[nodiscard]] Matrix select_columns(std::span<const std::size_t> idx) const {
        Matrix m(rows_, idx.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < idx.size(); ++k) m(i, k) = (*this)(i, idx[k]);
        return m;
    }

    [[nodiscard]] Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix m(idx.size(), cols_);
        for (std::size_t k = 0; k < idx.size(); ++k) std::ranges::copy(row(idx[k]), m.row(k).begin());
        return m;
    }

    /// All columns except `j`.
    [[nodiscard]] Matrix drop_column(std::size_t j) const {
        std::vector<std::size_t> keep;
        keep.reserve(cols_ - 1);
        for (std::size_t k = 0; k < cols_; ++k)
            if (k != j) keep.push_back(k);
        return select_columns(keep);
    }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

inline Vector operator*(const Matrix& a, std::span<const double> x) {
    require(a.cols() == x.size(), ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
    }
    return y;
}

inline Vector operator*(const Matrix& a, const Vector& x) { return a * std::span<const double>(x); }

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
            "matrix difference shape mismatch");
    Matrix c = a;
    for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] -= b.data()[k];
    return c;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
            "matrix sum shape mismatch");
    Matrix c = a;
    for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] += b.data()[k];
    return c;
}

inline Matrix operator*(double s, Matrix m) {
    for (double& v : m.data()) v *= s;
    return m;
}

/// Aᵀ A without forming the transpose.
inline Matrix gram(const Matrix& a) {
    const std::size_t p = a.cols();
    Matrix g(p, p);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double rj = r[j];
            if (rj == 0.0) continue;
            for (std::size_t k = j; k < p; ++k) g(j, k) += rj * r[k];
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < j; ++k) g(j, k) = g(k, j);
    return g;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::DimensionMismatch, "dot length mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double mean(std::span<const double> a) {
    if (a.empty()) return 0.0;
    return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
}

/// Variance with denominator n.
inline double variance_n(std::span<const double> a) {
    const double m = mean(a);
    double s = 0.0;
    for (double v : a) s += (v - m) * (v - m);
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(const Matrix& m) { return max_abs(m.data()); }

inline double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

inline double trace(const Matrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
    return t;
}

inline Vector column_means(const Matrix& x) {
    Vector mu(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) mu[j] += x(i, j);
    for (double& v : mu) v /= static_cast<double>(x.rows());
    return mu;
}

/// Sample covariance matrix (denominator n-1).
inline Matrix covariance(const Matrix& x) {
    require(x.rows() >= 2, ErrorCode::DimensionMismatch, "covariance needs at least two rows");
    const Vector mu = column_means(x);
    Matrix c = x;
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) -= mu[j];
    Matrix s = gram(c);
    for (double& v : s.data()) v /= static_cast<double>(x.rows() - 1);
    return s;
}

inline Matrix correlation(const Matrix& x) {
    Matrix s = covariance(x);
    const std::size_t p = s.cols();
    Vector sd(p);
    for (std::size_t j = 0; j < p; ++j) sd[j] = std::sqrt(s(j, j));
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) s(j, k) /= sd[j] * sd[k];
    return s;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size() && a.size() >= 2, ErrorCode::DimensionMismatch, "pearson length mismatch");
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace ghostvar
