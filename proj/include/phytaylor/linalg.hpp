#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "phytaylor/errors.hpp"

namespace phytaylor {

using Vec = std::vector<double>;

// Dense row-major matrix, sized once at construction.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    // y = A * x
    Vec apply(const Vec& x) const {
        if (static_cast<int>(x.size()) != cols_)
            throw DimensionMismatch("matrix-vector product: expected " + std::to_string(cols_) +
                                    " entries, got " + std::to_string(x.size()));
        Vec y(rows_, 0.0);
        for (int r = 0; r < rows_; ++r) {
            double acc = 0.0;
            const double* row = &data_[static_cast<std::size_t>(r) * cols_];
            for (int c = 0; c < cols_; ++c) acc += row[c] * x[c];
            y[r] = acc;
        }
        return y;
    }

    // y = A^T * x
    Vec apply_transposed(const Vec& x) const {
        if (static_cast<int>(x.size()) != rows_)
            throw DimensionMismatch("transposed matrix-vector product: expected " +
                                    std::to_string(rows_) + " entries, got " +
                                    std::to_string(x.size()));
        Vec y(cols_, 0.0);
        for (int r = 0; r < rows_; ++r) {
            const double xr = x[r];
            if (xr == 0.0) continue;
            const double* row = &data_[static_cast<std::size_t>(r) * cols_];
            for (int c = 0; c < cols_; ++c) y[c] += row[c] * xr;
        }
        return y;
    }

    // C = A * B
    Mat multiply(const Mat& b) const {
        if (cols_ != b.rows_)
            throw DimensionMismatch("matrix product: inner dims " + std::to_string(cols_) +
                                    " vs " + std::to_string(b.rows_));
        Mat c(rows_, b.cols_);
        for (int r = 0; r < rows_; ++r) {
            for (int k = 0; k < cols_; ++k) {
                const double a_rk = (*this)(r, k);
                if (a_rk == 0.0) continue;
                for (int j = 0; j < b.cols_; ++j) c(r, j) += a_rk * b(k, j);
            }
        }
        return c;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline double dot(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(squared_norm(a)); }

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace phytaylor
