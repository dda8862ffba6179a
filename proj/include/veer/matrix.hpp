#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace veer {

/// Dense row-major matrix of doubles. Rows are configurations or objective
/// vectors; columns are options or objectives.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    /// Appends a row; the first append on a 0x0 matrix fixes the column count.
    void append_row(std::span<const double> values);

    std::vector<double> column(std::size_t c) const;
    const std::vector<double>& data() const { return data_; }

    /// Rows `ids` of this matrix, in the given order.
    Matrix gather(std::span<const std::size_t> ids) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace veer
