#include "veer/matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace veer {

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) {
        cols_ = values.size();
    } else if (values.size() != cols_) {
        throw std::invalid_argument("Matrix::append_row: width mismatch");
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

Matrix Matrix::gather(std::span<const std::size_t> ids) const {
    Matrix out(ids.size(), cols_);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= rows_) {
            throw std::out_of_range("Matrix::gather: row index out of range");
        }
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(ids[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

} // namespace veer
