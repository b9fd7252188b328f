#include "wiae/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "wiae/errors.hpp"

namespace wiae::ad {

Tensor::Tensor(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string());
    }
    check_finite();
}

Tensor::Tensor(std::size_t rows, std::size_t cols, Storage data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string());
    }
    check_finite();
}

Tensor Tensor::from_validated(std::size_t rows, std::size_t cols, Storage data) {
    Tensor t;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_ = std::move(data);
    if (t.data_.size() != rows * cols) {
        throw DimensionError("tensor data length " + std::to_string(t.data_.size()) +
                             " does not match shape " + t.shape_string());
    }
    return t;
}

Tensor Tensor::scalar(double v) { return Tensor(1, 1, std::vector<double>{v}); }

Tensor Tensor::full(std::size_t rows, std::size_t cols, double v) {
    return Tensor(rows, cols, std::vector<double>(rows * cols, v));
}

Tensor Tensor::row_vector(std::vector<double> data) {
    const std::size_t n = data.size();
    return Tensor(1, n, std::move(data));
}

Tensor Tensor::column_vector(std::vector<double> data) {
    const std::size_t n = data.size();
    return Tensor(n, 1, std::move(data));
}

double Tensor::item() const {
    if (!is_scalar()) {
        throw ContractError("item() requires a 1x1 tensor, got " + shape_string());
    }
    return data_[0];
}

std::string Tensor::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Tensor::check_finite() const {
    // a double is non-finite exactly when its exponent bits are all ones;
    // the branch-free integer reduction vectorizes
    constexpr std::uint64_t kExpMask = 0x7FF0000000000000ull;
    std::uint64_t bad = 0;
    for (double v : data_) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        bad |= static_cast<std::uint64_t>((bits & kExpMask) == kExpMask);
    }
    if (bad != 0) {
        throw DataError("tensor construction rejected: non-finite value");
    }
}

}  // namespace wiae::ad
