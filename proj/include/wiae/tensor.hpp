#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wiae::ad {

/// Allocator whose value construction default-initializes, so sized vector
/// construction skips the zero fill when every element is about to be
/// overwritten anyway.
template <typename T>
struct DefaultInitAllocator : std::allocator<T> {
    template <typename U>
    struct rebind {
        using other = DefaultInitAllocator<U>;
    };
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        if constexpr (sizeof...(Args) == 0) {
            ::new (static_cast<void*>(p)) U;
        } else {
            ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
        }
    }
};

/// Dense row-major matrix of 64-bit floats. Scalars are 1x1, row vectors 1xC,
/// column vectors Rx1. Construction rejects non-finite values so NaN/Inf can
/// never propagate silently through a computation graph.
class Tensor {
public:
    using Storage = std::vector<double, DefaultInitAllocator<double>>;

    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols);  // zero-filled
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);
    Tensor(std::size_t rows, std::size_t cols, Storage data);

    static Tensor scalar(double v);
    static Tensor full(std::size_t rows, std::size_t cols, double v);
    static Tensor row_vector(std::vector<double> data);
    static Tensor column_vector(std::vector<double> data);

    /// For data that is a rearrangement of already-validated values (pure data
    /// movement cannot introduce NaN/Inf); skips the finite scan.
    static Tensor from_validated(std::size_t rows, std::size_t cols, Storage data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    std::vector<std::size_t> shape() const { return {rows_, cols_}; }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double item() const;  // value of a 1x1 tensor

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    std::span<const double> values() const { return {data_.data(), data_.size()}; }

    bool operator==(const Tensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ &&
               std::equal(data_.begin(), data_.end(), o.data_.begin(), o.data_.end());
    }

    std::string shape_string() const;

private:
    void check_finite() const;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Storage data_;
};

}  // namespace wiae::ad
