#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wiae/networks.hpp"
#include "wiae/rng.hpp"

namespace wiae::test {

inline double rel_err(double a, double b, double floor = 1e-3) {
    const double scale = std::max({std::fabs(a), std::fabs(b), floor});
    return std::fabs(a - b) / scale;
}

/// Central finite differences of a scalar function over a flat coordinate
/// vector.
template <typename F>
std::vector<double> finite_diff(F f, std::vector<double> x, double step = 1e-5) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double fp = f(x);
        x[i] = orig - step;
        const double fm = f(x);
        x[i] = orig;
        grad[i] = (fp - fm) / (2.0 * step);
    }
    return grad;
}

inline std::vector<double> flatten(const std::vector<const ad::Tensor*>& tensors) {
    std::vector<double> flat;
    for (const ad::Tensor* t : tensors) {
        flat.insert(flat.end(), t->values().begin(), t->values().end());
    }
    return flat;
}

inline void unflatten(const std::vector<double>& flat, std::vector<ad::Tensor*> tensors) {
    std::size_t offset = 0;
    for (ad::Tensor* t : tensors) {
        std::copy(flat.begin() + offset, flat.begin() + offset + t->size(), t->data());
        offset += t->size();
    }
}

/// Gradients returned by Graph::backward, flattened in wrt order.
inline std::vector<double> flatten_values(const std::vector<ad::Value>& values) {
    std::vector<double> flat;
    for (const ad::Value& v : values) {
        flat.insert(flat.end(), v.val().values().begin(), v.val().values().end());
    }
    return flat;
}

inline ad::Tensor random_tensor(SplitRng& rng, std::size_t rows, std::size_t cols, double lo = -1.5,
                                double hi = 1.5) {
    return ad::Tensor(rows, cols, rng.uniform_vector(rows * cols, lo, hi));
}

}  // namespace wiae::test
