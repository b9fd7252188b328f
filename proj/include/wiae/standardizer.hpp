#pragma once

#include <span>
#include <vector>

namespace wiae {

/// z-score transform with statistics frozen at construction.
struct Standardizer {
    double mean = 0.0;
    double std = 1.0;

    double transform(double x) const { return (x - mean) / std; }
    double inverse(double z) const { return z * std + mean; }

    std::vector<double> transform(std::span<const double> xs) const {
        std::vector<double> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = transform(xs[i]);
        return out;
    }

    std::vector<double> inverse(std::span<const double> zs) const {
        std::vector<double> out(zs.size());
        for (std::size_t i = 0; i < zs.size(); ++i) out[i] = inverse(zs[i]);
        return out;
    }
};

}  // namespace wiae
