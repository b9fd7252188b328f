#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wiae {

/// Runs up-and-down diagnostics of an i.i.d. hypothesis.
struct RunsTestReport {
    std::size_t effective_length = 0;  // N after dropping tied neighbours
    std::size_t runs = 0;              // R, count of maximal monotone segments
    double expected_runs = 0.0;        // (2N-1)/3
    double variance_runs = 0.0;        // (16N-29)/90
    double z = 0.0;
    double p_two_sided = 0.0;

    std::string to_kv_text() const;
};

/// Counts maximal constant-sign segments of successive differences; tied
/// neighbours (zero differences) are dropped first. Returns (R, N_effective).
std::pair<std::size_t, std::size_t> runs_up_down_count(std::span<const double> seq);

/// Asymptotic mean and variance of the run count for effective length N.
std::pair<double, double> runs_moments(std::size_t effective_length);

/// Two-sided normal test of the run count. Requires N_effective >= 25.
RunsTestReport runs_test(std::span<const double> seq);

/// Exact empirical 1-Wasserstein distance between two one-dimensional samples:
/// mean absolute difference of sorted values. Unequal sizes are aligned by
/// quantile-matching the larger sample onto the smaller one.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

/// Midpoint quantiles of U[lo, hi]: lo + (hi-lo) * (i + 0.5) / count.
std::vector<double> uniform_quantiles(std::size_t count, double lo = -1.0, double hi = 1.0);

/// Critic-estimated distance between two block distributions: trains a fresh
/// gradient-penalized critic for `budget` steps and reports the final
/// mean-score gap over the full sets. A stochastic estimate, so the seed is
/// part of the result.
struct CriticDistanceReport {
    double estimate = 0.0;
    std::size_t budget = 0;
    std::uint64_t seed = 0;

    std::string to_kv_text() const;
};

CriticDistanceReport critic_wasserstein(const std::vector<std::vector<double>>& blocks_a,
                                        const std::vector<std::vector<double>>& blocks_b,
                                        std::size_t budget, std::uint64_t seed);

}  // namespace wiae
