#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wiae {

/// Named metric values for one (dataset, horizon) evaluation.
struct MetricReport {
    std::map<std::string, double> values;
    std::size_t evaluated = 0;  // points entering the metrics
    std::size_t excluded = 0;   // points removed by the outlier rule
    std::size_t horizon_step = 0;

    std::string to_kv_text() const;
    static std::string csv_header();
    std::string to_csv_row(const std::string& dataset, const std::string& method,
                           std::uint64_t seed) const;
};

/// Median with the even-count midpoint convention. Consumes its argument.
double median_inplace(std::vector<double>& values);

/// NMSE, NMeSE, NMAE, NMeAE, MASE (s-step naive denominator) and sMAPE.
/// Throws UndefinedMetricError (naming the metric) on zero denominators.
MetricReport point_metrics(std::span<const double> truth, std::span<const double> forecast,
                           std::size_t s);

/// Sample-based energy form: mean |X_i - x| - (1/(2 S^2)) sum_ij |X_i - X_j|.
double crps(std::span<const double> samples, double observation);

/// Which series provides the mean/std for the 3-sigma exclusion rule.
enum class OutlierBasis : std::uint8_t { kTruth, kError, kNone };

std::string outlier_basis_name(OutlierBasis b);
OutlierBasis outlier_basis_from_name(const std::string& name);

struct OutlierFilterResult {
    std::vector<double> truth;
    std::vector<std::vector<double>> companions;
    std::vector<std::size_t> kept;
    std::size_t excluded = 0;
};

/// Removes indices with |x_i - mean| > 3 * std (population std, strict
/// inequality) from the truth and every companion list alike. The reference
/// series is the truth, or |truth - companions[0]| with the kError basis.
OutlierFilterResult filter_outliers(std::span<const double> truth,
                                    const std::vector<std::vector<double>>& companions,
                                    OutlierBasis basis = OutlierBasis::kTruth);

/// Right-continuous empirical CDF sampled at the sorted unique values.
std::vector<std::pair<double, double>> ecdf(std::span<const double> errors);

void write_ecdf_csv(const std::filesystem::path& path,
                    const std::vector<std::pair<double, double>>& curve,
                    const std::string& header_comment = "");

}  // namespace wiae
