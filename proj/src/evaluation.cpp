#include "wiae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wiae/errors.hpp"

namespace wiae {

double median_inplace(std::vector<double>& values) {
    if (values.empty()) throw ContractError("median of empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MetricReport point_metrics(std::span<const double> truth, std::span<const double> forecast,
                           std::size_t s) {
    if (truth.size() != forecast.size()) {
        throw DimensionError("point_metrics: truth length " + std::to_string(truth.size()) +
                             " vs forecast length " + std::to_string(forecast.size()));
    }
    if (truth.empty()) throw ContractError("point_metrics: empty input");
    const std::size_t n = truth.size();
    const double nd = static_cast<double>(n);

    double sq_err_sum = 0.0, abs_err_sum = 0.0, sq_truth_sum = 0.0, abs_truth_sum = 0.0;
    double smape_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = truth[i] - forecast[i];
        sq_err_sum += e * e;
        abs_err_sum += std::fabs(e);
        sq_truth_sum += truth[i] * truth[i];
        abs_truth_sum += std::fabs(truth[i]);
        const double denom = (std::fabs(truth[i]) + std::fabs(forecast[i])) / 2.0;
        smape_sum += denom > 0.0 ? std::fabs(e) / denom : 0.0;
    }
    const double mean_sq_truth = sq_truth_sum / nd;
    const double mean_abs_truth = abs_truth_sum / nd;
    if (!(mean_sq_truth > 0.0)) throw UndefinedMetricError("NMSE undefined: all-zero truth");
    if (!(mean_abs_truth > 0.0)) throw UndefinedMetricError("NMAE undefined: all-zero truth");

    MetricReport report;
    report.horizon_step = s;
    report.evaluated = n;
    report.values["NMSE"] = (sq_err_sum / nd) / mean_sq_truth;
    report.values["NMAE"] = (abs_err_sum / nd) / mean_abs_truth;
    report.values["sMAPE"] = smape_sum / nd;

    std::vector<double> normalized_sq(n), normalized_abs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = truth[i] - forecast[i];
        normalized_sq[i] = (e * e) / mean_sq_truth;
        normalized_abs[i] = std::fabs(e) / mean_abs_truth;
    }
    report.values["NMeSE"] = median_inplace(normalized_sq);
    report.values["NMeAE"] = median_inplace(normalized_abs);

    if (s >= 1 && n > s) {
        double naive_sum = 0.0;
        for (std::size_t t = s; t < n; ++t) naive_sum += std::fabs(truth[t] - truth[t - s]);
        const double naive_mean = naive_sum / static_cast<double>(n - s);
        if (!(naive_mean > 0.0)) {
            throw UndefinedMetricError("MASE undefined: constant truth series");
        }
        report.values["MASE"] = (abs_err_sum / nd) / naive_mean;
    } else {
        throw UndefinedMetricError("MASE undefined: need N > s >= 1, got N=" +
                                   std::to_string(n) + " s=" + std::to_string(s));
    }
    return report;
}

double crps(std::span<const double> samples, double observation) {
    if (samples.empty()) throw ContractError("crps: empty sample set");
    const std::size_t s = samples.size();
    double first = 0.0;
    for (double x : samples) first += std::fabs(x - observation);
    first /= static_cast<double>(s);

    // sum_ij |x_i - x_j| via the sorted identity 2 * sum_j x_(j) * (2j - S + 1)
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double pair_sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        pair_sum += sorted[j] * (2.0 * static_cast<double>(j) - static_cast<double>(s) + 1.0);
    }
    const double second = pair_sum / (static_cast<double>(s) * static_cast<double>(s));
    return first - second;
}

std::string outlier_basis_name(OutlierBasis b) {
    switch (b) {
        case OutlierBasis::kTruth: return "truth";
        case OutlierBasis::kError: return "error";
        case OutlierBasis::kNone: return "none";
    }
    return "?";
}

OutlierBasis outlier_basis_from_name(const std::string& name) {
    if (name == "truth") return OutlierBasis::kTruth;
    if (name == "error") return OutlierBasis::kError;
    if (name == "none") return OutlierBasis::kNone;
    throw ConfigError("unknown outlier basis '" + name + "'");
}

OutlierFilterResult filter_outliers(std::span<const double> truth,
                                    const std::vector<std::vector<double>>& companions,
                                    OutlierBasis basis) {
    if (truth.size() < 2) throw ContractError("filter_outliers: need at least 2 points");
    for (const std::vector<double>& c : companions) {
        if (c.size() != truth.size()) {
            throw DimensionError("filter_outliers: companion length mismatch");
        }
    }

    std::vector<double> reference(truth.begin(), truth.end());
    if (basis == OutlierBasis::kError) {
        if (companions.empty()) {
            throw ContractError("filter_outliers: error basis requires a forecast companion");
        }
        for (std::size_t i = 0; i < reference.size(); ++i) {
            reference[i] = std::fabs(truth[i] - companions[0][i]);
        }
    }

    OutlierFilterResult result;
    if (basis == OutlierBasis::kNone) {
        result.kept.resize(truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) result.kept[i] = i;
    } else {
        double mean = 0.0;
        for (double v : reference) mean += v;
        mean /= static_cast<double>(reference.size());
        double var = 0.0;
        for (double v : reference) var += (v - mean) * (v - mean);
        var /= static_cast<double>(reference.size());
        const double limit = 3.0 * std::sqrt(var);
        for (std::size_t i = 0; i < reference.size(); ++i) {
            if (std::fabs(reference[i] - mean) > limit) {
                ++result.excluded;
            } else {
                result.kept.push_back(i);
            }
        }
    }

    result.truth.reserve(result.kept.size());
    for (std::size_t i : result.kept) result.truth.push_back(truth[i]);
    result.companions.resize(companions.size());
    for (std::size_t c = 0; c < companions.size(); ++c) {
        result.companions[c].reserve(result.kept.size());
        for (std::size_t i : result.kept) result.companions[c].push_back(companions[c][i]);
    }
    return result;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> errors) {
    if (errors.empty()) throw ContractError("ecdf: empty input");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<std::pair<double, double>> curve;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;  // keep last duplicate
        curve.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    return curve;
}

void write_ecdf_csv(const std::filesystem::path& path,
                    const std::vector<std::pair<double, double>>& curve,
                    const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "value,cumulative_probability\n";
    char buf[96];
    for (const auto& [t, p] : curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, p);
        out << buf;
    }
}

std::string MetricReport::to_kv_text() const {
    std::string text;
    text += "horizon_step=" + std::to_string(horizon_step) + "\n";
    text += "evaluated=" + std::to_string(evaluated) + "\n";
    text += "excluded=" + std::to_string(excluded) + "\n";
    char buf[96];
    for (const auto& [name, value] : values) {
        std::snprintf(buf, sizeof buf, "%s=%.17g\n", name.c_str(), value);
        text += buf;
    }
    return text;
}

std::string MetricReport::csv_header() {
    return "dataset,horizon,method,seed,metric,value,evaluated,excluded";
}

std::string MetricReport::to_csv_row(const std::string& dataset, const std::string& method,
                                     std::uint64_t seed) const {
    std::string rows;
    char buf[256];
    for (const auto& [name, value] : values) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%s,%llu,%s,%.17g,%zu,%zu\n", dataset.c_str(),
                      horizon_step, method.c_str(), static_cast<unsigned long long>(seed),
                      name.c_str(), value, evaluated, excluded);
        rows += buf;
    }
    return rows;
}

}  // namespace wiae
