#include "wiae/forecasting.hpp"

#include <cstdio>
#include <fstream>

#include "wiae/errors.hpp"
#include "wiae/evaluation.hpp"
#include "wiae/rng.hpp"

namespace wiae {

using ad::Graph;
using ad::Tensor;
using ad::Value;

void ForecastRequest::validate() const {
    if (horizon < 1) throw ConfigError("forecast.horizon must be >= 1");
    if (num_trajectories < 1) throw ConfigError("forecast.num_trajectories must be >= 1");
}

std::vector<double> innovation_history(const WiaeModel& model,
                                       std::span<const double> observed_raw) {
    if (observed_raw.size() < model.m) {
        throw InsufficientHistoryError("innovation_history: need at least " +
                                       std::to_string(model.m) + " observations, got " +
                                       std::to_string(observed_raw.size()));
    }
    const std::vector<double> standardized = model.standardizer.transform(observed_raw);
    return encode_series(model, standardized);
}

ForecastDistribution sample_trajectories(const WiaeModel& model,
                                         std::span<const double> innovations,
                                         const ForecastRequest& request) {
    request.validate();
    const std::size_t m = model.m;
    if (innovations.size() + 1 < m) {
        throw InsufficientHistoryError("sample_trajectories: need at least " +
                                       std::to_string(m - 1) + " innovations, got " +
                                       std::to_string(innovations.size()));
    }
    const std::size_t s_count = request.num_trajectories;
    const std::size_t horizon = request.horizon;
    const std::size_t hist = innovations.size();

    // Per-trajectory uniform draws from derived substreams.
    SplitRng root(request.seed);
    std::vector<std::vector<double>> future(s_count);
    for (std::size_t s = 0; s < s_count; ++s) {
        future[s] = root.split(s).uniform_vector(horizon, -1.0, 1.0);
    }

    ForecastDistribution dist;
    dist.request = request;
    dist.samples.assign(s_count, std::vector<double>(horizon, 0.0));

    std::vector<double> windows(s_count * m);
    for (std::size_t k = 1; k <= horizon; ++k) {
        for (std::size_t s = 0; s < s_count; ++s) {
            double* row = windows.data() + s * m;
            for (std::size_t j = 0; j < m; ++j) {
                if (j < k) {
                    row[j] = future[s][k - 1 - j];  // u_{t+k-j}
                } else {
                    row[j] = innovations[hist - 1 - (j - k)];  // nu_{t-(j-k)}
                }
            }
        }
        Graph g;
        Value x = g.constant(Tensor(s_count, m, windows));
        std::vector<Value> bound = bind_mlp(g, model.decoder, false);
        const Tensor out = mlp_apply(g, model.decoder.spec, bound, x).val();
        for (std::size_t s = 0; s < s_count; ++s) {
            dist.samples[s][k - 1] = model.standardizer.inverse(out.data()[s]);
        }
    }

    auto [mean, median] = point_estimates(dist);
    dist.mean_forecast = std::move(mean);
    dist.median_forecast = std::move(median);
    return dist;
}

std::pair<std::vector<double>, std::vector<double>> point_estimates(
    const ForecastDistribution& dist) {
    if (dist.samples.empty() || dist.samples.front().empty()) {
        throw ContractError("point_estimates: empty sample matrix");
    }
    const std::size_t s_count = dist.samples.size();
    const std::size_t horizon = dist.samples.front().size();
    std::vector<double> mean(horizon, 0.0), median(horizon, 0.0);
    std::vector<double> column(s_count);
    for (std::size_t k = 0; k < horizon; ++k) {
        double acc = 0.0;
        for (std::size_t s = 0; s < s_count; ++s) {
            acc += dist.samples[s][k];
            column[s] = dist.samples[s][k];
        }
        mean[k] = acc / static_cast<double>(s_count);
        median[k] = median_inplace(column);
    }
    return {mean, median};
}

namespace {

void write_row(std::ofstream& out, std::span<const double> row) {
    char buf[32];
    for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        out << buf << (i + 1 < row.size() ? "," : "\n");
    }
}

}  // namespace

void write_trajectories_csv(const std::filesystem::path& path, const ForecastDistribution& dist,
                            const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (std::size_t k = 1; k <= dist.samples.front().size(); ++k) {
        out << "step_" << k << (k < dist.samples.front().size() ? "," : "\n");
    }
    for (const std::vector<double>& row : dist.samples) write_row(out, row);
}

void write_forecast_summary_csv(const std::filesystem::path& path,
                                const ForecastDistribution& dist,
                                const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "statistic";
    for (std::size_t k = 1; k <= dist.mean_forecast.size(); ++k) out << ",step_" << k;
    out << "\nmean,";
    write_row(out, dist.mean_forecast);
    out << "median,";
    write_row(out, dist.median_forecast);
}

}  // namespace wiae
