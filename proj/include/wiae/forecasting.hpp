#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "wiae/networks.hpp"

namespace wiae {

struct ForecastRequest {
    std::size_t origin = 0;               // index t of the last observation used
    std::size_t horizon = 15;             // T
    std::size_t num_trajectories = 1000;  // S
    std::uint64_t seed = 1;

    void validate() const;
};

/// S x T matrix of destandardized future samples plus per-step point forecasts.
struct ForecastDistribution {
    std::vector<std::vector<double>> samples;
    std::vector<double> mean_forecast;
    std::vector<double> median_forecast;
    ForecastRequest request;
};

/// Standardizes the observed raw series with the model statistics and encodes
/// it; the last innovation corresponds to the last observation.
std::vector<double> innovation_history(const WiaeModel& model,
                                       std::span<const double> observed_raw);

/// Draws S trajectories of T i.i.d. U[-1,1] future innovations and decodes
/// each step from the mixed (sampled future, observed past) window. Trajectory
/// s uses its own derived substream, so results are reproducible and
/// independent of evaluation order.
ForecastDistribution sample_trajectories(const WiaeModel& model,
                                         std::span<const double> innovations,
                                         const ForecastRequest& request);

/// Column-wise sample mean and median (recomputed from the sample matrix).
std::pair<std::vector<double>, std::vector<double>> point_estimates(
    const ForecastDistribution& dist);

void write_trajectories_csv(const std::filesystem::path& path, const ForecastDistribution& dist,
                            const std::string& header_comment = "");
void write_forecast_summary_csv(const std::filesystem::path& path,
                                const ForecastDistribution& dist,
                                const std::string& header_comment = "");

}  // namespace wiae
