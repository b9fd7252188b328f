#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wiae/run_config.hpp"

namespace wiae {

enum class Command : std::uint8_t {
    kGenerate,
    kTrain,
    kExtract,
    kForecast,
    kEvaluate,
    kRunsTest,
};

Command command_from_name(const std::string& name);
std::string command_name(Command c);

/// Artifact locations for one named run, all under the output directory.
struct ArtifactPaths {
    std::filesystem::path series_csv;
    std::filesystem::path model_json;
    std::filesystem::path loss_csv;
    std::filesystem::path innovations_csv;
    std::filesystem::path reconstructions_csv;
    std::filesystem::path trajectories_csv;
    std::filesystem::path forecast_summary_csv;
    std::filesystem::path metrics_txt;
    std::filesystem::path metrics_csv;
    std::filesystem::path ecdf_abs_csv;
    std::filesystem::path ecdf_sq_csv;
    std::filesystem::path runs_txt;
    std::filesystem::path runs_csv;
};

ArtifactPaths artifact_paths(const RunConfig& config);

/// Loads the configured CSV or synthesizes the configured generator series,
/// and applies the chronological split.
SeriesDataset resolve_dataset(const RunConfig& config);

/// Executes one subcommand and returns the artifacts it wrote. The
/// WIAE_OUTPUT_DIR environment variable overrides config.output_dir.
std::vector<std::filesystem::path> run_pipeline(Command command, RunConfig config);

/// Forecast samples of step s only (equals column s of a horizon-s
/// sample_trajectories call with the same seed).
std::vector<double> forecast_step_samples(const WiaeModel& model,
                                          std::span<const double> innovations, std::size_t s,
                                          std::size_t num_trajectories, std::uint64_t seed);

}  // namespace wiae
