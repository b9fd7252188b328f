#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wiae/data.hpp"
#include "wiae/evaluation.hpp"
#include "wiae/training.hpp"

namespace wiae {

inline constexpr int kConfigFormatVersion = 1;

/// Exactly one of generator/csv is set.
struct DatasetSource {
    std::optional<GeneratorSpec> generator;
    std::optional<std::filesystem::path> csv;
};

struct ForecastDefaults {
    std::size_t horizon = 15;
    std::size_t num_trajectories = 1000;
    std::uint64_t seed = 1;
    std::optional<std::size_t> origin;  // default: last observation
};

struct EvalConfig {
    std::vector<std::size_t> horizons{15};
    std::size_t origin_stride = 1;
    std::size_t max_origins = 0;  // 0 = no cap
    OutlierBasis outlier_basis = OutlierBasis::kTruth;
};

struct RunConfig {
    int format_version = kConfigFormatVersion;
    std::string name;  // defaults to the dataset name
    std::filesystem::path output_dir = "out";
    DatasetSource dataset;
    double train_fraction = 0.8;
    TrainConfig train;
    ForecastDefaults forecast;
    EvalConfig evaluate;

    void validate() const;
    /// Canonical serialization (sorted keys) of the resolved configuration.
    std::string canonical_json() const;
    /// FNV-1a hash of canonical_json(), as 16 hex digits.
    std::string hash() const;
};

/// Parses a JSON run configuration. Unknown keys are rejected with their full
/// key path; absent keys take the documented defaults.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin_name = "<inline>");

}  // namespace wiae
