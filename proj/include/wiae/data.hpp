#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wiae/standardizer.hpp"

namespace wiae {

/// Chronological scalar series with a fixed sampling period. train_end is the
/// first index of the test split; every derived statistic (standardizer) is a
/// function of indices < train_end only.
struct SeriesDataset {
    std::vector<double> values;
    double period_seconds = 300.0;
    std::string name;
    std::size_t train_end = 0;
    std::int64_t start_epoch_seconds = 1675209600;  // 2023-02-01T00:00:00Z

    std::span<const double> train_split() const {
        return std::span<const double>(values).first(train_end);
    }
    std::span<const double> test_split() const {
        return std::span<const double>(values).subspan(train_end);
    }
    void set_split_fraction(double fraction);
    void validate() const;
};

enum class GeneratorKind : std::uint8_t { kLar, kMa, kMc };

std::string generator_kind_name(GeneratorKind k);
GeneratorKind generator_kind_from_name(const std::string& name);

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::kLar;
    std::size_t length = 0;
    std::uint64_t seed = 1;
    std::size_t burn_in = 1000;
    double period_seconds = 300.0;

    void validate() const;
};

/// x_t = 0.5 x_{t-1} + u_t, u ~ U[-1, 1].
SeriesDataset gen_lar(const GeneratorSpec& spec);
/// x_t = u_t + 2.5 u_{t-1}, u ~ U[-1, 1].
SeriesDataset gen_ma(const GeneratorSpec& spec);
/// Two-state chain, stay probability 0.6, states emit 0.0 and 1.0.
SeriesDataset gen_mc(const GeneratorSpec& spec);
SeriesDataset generate(const GeneratorSpec& spec);

/// Test hook: same recursions with an arbitrary innovation driver.
SeriesDataset gen_lar_driven(std::size_t length, std::size_t burn_in,
                             const std::function<double()>& next_u);
SeriesDataset gen_ma_driven(std::size_t length, std::size_t burn_in,
                            const std::function<double()>& next_u);

/// Reads `timestamp,value` CSV with strictly increasing equally spaced
/// ISO-8601 timestamps; infers the sampling period.
SeriesDataset load_csv(const std::filesystem::path& path);

/// Writes the same schema load_csv reads. `header_comment`, when non-empty,
/// is emitted as a leading `# ...` line.
void save_csv(const SeriesDataset& dataset, const std::filesystem::path& path,
              const std::string& header_comment = "");

/// Train-split statistics (population std) plus the standardized full series.
struct StandardizedSeries {
    Standardizer standardizer;
    std::vector<double> values;
};
StandardizedSeries standardize(const SeriesDataset& dataset);
std::vector<double> destandardize(std::span<const double> values, const Standardizer& s);

/// Overlapping blocks (x_t, ..., x_{t-n+1}) for t = n-1 .. L-1, newest first.
std::vector<std::vector<double>> make_blocks(std::span<const double> series, std::size_t n,
                                             std::size_t stride = 1);

// Timestamp helpers (UTC, no leap seconds).
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace wiae
