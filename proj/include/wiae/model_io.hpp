#pragma once

#include <filesystem>

#include "wiae/networks.hpp"

namespace wiae {

inline constexpr int kModelFormatVersion = 1;

/// Writes the model as JSON with decimal weights that reload bit-exactly.
void save_model(const WiaeModel& model, const std::filesystem::path& path,
                const std::string& config_hash = "");

/// Loads and validates a model file; rejects unknown versions and malformed
/// fields with a SchemaError naming the field.
WiaeModel load_model(const std::filesystem::path& path);

}  // namespace wiae
