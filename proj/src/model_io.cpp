#include "wiae/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "wiae/errors.hpp"

namespace wiae {

namespace {

using nlohmann::json;
using ad::Tensor;

json spec_to_json(const MlpSpec& spec) {
    return json{{"input_width", spec.input_width},
                {"hidden_widths", spec.hidden_widths},
                {"output_width", spec.output_width},
                {"hidden_activation", activation_name(spec.hidden_activation)},
                {"output_activation", activation_name(spec.output_activation)}};
}

json stack_to_json(const MlpParams& params) {
    json layers = json::array();
    for (const AffineLayer& l : params.layers) {
        layers.push_back(
            json{{"rows", l.weight.rows()},
                 {"cols", l.weight.cols()},
                 {"weight", std::vector<double>(l.weight.values().begin(), l.weight.values().end())},
                 {"bias", std::vector<double>(l.bias.values().begin(), l.bias.values().end())}});
    }
    return json{{"spec", spec_to_json(params.spec)}, {"layers", layers}};
}

const json& field(const json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("model file: missing field '") + name + "'");
    return *it;
}

template <typename T>
T field_as(const json& j, const char* name) {
    try {
        return field(j, name).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("model file: field '") + name + "' has the wrong type");
    }
}

MlpSpec spec_from_json(const json& j) {
    MlpSpec spec;
    spec.input_width = field_as<std::size_t>(j, "input_width");
    spec.hidden_widths = field_as<std::vector<std::size_t>>(j, "hidden_widths");
    spec.output_width = field_as<std::size_t>(j, "output_width");
    spec.hidden_activation = activation_from_name(field_as<std::string>(j, "hidden_activation"));
    spec.output_activation = activation_from_name(field_as<std::string>(j, "output_activation"));
    return spec;
}

MlpParams stack_from_json(const json& j, const char* which) {
    MlpParams params;
    params.spec = spec_from_json(field(j, "spec"));
    const json& layers = field(j, "layers");
    if (!layers.is_array()) throw SchemaError("model file: 'layers' must be an array");
    std::size_t fan_in = params.spec.input_width;
    std::vector<std::size_t> widths = params.spec.hidden_widths;
    widths.push_back(params.spec.output_width);
    if (layers.size() != widths.size()) {
        throw SchemaError(std::string("model file: '") + which + ".layers' has " +
                          std::to_string(layers.size()) + " entries, spec requires " +
                          std::to_string(widths.size()));
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const json& lj = layers[i];
        const auto rows = field_as<std::size_t>(lj, "rows");
        const auto cols = field_as<std::size_t>(lj, "cols");
        if (rows != fan_in || cols != widths[i]) {
            throw SchemaError(std::string("model file: '") + which + ".layers[" +
                              std::to_string(i) + "]' shape " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " contradicts spec");
        }
        auto weights = field_as<std::vector<double>>(lj, "weight");
        auto bias = field_as<std::vector<double>>(lj, "bias");
        if (weights.size() != rows * cols) {
            throw SchemaError(std::string("model file: '") + which + ".layers[" +
                              std::to_string(i) + "].weight' length mismatch");
        }
        if (bias.size() != cols) {
            throw SchemaError(std::string("model file: '") + which + ".layers[" +
                              std::to_string(i) + "].bias' length mismatch");
        }
        try {
            params.layers.push_back(AffineLayer{Tensor(rows, cols, std::move(weights)),
                                                Tensor(1, cols, std::move(bias))});
        } catch (const DataError&) {
            throw SchemaError(std::string("model file: '") + which + ".layers[" +
                              std::to_string(i) + "]' contains non-finite values");
        }
        fan_in = widths[i];
    }
    return params;
}

}  // namespace

void save_model(const WiaeModel& model, const std::filesystem::path& path,
                const std::string& config_hash) {
    model.validate();
    json j{{"format_version", model.format_version},
           {"m", model.m},
           {"standardizer", json{{"mean", model.standardizer.mean},
                                 {"std", model.standardizer.std}}},
           {"encoder", stack_to_json(model.encoder)},
           {"decoder", stack_to_json(model.decoder)}};
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << j.dump(1) << "\n";
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

WiaeModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open model file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("model file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    const int version = field_as<int>(j, "format_version");
    if (version != kModelFormatVersion) {
        throw SchemaError("model file format_version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
    }
    WiaeModel model;
    model.format_version = version;
    model.m = field_as<std::size_t>(j, "m");
    const json& st = field(j, "standardizer");
    model.standardizer.mean = field_as<double>(st, "mean");
    model.standardizer.std = field_as<double>(st, "std");
    model.encoder = stack_from_json(field(j, "encoder"), "encoder");
    model.decoder = stack_from_json(field(j, "decoder"), "decoder");
    try {
        model.validate();
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("model file: ") + e.what());
    }
    return model;
}

}  // namespace wiae
