#include "wiae/run_config.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "wiae/errors.hpp"

namespace wiae {

namespace {

using nlohmann::json;

[[noreturn]] void key_error(const std::string& path, const std::string& what) {
    throw ConfigError("config key '" + path + "': " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("config: unknown key '" + (path.empty() ? key : path + "." + key) +
                              "'");
        }
    }
}

double get_double(const json& obj, const std::string& path, const char* key, double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) key_error(path + "." + key, "expected a number");
    return it->get<double>();
}

std::size_t get_count(const json& obj, const std::string& path, const char* key,
                      std::size_t fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() && !it->is_number_unsigned()) {
        key_error(path + "." + key, "expected an integer");
    }
    const auto v = it->get<std::int64_t>();
    if (v < 0) key_error(path + "." + key, "must be non-negative");
    return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const json& obj, const std::string& path, const char* key,
                       std::uint64_t fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() && !it->is_number_unsigned()) {
        key_error(path + "." + key, "expected an integer");
    }
    return it->get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) key_error(path + "." + key, "expected a string");
    return it->get<std::string>();
}

}  // namespace

void RunConfig::validate() const {
    if (format_version != kConfigFormatVersion) {
        throw ConfigError("config format_version " + std::to_string(format_version) +
                          " is not supported");
    }
    const bool has_generator = dataset.generator.has_value();
    const bool has_csv = dataset.csv.has_value();
    if (has_generator == has_csv) {
        throw ConfigError("config dataset: exactly one of 'generator' or 'csv' is required");
    }
    if (has_generator) dataset.generator->validate();
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw ConfigError("config split.train_fraction must be in (0, 1)");
    }
    train.validate();
    if (forecast.horizon < 1) throw ConfigError("config forecast.horizon must be >= 1");
    if (forecast.num_trajectories < 1) {
        throw ConfigError("config forecast.num_trajectories must be >= 1");
    }
    if (evaluate.horizons.empty()) throw ConfigError("config evaluate.horizons must not be empty");
    for (std::size_t h : evaluate.horizons) {
        if (h < 1) throw ConfigError("config evaluate.horizons entries must be >= 1");
    }
    if (evaluate.origin_stride < 1) throw ConfigError("config evaluate.origin_stride must be >= 1");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin_name) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);  // allow comments
    } catch (const json::exception& e) {
        throw ParseError("config '" + origin_name + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config '" + origin_name + "': expected a JSON object");

    reject_unknown(j, "", {"format_version", "name", "output_dir", "dataset", "split", "train",
                           "forecast", "evaluate"});

    RunConfig config;
    config.format_version = static_cast<int>(get_count(j, "", "format_version",
                                                       kConfigFormatVersion));
    config.name = get_string(j, "", "name", "");
    config.output_dir = get_string(j, "", "output_dir", "out");

    const auto dataset_it = j.find("dataset");
    if (dataset_it == j.end()) throw ConfigError("config: missing required key 'dataset'");
    const json& dj = *dataset_it;
    if (!dj.is_object()) throw ConfigError("config key 'dataset': expected an object");
    reject_unknown(dj, "dataset", {"generator", "csv"});
    if (dj.contains("generator")) {
        const json& gj = dj["generator"];
        if (!gj.is_object()) key_error("dataset.generator", "expected an object");
        reject_unknown(gj, "dataset.generator",
                       {"kind", "length", "seed", "burn_in", "period_seconds"});
        GeneratorSpec spec;
        const std::string kind = get_string(gj, "dataset.generator", "kind", "");
        if (kind.empty()) key_error("dataset.generator.kind", "required");
        spec.kind = generator_kind_from_name(kind);
        spec.length = get_count(gj, "dataset.generator", "length", 20000);
        spec.seed = get_seed(gj, "dataset.generator", "seed", 1);
        spec.burn_in = get_count(gj, "dataset.generator", "burn_in", 1000);
        spec.period_seconds = get_double(gj, "dataset.generator", "period_seconds", 300.0);
        config.dataset.generator = spec;
    }
    if (dj.contains("csv")) {
        if (!dj["csv"].is_string()) key_error("dataset.csv", "expected a string path");
        config.dataset.csv = std::filesystem::path(dj["csv"].get<std::string>());
    }

    if (j.contains("split")) {
        const json& sj = j["split"];
        if (!sj.is_object()) key_error("split", "expected an object");
        reject_unknown(sj, "split", {"train_fraction"});
        config.train_fraction = get_double(sj, "split", "train_fraction", 0.8);
    }

    if (j.contains("train")) {
        const json& tj = j["train"];
        if (!tj.is_object()) key_error("train", "expected an object");
        reject_unknown(tj, "train",
                       {"learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon",
                        "lambda_reconstruction", "gp_lambda1", "gp_lambda2", "m", "n",
                        "batch_size", "epochs", "critic_steps_per_generator", "seed"});
        TrainConfig& t = config.train;
        t.learning_rate = get_double(tj, "train", "learning_rate", t.learning_rate);
        t.adam_beta1 = get_double(tj, "train", "adam_beta1", t.adam_beta1);
        t.adam_beta2 = get_double(tj, "train", "adam_beta2", t.adam_beta2);
        t.adam_epsilon = get_double(tj, "train", "adam_epsilon", t.adam_epsilon);
        t.lambda_reconstruction =
            get_double(tj, "train", "lambda_reconstruction", t.lambda_reconstruction);
        t.gp_lambda1 = get_double(tj, "train", "gp_lambda1", t.gp_lambda1);
        t.gp_lambda2 = get_double(tj, "train", "gp_lambda2", t.gp_lambda2);
        t.m = get_count(tj, "train", "m", t.m);
        t.n = get_count(tj, "train", "n", t.n);
        t.batch_size = get_count(tj, "train", "batch_size", t.batch_size);
        t.epochs = get_count(tj, "train", "epochs", t.epochs);
        t.critic_steps_per_generator =
            get_count(tj, "train", "critic_steps_per_generator", t.critic_steps_per_generator);
        t.seed = get_seed(tj, "train", "seed", t.seed);
    }

    if (j.contains("forecast")) {
        const json& fj = j["forecast"];
        if (!fj.is_object()) key_error("forecast", "expected an object");
        reject_unknown(fj, "forecast", {"horizon", "num_trajectories", "seed", "origin"});
        config.forecast.horizon = get_count(fj, "forecast", "horizon", config.forecast.horizon);
        config.forecast.num_trajectories =
            get_count(fj, "forecast", "num_trajectories", config.forecast.num_trajectories);
        config.forecast.seed = get_seed(fj, "forecast", "seed", config.forecast.seed);
        if (fj.contains("origin")) {
            config.forecast.origin = get_count(fj, "forecast", "origin", 0);
        }
    }

    if (j.contains("evaluate")) {
        const json& ej = j["evaluate"];
        if (!ej.is_object()) key_error("evaluate", "expected an object");
        reject_unknown(ej, "evaluate",
                       {"horizons", "origin_stride", "max_origins", "outlier_basis"});
        if (ej.contains("horizons")) {
            if (!ej["horizons"].is_array()) key_error("evaluate.horizons", "expected an array");
            config.evaluate.horizons.clear();
            for (const json& h : ej["horizons"]) {
                if (!h.is_number_integer() && !h.is_number_unsigned()) {
                    key_error("evaluate.horizons", "expected integers");
                }
                const auto v = h.get<std::int64_t>();
                if (v < 1) key_error("evaluate.horizons", "entries must be >= 1");
                config.evaluate.horizons.push_back(static_cast<std::size_t>(v));
            }
        }
        config.evaluate.origin_stride =
            get_count(ej, "evaluate", "origin_stride", config.evaluate.origin_stride);
        config.evaluate.max_origins =
            get_count(ej, "evaluate", "max_origins", config.evaluate.max_origins);
        config.evaluate.outlier_basis = outlier_basis_from_name(
            get_string(ej, "evaluate", "outlier_basis", "truth"));
    }

    if (config.name.empty()) {
        config.name = config.dataset.generator
                          ? generator_kind_name(config.dataset.generator->kind)
                          : (config.dataset.csv ? config.dataset.csv->stem().string() : "run");
    }
    config.validate();
    return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text, path.string());
}

std::string RunConfig::canonical_json() const {
    json j;
    j["format_version"] = format_version;
    j["name"] = name;
    j["output_dir"] = output_dir.string();
    if (dataset.generator) {
        const GeneratorSpec& g = *dataset.generator;
        j["dataset"]["generator"] = json{{"kind", generator_kind_name(g.kind)},
                                         {"length", g.length},
                                         {"seed", g.seed},
                                         {"burn_in", g.burn_in},
                                         {"period_seconds", g.period_seconds}};
    }
    if (dataset.csv) j["dataset"]["csv"] = dataset.csv->string();
    j["split"]["train_fraction"] = train_fraction;
    j["train"] = json{{"learning_rate", train.learning_rate},
                      {"adam_beta1", train.adam_beta1},
                      {"adam_beta2", train.adam_beta2},
                      {"adam_epsilon", train.adam_epsilon},
                      {"lambda_reconstruction", train.lambda_reconstruction},
                      {"gp_lambda1", train.gp_lambda1},
                      {"gp_lambda2", train.gp_lambda2},
                      {"m", train.m},
                      {"n", train.n},
                      {"batch_size", train.batch_size},
                      {"epochs", train.epochs},
                      {"critic_steps_per_generator", train.critic_steps_per_generator},
                      {"seed", train.seed}};
    j["forecast"] = json{{"horizon", forecast.horizon},
                         {"num_trajectories", forecast.num_trajectories},
                         {"seed", forecast.seed}};
    if (forecast.origin) j["forecast"]["origin"] = *forecast.origin;
    j["evaluate"] = json{{"horizons", evaluate.horizons},
                         {"origin_stride", evaluate.origin_stride},
                         {"max_origins", evaluate.max_origins},
                         {"outlier_basis", outlier_basis_name(evaluate.outlier_basis)}};
    return j.dump();
}

std::string RunConfig::hash() const {
    const std::string text = canonical_json();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wiae
