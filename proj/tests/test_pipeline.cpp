#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "wiae/data.hpp"
#include "wiae/errors.hpp"
#include "wiae/forecasting.hpp"
#include "wiae/model_io.hpp"
#include "wiae/pipeline.hpp"

using namespace wiae;

namespace {

RunConfig tiny_run_config(const std::filesystem::path& out_dir) {
    RunConfig config = parse_config_text(R"({
        "dataset": {"generator": {"kind": "LAR", "length": 2500, "seed": 3}},
        "train": {"m": 4, "n": 8, "batch_size": 20, "epochs": 1,
                  "learning_rate": 0.0005, "seed": 11},
        "forecast": {"horizon": 5, "num_trajectories": 50, "seed": 2},
        "evaluate": {"horizons": [2], "origin_stride": 7, "max_origins": 40}
    })");
    config.output_dir = out_dir;
    return config;
}

std::size_t count_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("generate writes the configured number of rows with a config hash") {
    const auto dir = std::filesystem::temp_directory_path() / "wiae_pipe_gen";
    std::filesystem::remove_all(dir);
    RunConfig config = tiny_run_config(dir);
    const auto written = run_pipeline(Command::kGenerate, config);
    REQUIRE(written.size() == 1);
    // comment + header + 2500 rows
    CHECK(count_lines(written[0]) == 2502);
    CHECK(read_file(written[0]).starts_with("# config " + config.hash()));
    std::filesystem::remove_all(dir);
}

TEST_CASE("full pipeline runs end to end and is byte-identical on repeat") {
    const auto dir = std::filesystem::temp_directory_path() / "wiae_pipe_full";
    std::filesystem::remove_all(dir);
    RunConfig config = tiny_run_config(dir);
    const ArtifactPaths paths = artifact_paths(config);

    run_pipeline(Command::kGenerate, config);
    run_pipeline(Command::kTrain, config);
    run_pipeline(Command::kExtract, config);
    run_pipeline(Command::kForecast, config);
    run_pipeline(Command::kEvaluate, config);
    run_pipeline(Command::kRunsTest, config);

    for (const auto& p :
         {paths.series_csv, paths.model_json, paths.loss_csv, paths.innovations_csv,
          paths.reconstructions_csv, paths.trajectories_csv, paths.forecast_summary_csv,
          paths.metrics_txt, paths.metrics_csv, paths.ecdf_abs_csv, paths.ecdf_sq_csv,
          paths.runs_txt, paths.runs_csv}) {
        INFO(p.string());
        CHECK(std::filesystem::exists(p));
    }

    // trajectories: header + one row per trajectory
    CHECK(count_lines(paths.trajectories_csv) == 1 + 1 + 50);

    const std::string model_bytes = read_file(paths.model_json);
    const std::string metrics_bytes = read_file(paths.metrics_txt);
    for (const char* name :
         {"NMSE", "NMeSE", "NMAE", "NMeAE", "MASE", "sMAPE", "CRPS"}) {
        INFO(name);
        CHECK(metrics_bytes.find(name) != std::string::npos);
    }

    // a repeated run reproduces every byte
    run_pipeline(Command::kTrain, config);
    run_pipeline(Command::kEvaluate, config);
    CHECK(read_file(paths.model_json) == model_bytes);
    CHECK(read_file(paths.metrics_txt) == metrics_bytes);
    std::filesystem::remove_all(dir);
}

TEST_CASE("forecast_step_samples equals the matching trajectory column") {
    WiaeModel model = make_wiae_model(5, 3, {6});
    SplitRng rng(4);
    const std::vector<double> innovations = rng.uniform_vector(12, -0.9, 0.9);

    ForecastRequest request;
    request.horizon = 3;
    request.num_trajectories = 40;
    request.seed = 77;
    const ForecastDistribution dist = sample_trajectories(model, innovations, request);
    const std::vector<double> direct = forecast_step_samples(model, innovations, 3, 40, 77);
    REQUIRE(direct.size() == 40);
    for (std::size_t s = 0; s < 40; ++s) CHECK(direct[s] == dist.samples[s][2]);
}

TEST_CASE("output directory environment override wins") {
    const auto dir = std::filesystem::temp_directory_path() / "wiae_pipe_env";
    const auto env_dir = std::filesystem::temp_directory_path() / "wiae_pipe_env_override";
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(env_dir);
    RunConfig config = tiny_run_config(dir);
    setenv("WIAE_OUTPUT_DIR", env_dir.string().c_str(), 1);
    run_pipeline(Command::kGenerate, config);
    unsetenv("WIAE_OUTPUT_DIR");
    CHECK_FALSE(std::filesystem::exists(dir));
    CHECK(std::filesystem::exists(env_dir / "LAR_series.csv"));
    std::filesystem::remove_all(env_dir);
}

TEST_CASE("pipeline surfaces missing models as schema errors") {
    const auto dir = std::filesystem::temp_directory_path() / "wiae_pipe_missing";
    std::filesystem::remove_all(dir);
    RunConfig config = tiny_run_config(dir);
    CHECK_THROWS_AS(run_pipeline(Command::kForecast, config), SchemaError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("command names round trip") {
    for (const char* name : {"generate", "train", "extract", "forecast", "evaluate", "runstest"}) {
        CHECK(command_name(command_from_name(name)) == name);
    }
    CHECK_THROWS_AS(command_from_name("explode"), ConfigError);
}
