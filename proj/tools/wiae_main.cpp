#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wiae/errors.hpp"
#include "wiae/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::string> output_dir;
    std::optional<std::size_t> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> trajectories;
    std::optional<std::size_t> origin;

    void apply(wiae::RunConfig& config) const {
        if (output_dir) config.output_dir = *output_dir;
        if (epochs) config.train.epochs = *epochs;
        if (seed) {
            config.train.seed = *seed;
            config.forecast.seed = *seed;
        }
        if (horizon) {
            config.forecast.horizon = *horizon;
            config.evaluate.horizons = {*horizon};
        }
        if (trajectories) config.forecast.num_trajectories = *trajectories;
        if (origin) config.forecast.origin = *origin;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative probabilistic time-series forecasting with a weak-innovation "
                 "autoencoder"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "run configuration (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--output-dir", overrides.output_dir, "override output directory");
        cmd->add_option("--seed", overrides.seed, "override training and forecast seed");
    };

    CLI::App* generate = app.add_subcommand("generate", "synthesize the configured series to CSV");
    add_common(generate);
    CLI::App* train = app.add_subcommand("train", "train the autoencoder and save the model");
    add_common(train);
    train->add_option("--epochs", overrides.epochs, "override epoch count");
    CLI::App* extract = app.add_subcommand("extract", "emit innovation and reconstruction series");
    add_common(extract);
    CLI::App* forecast = app.add_subcommand("forecast", "sample future trajectories");
    add_common(forecast);
    forecast->add_option("--horizon", overrides.horizon, "override forecast horizon");
    forecast->add_option("--trajectories", overrides.trajectories, "override trajectory count");
    forecast->add_option("--origin", overrides.origin, "forecast origin index");
    CLI::App* evaluate = app.add_subcommand("evaluate", "score forecasts on the test split");
    add_common(evaluate);
    evaluate->add_option("--horizon", overrides.horizon, "evaluate a single horizon");
    evaluate->add_option("--trajectories", overrides.trajectories, "override trajectory count");
    CLI::App* runstest = app.add_subcommand("runstest", "randomness diagnostics of innovations");
    add_common(runstest);

    CLI11_PARSE(app, argc, argv);

    try {
        wiae::RunConfig config = wiae::parse_config(config_path);
        overrides.apply(config);
        config.validate();
        const wiae::Command command = wiae::command_from_name(app.get_subcommands()[0]->get_name());
        const auto written = wiae::run_pipeline(command, config);
        for (const auto& path : written) std::printf("%s\n", path.string().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
