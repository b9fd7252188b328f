#include "wiae/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "wiae/errors.hpp"
#include "wiae/evaluation.hpp"
#include "wiae/forecasting.hpp"
#include "wiae/model_io.hpp"
#include "wiae/stats_tests.hpp"

namespace wiae {

Command command_from_name(const std::string& name) {
    if (name == "generate") return Command::kGenerate;
    if (name == "train") return Command::kTrain;
    if (name == "extract") return Command::kExtract;
    if (name == "forecast") return Command::kForecast;
    if (name == "evaluate") return Command::kEvaluate;
    if (name == "runstest") return Command::kRunsTest;
    throw ConfigError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::kGenerate: return "generate";
        case Command::kTrain: return "train";
        case Command::kExtract: return "extract";
        case Command::kForecast: return "forecast";
        case Command::kEvaluate: return "evaluate";
        case Command::kRunsTest: return "runstest";
    }
    return "?";
}

ArtifactPaths artifact_paths(const RunConfig& config) {
    const std::filesystem::path base = config.output_dir / config.name;
    ArtifactPaths p;
    p.series_csv = base.string() + "_series.csv";
    p.model_json = base.string() + "_model.json";
    p.loss_csv = base.string() + "_loss.csv";
    p.innovations_csv = base.string() + "_innovations.csv";
    p.reconstructions_csv = base.string() + "_reconstructions.csv";
    p.trajectories_csv = base.string() + "_trajectories.csv";
    p.forecast_summary_csv = base.string() + "_forecast_summary.csv";
    p.metrics_txt = base.string() + "_metrics.txt";
    p.metrics_csv = base.string() + "_metrics.csv";
    p.ecdf_abs_csv = base.string() + "_ecdf_abs.csv";
    p.ecdf_sq_csv = base.string() + "_ecdf_sq.csv";
    p.runs_txt = base.string() + "_runs.txt";
    p.runs_csv = base.string() + "_runs.csv";
    return p;
}

SeriesDataset resolve_dataset(const RunConfig& config) {
    SeriesDataset dataset;
    if (config.dataset.generator) {
        dataset = generate(*config.dataset.generator);
    } else if (config.dataset.csv) {
        dataset = load_csv(*config.dataset.csv);
    } else {
        throw ConfigError("config dataset: no source configured");
    }
    dataset.set_split_fraction(config.train_fraction);
    dataset.validate();
    return dataset;
}

namespace {

void write_indexed_csv(const std::filesystem::path& path, std::span<const double> values,
                       std::size_t first_index, const std::string& column,
                       const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "index," << column << "\n";
    char buf[48];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", first_index + i, values[i]);
        out << buf;
    }
}

struct ExtractResult {
    std::vector<double> innovations;      // aligned to index m-1
    std::vector<double> reconstructions;  // destandardized, aligned to index 2(m-1)
};

ExtractResult extract_series(const WiaeModel& model, const SeriesDataset& dataset) {
    ExtractResult r;
    r.innovations = innovation_history(model, dataset.values);
    const std::vector<double> recon_std = decode_innovations(model, r.innovations);
    r.reconstructions = destandardize(recon_std, model.standardizer);
    return r;
}

struct HorizonScores {
    std::vector<double> truth;
    std::vector<double> mean_forecast;
    std::vector<double> median_forecast;
    std::vector<std::vector<double>> samples;  // per origin
};

HorizonScores score_horizon(const WiaeModel& model, const SeriesDataset& dataset,
                            const std::vector<double>& innovations, std::size_t s,
                            const RunConfig& config) {
    const std::size_t m = model.m;
    const std::size_t len = dataset.values.size();
    HorizonScores scores;
    std::size_t origin = dataset.train_end >= s ? dataset.train_end - s : 0;
    if (origin < 2 * (m - 1)) origin = 2 * (m - 1);
    for (; origin + s < len; origin += config.evaluate.origin_stride) {
        if (config.evaluate.max_origins > 0 &&
            scores.truth.size() >= config.evaluate.max_origins) {
            break;
        }
        // innovations[i] corresponds to series index i + m - 1
        const std::size_t available = origin - m + 2;
        std::span<const double> history(innovations.data(), available);
        std::vector<double> samples = forecast_step_samples(model, history, s,
                                                            config.forecast.num_trajectories,
                                                            config.forecast.seed);
        double mean = 0.0;
        for (double v : samples) mean += v;
        mean /= static_cast<double>(samples.size());
        std::vector<double> tmp = samples;
        const double median = median_inplace(tmp);
        scores.truth.push_back(dataset.values[origin + s]);
        scores.mean_forecast.push_back(mean);
        scores.median_forecast.push_back(median);
        scores.samples.push_back(std::move(samples));
    }
    if (scores.truth.size() < 2) {
        throw ConfigError("evaluate: fewer than 2 usable forecast origins for horizon " +
                          std::to_string(s));
    }
    return scores;
}

MetricReport evaluate_horizon(const WiaeModel& model, const SeriesDataset& dataset,
                              const std::vector<double>& innovations, std::size_t s,
                              const RunConfig& config,
                              std::vector<double>* abs_errors_out,
                              std::vector<double>* sq_errors_out) {
    HorizonScores scores = score_horizon(model, dataset, innovations, s, config);

    OutlierFilterResult filtered = filter_outliers(
        scores.truth, {scores.mean_forecast, scores.median_forecast},
        config.evaluate.outlier_basis);
    std::vector<std::vector<double>> kept_samples;
    kept_samples.reserve(filtered.kept.size());
    for (std::size_t i : filtered.kept) kept_samples.push_back(std::move(scores.samples[i]));

    const std::vector<double>& truth = filtered.truth;
    const std::vector<double>& mean_fc = filtered.companions[0];
    const std::vector<double>& median_fc = filtered.companions[1];

    // Squared-error metrics use the sample mean, absolute-error metrics the
    // sample median.
    MetricReport mean_report = point_metrics(truth, mean_fc, s);
    MetricReport median_report = point_metrics(truth, median_fc, s);
    MetricReport report;
    report.horizon_step = s;
    report.evaluated = truth.size();
    report.excluded = filtered.excluded;
    report.values["NMSE"] = mean_report.values["NMSE"];
    report.values["NMeSE"] = mean_report.values["NMeSE"];
    report.values["NMAE"] = median_report.values["NMAE"];
    report.values["NMeAE"] = median_report.values["NMeAE"];
    report.values["MASE"] = median_report.values["MASE"];
    report.values["sMAPE"] = median_report.values["sMAPE"];

    double crps_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        crps_sum += crps(kept_samples[i], truth[i]);
    }
    report.values["CRPS"] = crps_sum / static_cast<double>(truth.size());

    if (abs_errors_out != nullptr) {
        abs_errors_out->clear();
        for (std::size_t i = 0; i < truth.size(); ++i) {
            abs_errors_out->push_back(std::fabs(truth[i] - median_fc[i]));
        }
    }
    if (sq_errors_out != nullptr) {
        sq_errors_out->clear();
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const double e = truth[i] - mean_fc[i];
            sq_errors_out->push_back(e * e);
        }
    }
    return report;
}

}  // namespace

std::vector<double> forecast_step_samples(const WiaeModel& model,
                                          std::span<const double> innovations, std::size_t s,
                                          std::size_t num_trajectories, std::uint64_t seed) {
    if (s < 1) throw ContractError("forecast_step_samples: step must be >= 1");
    const std::size_t m = model.m;
    if (innovations.size() + 1 < m) {
        throw InsufficientHistoryError("forecast_step_samples: need at least " +
                                       std::to_string(m - 1) + " innovations");
    }
    SplitRng root(seed);
    const std::size_t hist = innovations.size();
    std::vector<double> windows(num_trajectories * m);
    for (std::size_t traj = 0; traj < num_trajectories; ++traj) {
        const std::vector<double> u = root.split(traj).uniform_vector(s, -1.0, 1.0);
        double* row = windows.data() + traj * m;
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = j < s ? u[s - 1 - j] : innovations[hist - 1 - (j - s)];
        }
    }
    ad::Graph g;
    ad::Value x = g.constant(ad::Tensor(num_trajectories, m, std::move(windows)));
    std::vector<ad::Value> bound = bind_mlp(g, model.decoder, false);
    const ad::Tensor out = mlp_apply(g, model.decoder.spec, bound, x).val();
    std::vector<double> samples(num_trajectories);
    for (std::size_t traj = 0; traj < num_trajectories; ++traj) {
        samples[traj] = model.standardizer.inverse(out.data()[traj]);
    }
    return samples;
}

std::vector<std::filesystem::path> run_pipeline(Command command, RunConfig config) {
    if (const char* env_dir = std::getenv("WIAE_OUTPUT_DIR");
        env_dir != nullptr && env_dir[0] != '\0') {
        config.output_dir = env_dir;
    }
    config.validate();
    std::filesystem::create_directories(config.output_dir);
    const ArtifactPaths paths = artifact_paths(config);
    const std::string comment = "config " + config.hash();
    std::vector<std::filesystem::path> written;

    switch (command) {
        case Command::kGenerate: {
            const SeriesDataset dataset = resolve_dataset(config);
            save_csv(dataset, paths.series_csv, comment);
            written.push_back(paths.series_csv);
            break;
        }
        case Command::kTrain: {
            const SeriesDataset dataset = resolve_dataset(config);
            TrainResult result = train(dataset, config.train);
            save_model(result.model, paths.model_json, config.hash());
            write_loss_history_csv(paths.loss_csv, result.history, comment);
            written.push_back(paths.model_json);
            written.push_back(paths.loss_csv);
            break;
        }
        case Command::kExtract: {
            const SeriesDataset dataset = resolve_dataset(config);
            const WiaeModel model = load_model(paths.model_json);
            const ExtractResult extracted = extract_series(model, dataset);
            write_indexed_csv(paths.innovations_csv, extracted.innovations, model.m - 1,
                              "innovation", comment);
            write_indexed_csv(paths.reconstructions_csv, extracted.reconstructions,
                              2 * (model.m - 1), "reconstruction", comment);
            written.push_back(paths.innovations_csv);
            written.push_back(paths.reconstructions_csv);
            break;
        }
        case Command::kForecast: {
            const SeriesDataset dataset = resolve_dataset(config);
            const WiaeModel model = load_model(paths.model_json);
            const std::size_t origin =
                config.forecast.origin.value_or(dataset.values.size() - 1);
            if (origin >= dataset.values.size()) {
                throw ConfigError("forecast.origin " + std::to_string(origin) +
                                  " outside the series");
            }
            std::span<const double> observed(dataset.values.data(), origin + 1);
            const std::vector<double> innovations = innovation_history(model, observed);
            ForecastRequest request;
            request.origin = origin;
            request.horizon = config.forecast.horizon;
            request.num_trajectories = config.forecast.num_trajectories;
            request.seed = config.forecast.seed;
            const ForecastDistribution dist = sample_trajectories(model, innovations, request);
            write_trajectories_csv(paths.trajectories_csv, dist, comment);
            write_forecast_summary_csv(paths.forecast_summary_csv, dist, comment);
            written.push_back(paths.trajectories_csv);
            written.push_back(paths.forecast_summary_csv);
            break;
        }
        case Command::kEvaluate: {
            const SeriesDataset dataset = resolve_dataset(config);
            const WiaeModel model = load_model(paths.model_json);
            const std::vector<double> innovations = innovation_history(model, dataset.values);
            std::ofstream txt(paths.metrics_txt);
            if (!txt) throw DataError("cannot write '" + paths.metrics_txt.string() + "'");
            txt << "# " << comment << "\n";
            std::ofstream csv(paths.metrics_csv);
            if (!csv) throw DataError("cannot write '" + paths.metrics_csv.string() + "'");
            csv << "# " << comment << "\n" << MetricReport::csv_header() << "\n";
            for (std::size_t s : config.evaluate.horizons) {
                std::vector<double> abs_errors, sq_errors;
                const MetricReport report = evaluate_horizon(model, dataset, innovations, s,
                                                             config, &abs_errors, &sq_errors);
                txt << report.to_kv_text() << "\n";
                csv << report.to_csv_row(config.name, "GPF-WI", config.train.seed);
                if (config.evaluate.horizons.size() == 1) {
                    write_ecdf_csv(paths.ecdf_abs_csv, ecdf(abs_errors), comment);
                    write_ecdf_csv(paths.ecdf_sq_csv, ecdf(sq_errors), comment);
                    written.push_back(paths.ecdf_abs_csv);
                    written.push_back(paths.ecdf_sq_csv);
                } else {
                    const std::string suffix = "_h" + std::to_string(s) + ".csv";
                    auto abs_path = paths.ecdf_abs_csv;
                    abs_path.replace_extension();
                    abs_path += suffix;
                    auto sq_path = paths.ecdf_sq_csv;
                    sq_path.replace_extension();
                    sq_path += suffix;
                    write_ecdf_csv(abs_path, ecdf(abs_errors), comment);
                    write_ecdf_csv(sq_path, ecdf(sq_errors), comment);
                    written.push_back(abs_path);
                    written.push_back(sq_path);
                }
            }
            written.push_back(paths.metrics_txt);
            written.push_back(paths.metrics_csv);
            break;
        }
        case Command::kRunsTest: {
            const SeriesDataset dataset = resolve_dataset(config);
            const WiaeModel model = load_model(paths.model_json);
            const ExtractResult extracted = extract_series(model, dataset);
            const RunsTestReport report = runs_test(extracted.innovations);
            const double w1_uniform = wasserstein_1d(
                extracted.innovations, uniform_quantiles(extracted.innovations.size()));
            const double w1_recons = wasserstein_1d(
                extracted.reconstructions,
                std::span<const double>(dataset.values)
                    .subspan(2 * (model.m - 1), extracted.reconstructions.size()));
            {
                std::ofstream txt(paths.runs_txt);
                if (!txt) throw DataError("cannot write '" + paths.runs_txt.string() + "'");
                txt << "# " << comment << "\n" << report.to_kv_text();
                char buf[96];
                std::snprintf(buf, sizeof buf, "wasserstein_to_uniform=%.17g\n", w1_uniform);
                txt << buf;
                std::snprintf(buf, sizeof buf, "wasserstein_reconstruction=%.17g\n", w1_recons);
                txt << buf;
            }
            {
                std::ofstream csv(paths.runs_csv);
                if (!csv) throw DataError("cannot write '" + paths.runs_csv.string() + "'");
                csv << "# " << comment << "\n";
                csv << "dataset,seed,effective_length,runs,expected_runs,variance_runs,z,"
                       "p_two_sided,wasserstein_to_uniform,wasserstein_reconstruction\n";
                char buf[320];
                std::snprintf(buf, sizeof buf, "%s,%llu,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              config.name.c_str(),
                              static_cast<unsigned long long>(config.train.seed),
                              report.effective_length, report.runs, report.expected_runs,
                              report.variance_runs, report.z, report.p_two_sided, w1_uniform,
                              w1_recons);
                csv << buf;
            }
            written.push_back(paths.runs_txt);
            written.push_back(paths.runs_csv);
            break;
        }
    }
    return written;
}

}  // namespace wiae
