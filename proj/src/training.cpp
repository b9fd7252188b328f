#include "wiae/training.hpp"

#include <cmath>
#include <fstream>

#include "wiae/errors.hpp"

namespace wiae {

using ad::Graph;
using ad::Tensor;
using ad::Value;

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0) throw ConfigError("train.adam_beta1 must be in [0, 1)");
    if (adam_beta2 < 0.0 || adam_beta2 >= 1.0) throw ConfigError("train.adam_beta2 must be in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("train.adam_epsilon must be > 0");
    if (lambda_reconstruction < 0.0) throw ConfigError("train.lambda_reconstruction must be >= 0");
    if (gp_lambda1 < 0.0 || gp_lambda2 < 0.0) throw ConfigError("train.gp_lambda must be >= 0");
    if (m < 1) throw ConfigError("train.m must be >= 1");
    if (n < m) throw ConfigError("train.n must be >= m");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
}

// --- Adam -------------------------------------------------------------------

void adam_update(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                 AdamState& state, const TrainConfig& config, const std::string& context) {
    if (params.size() != grads.size()) {
        throw DimensionError("adam_update: " + std::to_string(params.size()) + " params vs " +
                             std::to_string(grads.size()) + " grads" +
                             (context.empty() ? "" : " (" + context + ")"));
    }
    if (state.slots.empty()) {
        state.slots.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.slots[i].m.assign(params[i]->size(), 0.0);
            state.slots[i].v.assign(params[i]->size(), 0.0);
        }
    }
    if (state.slots.size() != params.size()) {
        throw DimensionError("adam_update: state has " + std::to_string(state.slots.size()) +
                             " slots for " + std::to_string(params.size()) + " params");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        if (!p.same_shape(g)) {
            throw DimensionError("adam_update: param " + std::to_string(i) + " shape " +
                                 p.shape_string() + " vs grad " + g.shape_string() +
                                 (context.empty() ? "" : " (" + context + ")"));
        }
        AdamState::Moments& mo = state.slots[i];
        double* pd = p.data();
        const double* gd = g.data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!std::isfinite(gd[j])) {
                throw TrainingError("non-finite gradient for parameter " + std::to_string(i) +
                                    (context.empty() ? "" : " (" + context + ")"));
            }
            mo.m[j] = config.adam_beta1 * mo.m[j] + (1.0 - config.adam_beta1) * gd[j];
            mo.v[j] = config.adam_beta2 * mo.v[j] + (1.0 - config.adam_beta2) * gd[j] * gd[j];
            const double m_hat = mo.m[j] / bc1;
            const double v_hat = mo.v[j] / bc2;
            pd[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
        }
    }
}

// --- block helpers ----------------------------------------------------------

namespace {

Tensor block_tensor(const std::vector<std::vector<double>>& blocks, const char* what) {
    if (blocks.empty()) throw ContractError(std::string(what) + ": empty batch");
    const std::size_t width = blocks.front().size();
    Tensor::Storage data;
    data.reserve(blocks.size() * width);
    for (const std::vector<double>& b : blocks) {
        if (b.size() != width) {
            throw DimensionError(std::string(what) + ": ragged block widths");
        }
        data.insert(data.end(), b.begin(), b.end());
    }
    return Tensor(blocks.size(), width, std::move(data));
}

void check_block_width(const Critic& critic, const Tensor& t, const char* what) {
    if (t.cols() != critic.input_width()) {
        throw DimensionError(std::string(what) + ": block width " + std::to_string(t.cols()) +
                             " does not match critic input width " +
                             std::to_string(critic.input_width()));
    }
}

/// Penalty on interpolated points. The interpolation happens outside the graph
/// (it is constant with respect to critic weights); the per-sample input
/// gradient comes from one backward pass through the critic, which the graph
/// records as differentiable nodes so the penalty can be differentiated again.
Value build_gradient_penalty(Graph& g, const Critic& critic, std::span<const Value> bound,
                             const Tensor& real, const Tensor& fake, double lambda_gp,
                             SplitRng& rng) {
    std::vector<double> mixed(real.size());
    for (std::size_t r = 0; r < real.rows(); ++r) {
        const double e = rng.next_unit();
        for (std::size_t c = 0; c < real.cols(); ++c) {
            const std::size_t i = r * real.cols() + c;
            mixed[i] = e * real.data()[i] + (1.0 - e) * fake.data()[i];
        }
    }
    Value x = g.input(Tensor(real.rows(), real.cols(), std::move(mixed)));
    Value scores = mlp_apply(g, critic.net.spec, bound, x);
    Value per_sample_grads = g.backward(g.sum(scores), {x})[0];
    Value norms = g.sqrt(g.row_sums(g.square(per_sample_grads)));
    return g.scalar_mul(g.mean(g.square(g.scalar_add(norms, -1.0))), lambda_gp);
}

/// Windows of width w over each row of a (B x L) matrix, newest value first,
/// stacked into a (B*(L-w+1)) x w matrix with row index b*(L-w+1) + t.
Value sliding_windows(Graph& g, Value matrix, std::size_t w) {
    const std::size_t rows = matrix.rows();
    const std::size_t len = matrix.cols();
    if (len < w) {
        throw InsufficientHistoryError("sliding_windows: length " + std::to_string(len) +
                                       " shorter than window " + std::to_string(w));
    }
    const std::size_t count = len - w + 1;
    std::vector<Value> parts;
    parts.reserve(w);
    for (std::size_t j = 0; j < w; ++j) {
        const std::size_t c0 = w - 1 - j;
        Value col = g.slice_cols(matrix, c0, c0 + count);
        parts.push_back(g.reshape(col, rows * count, 1));
    }
    return g.concat_cols(parts);
}

}  // namespace

// --- spec-level objectives ----------------------------------------------------

double wasserstein_objective(const Critic& critic,
                             const std::vector<std::vector<double>>& real_blocks,
                             const std::vector<std::vector<double>>& fake_blocks) {
    const Tensor real = block_tensor(real_blocks, "wasserstein_objective");
    const Tensor fake = block_tensor(fake_blocks, "wasserstein_objective");
    check_block_width(critic, real, "wasserstein_objective");
    check_block_width(critic, fake, "wasserstein_objective");
    Graph g;
    std::vector<Value> bound = bind_mlp(g, critic.net, false);
    Value mr = g.mean(mlp_apply(g, critic.net.spec, bound, g.constant(real)));
    Value mf = g.mean(mlp_apply(g, critic.net.spec, bound, g.constant(fake)));
    return g.sub(mr, mf).item();
}

double gradient_penalty(const Critic& critic, const std::vector<std::vector<double>>& real,
                        const std::vector<std::vector<double>>& fake, double lambda_gp,
                        SplitRng& rng) {
    const Tensor rt = block_tensor(real, "gradient_penalty");
    const Tensor ft = block_tensor(fake, "gradient_penalty");
    if (!rt.same_shape(ft)) {
        throw DimensionError("gradient_penalty: real and fake batches must have equal shape");
    }
    check_block_width(critic, rt, "gradient_penalty");
    Graph g;
    std::vector<Value> bound = bind_mlp(g, critic.net, false);
    return build_gradient_penalty(g, critic, bound, rt, ft, lambda_gp, rng).item();
}

GradientPenaltyGrads gradient_penalty_with_grads(const Critic& critic,
                                                 const std::vector<std::vector<double>>& real,
                                                 const std::vector<std::vector<double>>& fake,
                                                 double lambda_gp, SplitRng& rng) {
    const Tensor rt = block_tensor(real, "gradient_penalty");
    const Tensor ft = block_tensor(fake, "gradient_penalty");
    if (!rt.same_shape(ft)) {
        throw DimensionError("gradient_penalty: real and fake batches must have equal shape");
    }
    check_block_width(critic, rt, "gradient_penalty");
    Graph g;
    std::vector<Value> bound = bind_mlp(g, critic.net, true);
    Value pen = build_gradient_penalty(g, critic, bound, rt, ft, lambda_gp, rng);
    std::vector<Value> grads = g.backward(pen, bound);
    GradientPenaltyGrads out;
    out.value = pen.item();
    out.weight_grads.reserve(grads.size());
    for (const Value& v : grads) out.weight_grads.push_back(v.val());
    return out;
}

// --- adversarial round --------------------------------------------------------

namespace {

struct CriticStepOutcome {
    double objective = 0.0;
    double penalty = 0.0;
};

CriticStepOutcome critic_ascent_step(Critic& critic, const Tensor& real, const Tensor& fake,
                                     double lambda_gp, const TrainConfig& config, SplitRng& rng,
                                     AdamState& state, const std::string& context) {
    Graph g;
    std::vector<Value> bound = bind_mlp(g, critic.net, true);
    Value mr = g.mean(mlp_apply(g, critic.net.spec, bound, g.constant(real)));
    Value mf = g.mean(mlp_apply(g, critic.net.spec, bound, g.constant(fake)));
    Value objective = g.sub(mr, mf);
    Value penalty = build_gradient_penalty(g, critic, bound, real, fake, lambda_gp, rng);
    Value loss = g.add(g.neg(objective), penalty);
    std::vector<Value> grads = g.backward(loss, bound);
    std::vector<Tensor> grad_tensors;
    grad_tensors.reserve(grads.size());
    for (const Value& v : grads) grad_tensors.push_back(v.val());
    adam_update(critic.net.tensors(), grad_tensors, state, config, context);
    return CriticStepOutcome{objective.item(), penalty.item()};
}

}  // namespace

LossReport train_step(WiaeModel& model, Critic& innovation_critic, Critic& reconstruction_critic,
                      const std::vector<std::vector<double>>& batch, const TrainConfig& config,
                      SplitRng& rng, AdamState& generator_state, AdamState& innovation_state,
                      AdamState& reconstruction_state, std::size_t epoch) {
    config.validate();
    const std::size_t seg_len = config.segment_length();
    const std::size_t n = config.n;
    const std::size_t window_count = n + config.m - 1;
    if (batch.size() < config.batch_size) {
        throw ContractError("train_step: batch supplies " + std::to_string(batch.size()) +
                            " segments, need " + std::to_string(config.batch_size));
    }
    for (const std::vector<double>& seg : batch) {
        if (seg.size() != seg_len) {
            throw ContractError("train_step: segment length " + std::to_string(seg.size()) +
                                " != " + std::to_string(seg_len));
        }
    }
    const std::string context = "epoch " + std::to_string(epoch);
    try {
        const std::size_t b = batch.size();

        // One recorded forward pass through the autoencoder serves both the
        // critic updates (as detached block values; generator weights do not
        // change during critic ascent) and the final generator update.
        Graph g;
        Value x = g.constant(block_tensor(batch, "train_step"));
        std::vector<Value> enc_bound = bind_mlp(g, model.encoder, true);
        std::vector<Value> dec_bound = bind_mlp(g, model.decoder, true);
        Value enc_windows = sliding_windows(g, x, config.m);
        Value innovations =
            g.reshape(mlp_apply(g, model.encoder.spec, enc_bound, enc_windows), b, window_count);
        Value dec_windows = sliding_windows(g, innovations, config.m);
        Value reconstructions =
            g.reshape(mlp_apply(g, model.decoder.spec, dec_bound, dec_windows), b, n);
        Value innovation_blocks =
            g.reverse_cols(g.slice_cols(innovations, window_count - n, window_count));
        Value reconstruction_blocks = g.reverse_cols(reconstructions);
        Value original_blocks = g.reverse_cols(g.slice_cols(x, seg_len - n, seg_len));

        const Tensor innovation_value = innovation_blocks.val();
        const Tensor reconstruction_value = reconstruction_blocks.val();
        const Tensor original_value = original_blocks.val();

        CriticStepOutcome innovation_outcome;
        CriticStepOutcome reconstruction_outcome;
        for (std::size_t k = 0; k < config.critic_steps_per_generator; ++k) {
            Tensor uniform_ref(b, n, rng.uniform_vector(b * n, -1.0, 1.0));
            innovation_outcome =
                critic_ascent_step(innovation_critic, uniform_ref, innovation_value,
                                   config.gp_lambda1, config, rng, innovation_state,
                                   context + ", innovation critic");
            reconstruction_outcome =
                critic_ascent_step(reconstruction_critic, original_value, reconstruction_value,
                                   config.gp_lambda2, config, rng, reconstruction_state,
                                   context + ", reconstruction critic");
        }

        // Generator descends the fake-side terms under the updated critics.
        std::vector<Value> ci_bound = bind_mlp(g, innovation_critic.net, false);
        Value gen_loss = g.neg(
            g.mean(mlp_apply(g, innovation_critic.net.spec, ci_bound, innovation_blocks)));
        if (config.lambda_reconstruction != 0.0) {
            std::vector<Value> cr_bound = bind_mlp(g, reconstruction_critic.net, false);
            Value recon_term = g.neg(g.mean(
                mlp_apply(g, reconstruction_critic.net.spec, cr_bound, reconstruction_blocks)));
            gen_loss = g.add(gen_loss, g.scalar_mul(recon_term, config.lambda_reconstruction));
        }
        std::vector<Value> wrt = enc_bound;
        wrt.insert(wrt.end(), dec_bound.begin(), dec_bound.end());
        std::vector<Value> grads = g.backward(gen_loss, wrt);
        std::vector<Tensor> grad_tensors;
        grad_tensors.reserve(grads.size());
        for (const Value& v : grads) grad_tensors.push_back(v.val());
        std::vector<Tensor*> params = model.encoder.tensors();
        std::vector<Tensor*> dec_params = model.decoder.tensors();
        params.insert(params.end(), dec_params.begin(), dec_params.end());
        adam_update(params, grad_tensors, generator_state, config, context + ", generator");

        LossReport report;
        report.epoch = epoch;
        report.innovation_critic_objective = innovation_outcome.objective;
        report.reconstruction_critic_objective = reconstruction_outcome.objective;
        report.generator_objective = gen_loss.item();
        report.gradient_penalty_values = {innovation_outcome.penalty,
                                          reconstruction_outcome.penalty};
        return report;
    } catch (const DataError& e) {
        throw TrainingError(context + ": " + e.what());
    }
}

TrainResult train(const SeriesDataset& dataset, const TrainConfig& config,
                  std::vector<std::size_t> hidden) {
    config.validate();
    dataset.validate();
    const std::size_t seg_len = config.segment_length();
    if (dataset.train_end < seg_len + config.batch_size) {
        throw ConfigError("train: training split length " + std::to_string(dataset.train_end) +
                          " below required " + std::to_string(seg_len + config.batch_size));
    }

    StandardizedSeries standardized = standardize(dataset);
    SplitRng root(config.seed);

    TrainResult result;
    result.model = make_wiae_model(config.m, root.split(10).next_u64(), hidden);
    result.model.standardizer = standardized.standardizer;
    result.innovation_critic = make_critic(config.n, root.split(11).next_u64(), hidden);
    result.reconstruction_critic = make_critic(config.n, root.split(12).next_u64(), hidden);

    SplitRng batch_rng = root.split(13);
    SplitRng step_rng = root.split(14);

    AdamState generator_state, innovation_state, reconstruction_state;
    const std::size_t num_segments = dataset.train_end - seg_len + 1;
    const std::size_t steps_per_epoch = std::max<std::size_t>(1, num_segments / config.batch_size);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        LossReport epoch_report;
        epoch_report.epoch = epoch;
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            std::vector<std::vector<double>> batch;
            batch.reserve(config.batch_size);
            for (std::size_t i = 0; i < config.batch_size; ++i) {
                const std::size_t start = batch_rng.next_index(num_segments);
                batch.emplace_back(standardized.values.begin() + start,
                                   standardized.values.begin() + start + seg_len);
            }
            const LossReport r =
                train_step(result.model, result.innovation_critic, result.reconstruction_critic,
                           batch, config, step_rng, generator_state, innovation_state,
                           reconstruction_state, epoch);
            epoch_report.innovation_critic_objective += r.innovation_critic_objective;
            epoch_report.reconstruction_critic_objective += r.reconstruction_critic_objective;
            epoch_report.generator_objective += r.generator_objective;
            epoch_report.gradient_penalty_values.first += r.gradient_penalty_values.first;
            epoch_report.gradient_penalty_values.second += r.gradient_penalty_values.second;
        }
        const double inv = 1.0 / static_cast<double>(steps_per_epoch);
        epoch_report.innovation_critic_objective *= inv;
        epoch_report.reconstruction_critic_objective *= inv;
        epoch_report.generator_objective *= inv;
        epoch_report.gradient_penalty_values.first *= inv;
        epoch_report.gradient_penalty_values.second *= inv;
        result.history.push_back(epoch_report);
    }
    return result;
}

void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<LossReport>& history,
                            const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "epoch,innovation_critic_objective,reconstruction_critic_objective,"
           "generator_objective,gradient_penalty_innovation,gradient_penalty_reconstruction\n";
    char buf[512];
    for (const LossReport& r : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                      r.innovation_critic_objective, r.reconstruction_critic_objective,
                      r.generator_objective, r.gradient_penalty_values.first,
                      r.gradient_penalty_values.second);
        out << buf;
    }
}

}  // namespace wiae
