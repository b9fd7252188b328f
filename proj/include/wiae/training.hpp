#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wiae/data.hpp"
#include "wiae/networks.hpp"
#include "wiae/rng.hpp"

namespace wiae {

struct TrainConfig {
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double lambda_reconstruction = 1.0;
    double gp_lambda1 = 1.0;  // innovation-critic penalty weight
    double gp_lambda2 = 1.0;  // reconstruction-critic penalty weight
    std::size_t m = 20;
    std::size_t n = 50;
    std::size_t batch_size = 60;
    std::size_t epochs = 100;
    std::size_t critic_steps_per_generator = 5;
    std::uint64_t seed = 1;

    void validate() const;
    /// Raw samples one training segment must supply so that a full
    /// (original, innovation, reconstruction) block triple aligns.
    std::size_t segment_length() const { return n + 2 * (m - 1); }
};

struct LossReport {
    std::size_t epoch = 0;
    double innovation_critic_objective = 0.0;
    double reconstruction_critic_objective = 0.0;
    double generator_objective = 0.0;
    std::pair<double, double> gradient_penalty_values{0.0, 0.0};
};

/// Per-parameter Adam moment accumulators for one parameter group.
struct AdamState {
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };
    std::vector<Moments> slots;
    std::int64_t step = 0;
};

/// One bias-corrected Adam step. `context` names the parameter group for
/// error reporting.
void adam_update(const std::vector<ad::Tensor*>& params, const std::vector<ad::Tensor>& grads,
                 AdamState& state, const TrainConfig& config, const std::string& context = "");

/// Mean critic score on real blocks minus mean score on fake blocks. The
/// critic ascends this; the generator descends the fake-side term.
double wasserstein_objective(const Critic& critic,
                             const std::vector<std::vector<double>>& real_blocks,
                             const std::vector<std::vector<double>>& fake_blocks);

/// lambda_gp * mean over pairs of (||grad_x D(x~)||_2 - 1)^2 with
/// x~ = eps*real + (1-eps)*fake, eps ~ U[0,1] per pair.
double gradient_penalty(const Critic& critic, const std::vector<std::vector<double>>& real,
                        const std::vector<std::vector<double>>& fake, double lambda_gp,
                        SplitRng& rng);

struct GradientPenaltyGrads {
    double value = 0.0;
    std::vector<ad::Tensor> weight_grads;  // layer order: W0, b0, W1, b1, ...
};
GradientPenaltyGrads gradient_penalty_with_grads(const Critic& critic,
                                                 const std::vector<std::vector<double>>& real,
                                                 const std::vector<std::vector<double>>& fake,
                                                 double lambda_gp, SplitRng& rng);

/// One adversarial round on a batch of standardized raw segments (each of
/// length segment_length()): critic_steps_per_generator ascent steps on both
/// critics, then one descent step on encoder and decoder weights.
LossReport train_step(WiaeModel& model, Critic& innovation_critic, Critic& reconstruction_critic,
                      const std::vector<std::vector<double>>& batch, const TrainConfig& config,
                      SplitRng& rng, AdamState& generator_state, AdamState& innovation_state,
                      AdamState& reconstruction_state, std::size_t epoch = 0);

struct TrainResult {
    WiaeModel model;
    Critic innovation_critic;
    Critic reconstruction_critic;
    std::vector<LossReport> history;  // one entry per epoch (step averages)
};

/// Full training run. Deterministic in (dataset, config): identical inputs
/// produce bit-identical models.
TrainResult train(const SeriesDataset& dataset, const TrainConfig& config,
                  std::vector<std::size_t> hidden = default_hidden_widths());

void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<LossReport>& history,
                            const std::string& header_comment = "");

}  // namespace wiae
