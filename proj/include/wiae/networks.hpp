#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wiae/graph.hpp"
#include "wiae/standardizer.hpp"
#include "wiae/tensor.hpp"

namespace wiae {

enum class Activation : std::uint8_t { kTanh, kLinear };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Fully connected architecture description. Hidden layers are always tanh;
/// the head is tanh or linear.
struct MlpSpec {
    std::size_t input_width = 0;
    std::vector<std::size_t> hidden_widths;
    std::size_t output_width = 1;
    Activation hidden_activation = Activation::kTanh;
    Activation output_activation = Activation::kLinear;

    void validate() const;
    std::size_t layer_count() const { return hidden_widths.size() + 1; }
    std::size_t param_count() const;

    bool operator==(const MlpSpec&) const = default;
};

/// The hidden sizes shared by encoder, decoder and both critics.
std::vector<std::size_t> default_hidden_widths();

MlpSpec encoder_spec(std::size_t m, std::vector<std::size_t> hidden = default_hidden_widths());
MlpSpec decoder_spec(std::size_t m, std::vector<std::size_t> hidden = default_hidden_widths());
MlpSpec critic_spec(std::size_t n, std::vector<std::size_t> hidden = default_hidden_widths());

struct AffineLayer {
    ad::Tensor weight;  // fan_in x fan_out
    ad::Tensor bias;    // 1 x fan_out
};

/// A spec plus its realized affine layer stack.
struct MlpParams {
    MlpSpec spec;
    std::vector<AffineLayer> layers;

    std::size_t param_count() const { return spec.param_count(); }
    std::vector<ad::Tensor*> tensors();
    std::vector<const ad::Tensor*> tensors() const;
};

/// Uniform(-sqrt(6/(fan_in+fan_out)), +...) weights, zero biases,
/// deterministic in the seed.
MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed);

/// Causal autoencoder: both halves read sliding windows of width m and emit
/// one value per window. The encoder head is tanh (innovations live in
/// (-1, 1)); the decoder head is linear so destandardized reconstructions are
/// unbounded.
struct WiaeModel {
    MlpParams encoder;
    MlpParams decoder;
    std::size_t m = 0;
    Standardizer standardizer;
    int format_version = 1;

    void validate() const;
};

struct Critic {
    MlpParams net;

    std::size_t input_width() const { return net.spec.input_width; }
    void validate() const;
};

WiaeModel make_wiae_model(std::size_t m, std::uint64_t seed,
                          std::vector<std::size_t> hidden = default_hidden_widths());
Critic make_critic(std::size_t n, std::uint64_t seed,
                   std::vector<std::size_t> hidden = default_hidden_widths());

/// Rows are windows (x_t, x_{t-1}, ..., x_{t-m+1}) for t = m-1 .. L-1.
ad::Tensor window_matrix(std::span<const double> series, std::size_t m);

/// Registers every layer tensor of an MLP on a graph, in layer order
/// (weight, bias, weight, bias, ...). Trainable stacks become params,
/// otherwise constants.
std::vector<ad::Value> bind_mlp(ad::Graph& g, const MlpParams& p, bool trainable);

/// Applies the MLP to a (rows x input_width) matrix; returns rows x output_width.
ad::Value mlp_apply(ad::Graph& g, const MlpSpec& spec, std::span<const ad::Value> bound,
                    ad::Value x);

/// Innovations for t = m-1 .. L-1 of an already standardized series.
std::vector<double> encode_series(const WiaeModel& model, std::span<const double> standardized);

/// Reconstructions for t = m-1 .. K-1 of an innovation sequence (standardized scale).
std::vector<double> decode_innovations(const WiaeModel& model,
                                       std::span<const double> innovations);

double critic_score(const Critic& critic, std::span<const double> block);

}  // namespace wiae
