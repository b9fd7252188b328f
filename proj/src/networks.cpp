#include "wiae/networks.hpp"

#include <cmath>

#include "wiae/errors.hpp"
#include "wiae/rng.hpp"

namespace wiae {

using ad::Graph;
using ad::Tensor;
using ad::Value;

std::string activation_name(Activation a) {
    return a == Activation::kTanh ? "tanh" : "linear";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::kTanh;
    if (name == "linear") return Activation::kLinear;
    throw SchemaError("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
    if (input_width < 1 || output_width < 1) {
        throw ConfigError("mlp spec: input and output widths must be >= 1");
    }
    for (std::size_t w : hidden_widths) {
        if (w < 1) throw ConfigError("mlp spec: hidden widths must be >= 1");
    }
    if (hidden_activation != Activation::kTanh) {
        throw ConfigError("mlp spec: hidden activation must be tanh");
    }
}

std::size_t MlpSpec::param_count() const {
    std::size_t count = 0;
    std::size_t fan_in = input_width;
    for (std::size_t w : hidden_widths) {
        count += fan_in * w + w;
        fan_in = w;
    }
    count += fan_in * output_width + output_width;
    return count;
}

std::vector<std::size_t> default_hidden_widths() { return {100, 50, 25}; }

MlpSpec encoder_spec(std::size_t m, std::vector<std::size_t> hidden) {
    return MlpSpec{m, std::move(hidden), 1, Activation::kTanh, Activation::kTanh};
}

MlpSpec decoder_spec(std::size_t m, std::vector<std::size_t> hidden) {
    return MlpSpec{m, std::move(hidden), 1, Activation::kTanh, Activation::kLinear};
}

MlpSpec critic_spec(std::size_t n, std::vector<std::size_t> hidden) {
    return MlpSpec{n, std::move(hidden), 1, Activation::kTanh, Activation::kLinear};
}

std::vector<Tensor*> MlpParams::tensors() {
    std::vector<Tensor*> out;
    out.reserve(layers.size() * 2);
    for (AffineLayer& l : layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const Tensor*> MlpParams::tensors() const {
    std::vector<const Tensor*> out;
    out.reserve(layers.size() * 2);
    for (const AffineLayer& l : layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    SplitRng rng(seed);
    MlpParams params;
    params.spec = spec;
    std::size_t fan_in = spec.input_width;
    std::vector<std::size_t> widths = spec.hidden_widths;
    widths.push_back(spec.output_width);
    for (std::size_t fan_out : widths) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> w(fan_in * fan_out);
        for (double& v : w) v = rng.next_uniform(-bound, bound);
        params.layers.push_back(AffineLayer{Tensor(fan_in, fan_out, std::move(w)),
                                            Tensor(1, fan_out)});
        fan_in = fan_out;
    }
    return params;
}

void WiaeModel::validate() const {
    encoder.spec.validate();
    decoder.spec.validate();
    if (m < 1) throw ConfigError("model: window length m must be >= 1");
    if (encoder.spec.input_width != m || decoder.spec.input_width != m) {
        throw ConfigError("model: encoder/decoder input width must equal m");
    }
    if (encoder.spec.output_width != 1 || decoder.spec.output_width != 1) {
        throw ConfigError("model: encoder/decoder output width must be 1");
    }
    if (!(standardizer.std > 0.0)) {
        throw ConfigError("model: standardizer std must be positive");
    }
}

void Critic::validate() const {
    net.spec.validate();
    if (net.spec.output_activation != Activation::kLinear) {
        throw ConfigError("critic: output layer must be linear");
    }
    if (net.spec.output_width != 1) {
        throw ConfigError("critic: output width must be 1");
    }
}

WiaeModel make_wiae_model(std::size_t m, std::uint64_t seed, std::vector<std::size_t> hidden) {
    SplitRng root(seed);
    WiaeModel model;
    model.encoder = init_mlp(encoder_spec(m, hidden), root.split(1).next_u64());
    model.decoder = init_mlp(decoder_spec(m, std::move(hidden)), root.split(2).next_u64());
    model.m = m;
    return model;
}

Critic make_critic(std::size_t n, std::uint64_t seed, std::vector<std::size_t> hidden) {
    return Critic{init_mlp(critic_spec(n, std::move(hidden)), seed)};
}

Tensor window_matrix(std::span<const double> series, std::size_t m) {
    if (m < 1) throw ContractError("window_matrix: m must be >= 1");
    if (series.size() < m) {
        throw InsufficientHistoryError("window_matrix: series length " +
                                       std::to_string(series.size()) +
                                       " shorter than window " + std::to_string(m));
    }
    const std::size_t count = series.size() - m + 1;
    Tensor::Storage data(count * m);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t t = r + m - 1;
        for (std::size_t j = 0; j < m; ++j) data[r * m + j] = series[t - j];
    }
    return Tensor(count, m, std::move(data));
}

std::vector<Value> bind_mlp(Graph& g, const MlpParams& p, bool trainable) {
    std::vector<Value> bound;
    bound.reserve(p.layers.size() * 2);
    for (const AffineLayer& l : p.layers) {
        bound.push_back(trainable ? g.param(l.weight) : g.constant(l.weight));
        bound.push_back(trainable ? g.param(l.bias) : g.constant(l.bias));
    }
    return bound;
}

Value mlp_apply(Graph& g, const MlpSpec& spec, std::span<const Value> bound, Value x) {
    if (bound.size() != spec.layer_count() * 2) {
        throw ContractError("mlp_apply: bound parameter count does not match spec");
    }
    if (x.cols() != spec.input_width) {
        throw DimensionError("mlp_apply: input width " + std::to_string(x.cols()) +
                             " does not match spec width " + std::to_string(spec.input_width));
    }
    Value h = x;
    const std::size_t layers = spec.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        Value z = g.affine(h, bound[2 * l], bound[2 * l + 1]);
        const bool last = (l + 1 == layers);
        const Activation act = last ? spec.output_activation : spec.hidden_activation;
        h = act == Activation::kTanh ? g.tanh(z) : z;
    }
    return h;
}

namespace {

std::vector<double> run_windowed(const MlpParams& net, std::span<const double> series,
                                 std::size_t m, const char* what) {
    if (series.size() < m) {
        throw InsufficientHistoryError(std::string(what) + ": need at least " +
                                       std::to_string(m) + " values, got " +
                                       std::to_string(series.size()));
    }
    Graph g;
    Value windows = g.constant(window_matrix(series, m));
    std::vector<Value> bound = bind_mlp(g, net, false);
    Value out = mlp_apply(g, net.spec, bound, windows);
    const Tensor& t = out.val();
    return std::vector<double>(t.values().begin(), t.values().end());
}

}  // namespace

std::vector<double> encode_series(const WiaeModel& model, std::span<const double> standardized) {
    return run_windowed(model.encoder, standardized, model.m, "encode_series");
}

std::vector<double> decode_innovations(const WiaeModel& model,
                                       std::span<const double> innovations) {
    return run_windowed(model.decoder, innovations, model.m, "decode_innovations");
}

double critic_score(const Critic& critic, std::span<const double> block) {
    if (block.size() != critic.input_width()) {
        throw DimensionError("critic_score: block length " + std::to_string(block.size()) +
                             " does not match critic input width " +
                             std::to_string(critic.input_width()));
    }
    Graph g;
    Value x = g.constant(Tensor(1, block.size(),
                                std::vector<double>(block.begin(), block.end())));
    std::vector<Value> bound = bind_mlp(g, critic.net, false);
    return mlp_apply(g, critic.net.spec, bound, x).item();
}

}  // namespace wiae
