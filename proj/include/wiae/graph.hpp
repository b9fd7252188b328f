#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wiae/tensor.hpp"

namespace wiae::ad {

class Graph;

/// Lightweight handle to a node in a Graph. Values are cheap to copy and
/// remain valid for the lifetime of their graph.
class Value {
public:
    Value() = default;

    const Tensor& val() const;
    double item() const { return val().item(); }
    std::size_t rows() const { return val().rows(); }
    std::size_t cols() const { return val().cols(); }
    Graph* graph() const { return graph_; }
    std::uint32_t id() const { return id_; }
    bool valid() const { return graph_ != nullptr; }

private:
    friend class Graph;
    Value(Graph* g, std::uint32_t id) : graph_(g), id_(id) {}

    Graph* graph_ = nullptr;
    std::uint32_t id_ = 0;
};

/// Append-only computation graph over Tensor values with reverse-mode
/// differentiation. Recording is eager: every operation computes its result
/// immediately. backward() appends the adjoint computation as ordinary graph
/// nodes, so gradients are themselves differentiable (second-order works
/// through every primitive).
///
/// A graph is single-writer while recording; once no more nodes are added it
/// may be evaluated concurrently from multiple threads via const access.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Leaves.
    Value input(Tensor initial_value);   // rebindable via forward()
    Value param(Tensor value);           // trainable leaf
    Value constant(Tensor value);        // fixed data

    // Elementwise and scalar arithmetic.
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value neg(Value a);
    Value mul(Value a, Value b);
    Value div(Value a, Value b);
    Value scalar_mul(Value a, double c);
    Value scalar_add(Value a, double c);
    Value tanh(Value a);
    Value abs(Value a);
    Value sign(Value a);
    Value square(Value a);
    Value sqrt(Value a);
    /// Fused g * (1 - y*y); the adjoint form of tanh.
    Value tanh_grad(Value g, Value y);

    // Linear algebra and structure.
    Value matmul(Value a, Value b, bool trans_a = false, bool trans_b = false);
    /// Fused x @ w + row-broadcast bias.
    Value affine(Value x, Value w, Value bias);
    Value sum(Value a);                                    // -> 1x1
    Value mean(Value a);                                   // -> 1x1
    Value broadcast(Value scalar, std::size_t rows, std::size_t cols);
    Value col_sums(Value a);                               // RxC -> 1xC
    Value row_sums(Value a);                               // RxC -> Rx1
    Value tile_rows(Value row, std::size_t rows);          // 1xC -> RxC
    Value tile_cols(Value col, std::size_t cols);          // Rx1 -> RxC
    Value concat_cols(std::span<const Value> parts);
    Value slice_cols(Value a, std::size_t c0, std::size_t c1);
    Value pad_cols(Value a, std::size_t total_cols, std::size_t offset);
    Value reverse_cols(Value a);
    Value reshape(Value a, std::size_t rows, std::size_t cols);

    /// Per-row convex mix eps*a + (1-eps)*b with one fixed weight per row.
    Value interpolate(Value a, Value b, const std::vector<double>& eps);

    /// Replays every node with the given input bindings (parameters and
    /// constants keep their stored values) and returns the values of all sink
    /// nodes in creation order. Identical inputs reproduce recorded values
    /// bit-exactly.
    std::vector<Tensor> forward(std::span<const Tensor> inputs);

    /// Appends the adjoint computation of a scalar output and returns
    /// d(output)/d(wrt) for each requested leaf. Leaves with no path to the
    /// output receive an exact-zero gradient.
    std::vector<Value> backward(Value output, std::span<const Value> wrt);
    std::vector<Value> backward(Value output, std::initializer_list<Value> wrt);

    /// L2 norm of d(scalar_output)/d(input) as a graph-embedded scalar.
    Value input_gradient_norm(Value scalar_output, Value input);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t input_count() const { return input_ids_.size(); }
    const Tensor& value_at(std::uint32_t id) const;

private:
    enum class Op : std::uint8_t {
        kInput,
        kParam,
        kConstant,
        kAdd,
        kSub,
        kNeg,
        kMul,
        kDiv,
        kScalarMul,
        kScalarAdd,
        kTanh,
        kTanhGrad,
        kAbs,
        kSign,
        kSquare,
        kSqrt,
        kMatmul,
        kAffine,
        kSum,
        kMean,
        kBroadcast,
        kColSums,
        kRowSums,
        kTileRows,
        kTileCols,
        kConcatCols,
        kSliceCols,
        kPadCols,
        kReverseCols,
        kReshape,
        kInterpolate,
    };

    static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

    struct Node {
        Op op;
        std::uint32_t a = kNone;
        std::uint32_t b = kNone;
        std::vector<std::uint32_t> extra;  // concat operands
        double scalar = 0.0;
        std::uint32_t i0 = 0;  // slice begin / pad offset / tile count
        std::uint32_t i1 = 0;  // slice end / pad total
        bool trans_a = false;
        bool trans_b = false;
        std::vector<double> aux;  // interpolate row weights
        Tensor value;
    };

    friend class Value;

    Value wrap(std::uint32_t id) { return Value(this, id); }
    const Node& node(std::uint32_t id) const { return nodes_[id]; }
    Value check_owned(Value v, const char* what) const;
    Value emit(Node n);
    void compute(Node& n) const;
    Tensor eval_op(const Node& n) const;
    void add_grad(std::vector<std::uint32_t>& adj, std::uint32_t target, Value contribution);

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> input_ids_;
};

}  // namespace wiae::ad
