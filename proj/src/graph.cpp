#include "wiae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wiae/errors.hpp"
#include "wiae/kernels.hpp"

namespace wiae::ad {

namespace {

[[noreturn]] void shape_error(const char* op, std::uint32_t id, const std::string& detail) {
    throw DimensionError(std::string("node ") + std::to_string(id) + " (" + op + "): " + detail);
}

}  // namespace

const Tensor& Value::val() const {
    if (graph_ == nullptr) {
        throw LookupError("value handle is empty");
    }
    return graph_->value_at(id_);
}

const Tensor& Graph::value_at(std::uint32_t id) const {
    if (id >= nodes_.size()) {
        throw LookupError("node id " + std::to_string(id) + " out of range");
    }
    return nodes_[id].value;
}

Value Graph::check_owned(Value v, const char* what) const {
    if (v.graph() != this) {
        throw LookupError(std::string(what) + ": tensor does not belong to this graph");
    }
    return v;
}

Value Graph::emit(Node n) {
    if (n.op != Op::kInput && n.op != Op::kParam && n.op != Op::kConstant) {
        n.value = eval_op(n);
    }
    nodes_.push_back(std::move(n));
    return wrap(static_cast<std::uint32_t>(nodes_.size() - 1));
}

// --- leaves -----------------------------------------------------------------

Value Graph::input(Tensor initial_value) {
    Node n;
    n.op = Op::kInput;
    n.value = std::move(initial_value);
    Value v = emit(std::move(n));
    input_ids_.push_back(v.id());
    return v;
}

Value Graph::param(Tensor value) {
    Node n;
    n.op = Op::kParam;
    n.value = std::move(value);
    return emit(std::move(n));
}

Value Graph::constant(Tensor value) {
    Node n;
    n.op = Op::kConstant;
    n.value = std::move(value);
    return emit(std::move(n));
}

// --- op builders ------------------------------------------------------------

Value Graph::add(Value a, Value b) {
    check_owned(a, "add");
    check_owned(b, "add");
    Node n;
    n.op = Op::kAdd;
    n.a = a.id();
    n.b = b.id();
    return emit(std::move(n));
}

Value Graph::sub(Value a, Value b) {
    check_owned(a, "sub");
    check_owned(b, "sub");
    Node n;
    n.op = Op::kSub;
    n.a = a.id();
    n.b = b.id();
    return emit(std::move(n));
}

Value Graph::neg(Value a) {
    check_owned(a, "neg");
    Node n;
    n.op = Op::kNeg;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::mul(Value a, Value b) {
    check_owned(a, "mul");
    check_owned(b, "mul");
    Node n;
    n.op = Op::kMul;
    n.a = a.id();
    n.b = b.id();
    return emit(std::move(n));
}

Value Graph::div(Value a, Value b) {
    check_owned(a, "div");
    check_owned(b, "div");
    Node n;
    n.op = Op::kDiv;
    n.a = a.id();
    n.b = b.id();
    return emit(std::move(n));
}

Value Graph::scalar_mul(Value a, double c) {
    check_owned(a, "scalar_mul");
    Node n;
    n.op = Op::kScalarMul;
    n.a = a.id();
    n.scalar = c;
    return emit(std::move(n));
}

Value Graph::scalar_add(Value a, double c) {
    check_owned(a, "scalar_add");
    Node n;
    n.op = Op::kScalarAdd;
    n.a = a.id();
    n.scalar = c;
    return emit(std::move(n));
}

Value Graph::tanh(Value a) {
    check_owned(a, "tanh");
    Node n;
    n.op = Op::kTanh;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::tanh_grad(Value g, Value y) {
    check_owned(g, "tanh_grad");
    check_owned(y, "tanh_grad");
    Node n;
    n.op = Op::kTanhGrad;
    n.a = g.id();
    n.b = y.id();
    return emit(std::move(n));
}

Value Graph::abs(Value a) {
    check_owned(a, "abs");
    Node n;
    n.op = Op::kAbs;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::sign(Value a) {
    check_owned(a, "sign");
    Node n;
    n.op = Op::kSign;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::square(Value a) {
    check_owned(a, "square");
    Node n;
    n.op = Op::kSquare;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::sqrt(Value a) {
    check_owned(a, "sqrt");
    Node n;
    n.op = Op::kSqrt;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::matmul(Value a, Value b, bool trans_a, bool trans_b) {
    check_owned(a, "matmul");
    check_owned(b, "matmul");
    Node n;
    n.op = Op::kMatmul;
    n.a = a.id();
    n.b = b.id();
    n.trans_a = trans_a;
    n.trans_b = trans_b;
    return emit(std::move(n));
}

Value Graph::affine(Value x, Value w, Value bias) {
    check_owned(x, "affine");
    check_owned(w, "affine");
    check_owned(bias, "affine");
    Node n;
    n.op = Op::kAffine;
    n.a = x.id();
    n.b = w.id();
    n.extra.push_back(bias.id());
    return emit(std::move(n));
}

Value Graph::sum(Value a) {
    check_owned(a, "sum");
    Node n;
    n.op = Op::kSum;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::mean(Value a) {
    check_owned(a, "mean");
    Node n;
    n.op = Op::kMean;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::broadcast(Value scalar, std::size_t rows, std::size_t cols) {
    check_owned(scalar, "broadcast");
    Node n;
    n.op = Op::kBroadcast;
    n.a = scalar.id();
    n.i0 = static_cast<std::uint32_t>(rows);
    n.i1 = static_cast<std::uint32_t>(cols);
    return emit(std::move(n));
}

Value Graph::col_sums(Value a) {
    check_owned(a, "col_sums");
    Node n;
    n.op = Op::kColSums;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::row_sums(Value a) {
    check_owned(a, "row_sums");
    Node n;
    n.op = Op::kRowSums;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::tile_rows(Value row, std::size_t rows) {
    check_owned(row, "tile_rows");
    Node n;
    n.op = Op::kTileRows;
    n.a = row.id();
    n.i0 = static_cast<std::uint32_t>(rows);
    return emit(std::move(n));
}

Value Graph::tile_cols(Value col, std::size_t cols) {
    check_owned(col, "tile_cols");
    Node n;
    n.op = Op::kTileCols;
    n.a = col.id();
    n.i0 = static_cast<std::uint32_t>(cols);
    return emit(std::move(n));
}

Value Graph::concat_cols(std::span<const Value> parts) {
    if (parts.empty()) {
        throw ContractError("concat_cols: no operands");
    }
    Node n;
    n.op = Op::kConcatCols;
    n.extra.reserve(parts.size());
    for (const Value& v : parts) {
        check_owned(v, "concat_cols");
        n.extra.push_back(v.id());
    }
    return emit(std::move(n));
}

Value Graph::slice_cols(Value a, std::size_t c0, std::size_t c1) {
    check_owned(a, "slice_cols");
    Node n;
    n.op = Op::kSliceCols;
    n.a = a.id();
    n.i0 = static_cast<std::uint32_t>(c0);
    n.i1 = static_cast<std::uint32_t>(c1);
    return emit(std::move(n));
}

Value Graph::pad_cols(Value a, std::size_t total_cols, std::size_t offset) {
    check_owned(a, "pad_cols");
    Node n;
    n.op = Op::kPadCols;
    n.a = a.id();
    n.i0 = static_cast<std::uint32_t>(offset);
    n.i1 = static_cast<std::uint32_t>(total_cols);
    return emit(std::move(n));
}

Value Graph::reverse_cols(Value a) {
    check_owned(a, "reverse_cols");
    Node n;
    n.op = Op::kReverseCols;
    n.a = a.id();
    return emit(std::move(n));
}

Value Graph::reshape(Value a, std::size_t rows, std::size_t cols) {
    check_owned(a, "reshape");
    Node n;
    n.op = Op::kReshape;
    n.a = a.id();
    n.i0 = static_cast<std::uint32_t>(rows);
    n.i1 = static_cast<std::uint32_t>(cols);
    return emit(std::move(n));
}

Value Graph::interpolate(Value a, Value b, const std::vector<double>& eps) {
    check_owned(a, "interpolate");
    check_owned(b, "interpolate");
    Node n;
    n.op = Op::kInterpolate;
    n.a = a.id();
    n.b = b.id();
    n.aux = eps;
    return emit(std::move(n));
}

// --- evaluation -------------------------------------------------------------

Tensor Graph::eval_op(const Node& n) const {
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    const Tensor* ta = n.a != kNone ? &nodes_[n.a].value : nullptr;
    const Tensor* tb = n.b != kNone ? &nodes_[n.b].value : nullptr;

    auto require_same_shape = [&](const char* opname) {
        if (!ta->same_shape(*tb)) {
            shape_error(opname, id, ta->shape_string() + " vs " + tb->shape_string());
        }
    };

    switch (n.op) {
        case Op::kInput:
        case Op::kParam:
        case Op::kConstant:
            return n.value;
        case Op::kAdd: {
            require_same_shape("add");
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            const double* y = tb->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kSub: {
            require_same_shape("sub");
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            const double* y = tb->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kNeg: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = -x[i];
            return Tensor::from_validated(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kMul: {
            require_same_shape("mul");
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            const double* y = tb->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kDiv: {
            require_same_shape("div");
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            const double* y = tb->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] / y[i];
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kScalarMul: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * n.scalar;
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kScalarAdd: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + n.scalar;
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kTanh: {
            Tensor::Storage out(ta->size());
            vtanh(out.size(), ta->data(), out.data());
            return Tensor::from_validated(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kTanhGrad: {
            require_same_shape("tanh_grad");
            Tensor::Storage out(ta->size());
            const double* g = ta->data();
            const double* y = tb->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = g[i] * (1.0 - y[i] * y[i]);
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kAbs: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(x[i]);
            return Tensor::from_validated(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kSign: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
            }
            return Tensor::from_validated(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kSquare: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * x[i];
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kSqrt: {
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(x[i]);
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
        case Op::kMatmul: {
            const std::size_t m = n.trans_a ? ta->cols() : ta->rows();
            const std::size_t ka = n.trans_a ? ta->rows() : ta->cols();
            const std::size_t kb = n.trans_b ? tb->cols() : tb->rows();
            const std::size_t cols = n.trans_b ? tb->rows() : tb->cols();
            if (ka != kb) {
                shape_error("matmul", id,
                            "inner dimensions " + ta->shape_string() +
                                (n.trans_a ? "^T" : "") + " * " + tb->shape_string() +
                                (n.trans_b ? "^T" : "") + " do not match");
            }
            Tensor::Storage out(m * cols);
            if (!n.trans_a && !n.trans_b) {
                gemm_nn(m, cols, ka, ta->data(), tb->data(), out.data());
            } else if (!n.trans_a && n.trans_b) {
                gemm_nt(m, cols, ka, ta->data(), tb->data(), out.data());
            } else if (n.trans_a && !n.trans_b) {
                gemm_tn(m, cols, ka, ta->data(), tb->data(), out.data());
            } else {
                gemm_tt(m, cols, ka, ta->data(), tb->data(), out.data());
            }
            return Tensor(m, cols, std::move(out));
        }
        case Op::kAffine: {
            const Tensor& bias = nodes_[n.extra[0]].value;
            if (ta->cols() != tb->rows()) {
                shape_error("affine", id,
                            "inner dimensions " + ta->shape_string() + " * " +
                                tb->shape_string() + " do not match");
            }
            if (bias.rows() != 1 || bias.cols() != tb->cols()) {
                shape_error("affine", id, "bias shape " + bias.shape_string() +
                                              " does not match output width " +
                                              std::to_string(tb->cols()));
            }
            const std::size_t rows = ta->rows();
            const std::size_t cols = tb->cols();
            Tensor::Storage out(rows * cols);
            gemm_nn(rows, cols, ta->cols(), ta->data(), tb->data(), out.data());
            for (std::size_t r = 0; r < rows; ++r) {
                double* row = out.data() + r * cols;
                const double* bv = bias.data();
                for (std::size_t c = 0; c < cols; ++c) row[c] += bv[c];
            }
            return Tensor(rows, cols, std::move(out));
        }
        case Op::kSum: {
            double acc = 0.0;
            for (double v : ta->values()) acc += v;
            return Tensor::scalar(acc);
        }
        case Op::kMean: {
            if (ta->size() == 0) {
                shape_error("mean", id, "empty tensor");
            }
            double acc = 0.0;
            for (double v : ta->values()) acc += v;
            return Tensor::scalar(acc / static_cast<double>(ta->size()));
        }
        case Op::kBroadcast: {
            if (!ta->is_scalar()) {
                shape_error("broadcast", id, "expects 1x1 input, got " + ta->shape_string());
            }
            return Tensor::from_validated(
                n.i0, n.i1,
                Tensor::Storage(static_cast<std::size_t>(n.i0) * n.i1, ta->item()));
        }
        case Op::kColSums: {
            Tensor::Storage out(ta->cols(), 0.0);
            const double* x = ta->data();
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                for (std::size_t c = 0; c < ta->cols(); ++c) out[c] += x[r * ta->cols() + c];
            }
            return Tensor(1, ta->cols(), std::move(out));
        }
        case Op::kRowSums: {
            Tensor::Storage out(ta->rows(), 0.0);
            const double* x = ta->data();
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < ta->cols(); ++c) acc += x[r * ta->cols() + c];
                out[r] = acc;
            }
            return Tensor(ta->rows(), 1, std::move(out));
        }
        case Op::kTileRows: {
            if (ta->rows() != 1) {
                shape_error("tile_rows", id, "expects 1xC input, got " + ta->shape_string());
            }
            Tensor::Storage out(static_cast<std::size_t>(n.i0) * ta->cols());
            for (std::size_t r = 0; r < n.i0; ++r) {
                std::copy(ta->data(), ta->data() + ta->cols(), out.begin() + r * ta->cols());
            }
            return Tensor::from_validated(n.i0, ta->cols(), std::move(out));
        }
        case Op::kTileCols: {
            if (ta->cols() != 1) {
                shape_error("tile_cols", id, "expects Rx1 input, got " + ta->shape_string());
            }
            Tensor::Storage out(ta->rows() * static_cast<std::size_t>(n.i0));
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                const double v = ta->data()[r];
                for (std::size_t c = 0; c < n.i0; ++c) out[r * n.i0 + c] = v;
            }
            return Tensor::from_validated(ta->rows(), n.i0, std::move(out));
        }
        case Op::kConcatCols: {
            const std::size_t rows = nodes_[n.extra.front()].value.rows();
            std::size_t total = 0;
            for (std::uint32_t part : n.extra) {
                const Tensor& t = nodes_[part].value;
                if (t.rows() != rows) {
                    shape_error("concat_cols", id, "row counts differ");
                }
                total += t.cols();
            }
            Tensor::Storage out(rows * total);
            std::size_t offset = 0;
            for (std::uint32_t part : n.extra) {
                const Tensor& t = nodes_[part].value;
                for (std::size_t r = 0; r < rows; ++r) {
                    std::copy(t.data() + r * t.cols(), t.data() + (r + 1) * t.cols(),
                              out.begin() + r * total + offset);
                }
                offset += t.cols();
            }
            return Tensor::from_validated(rows, total, std::move(out));
        }
        case Op::kSliceCols: {
            if (n.i0 >= n.i1 || n.i1 > ta->cols()) {
                shape_error("slice_cols", id,
                            "range [" + std::to_string(n.i0) + ", " + std::to_string(n.i1) +
                                ") invalid for " + ta->shape_string());
            }
            const std::size_t w = n.i1 - n.i0;
            Tensor::Storage out(ta->rows() * w);
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                std::copy(ta->data() + r * ta->cols() + n.i0,
                          ta->data() + r * ta->cols() + n.i1, out.begin() + r * w);
            }
            return Tensor::from_validated(ta->rows(), w, std::move(out));
        }
        case Op::kPadCols: {
            if (n.i0 + ta->cols() > n.i1) {
                shape_error("pad_cols", id, "padded width too small");
            }
            Tensor::Storage out(ta->rows() * static_cast<std::size_t>(n.i1), 0.0);
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                std::copy(ta->data() + r * ta->cols(), ta->data() + (r + 1) * ta->cols(),
                          out.begin() + r * n.i1 + n.i0);
            }
            return Tensor::from_validated(ta->rows(), n.i1, std::move(out));
        }
        case Op::kReverseCols: {
            Tensor::Storage out(ta->size());
            const std::size_t cols = ta->cols();
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    out[r * cols + c] = ta->data()[r * cols + (cols - 1 - c)];
                }
            }
            return Tensor::from_validated(ta->rows(), cols, std::move(out));
        }
        case Op::kReshape: {
            if (static_cast<std::size_t>(n.i0) * n.i1 != ta->size()) {
                shape_error("reshape", id,
                            "cannot view " + ta->shape_string() + " as " + std::to_string(n.i0) +
                                "x" + std::to_string(n.i1));
            }
            return Tensor::from_validated(
                n.i0, n.i1, Tensor::Storage(ta->values().begin(), ta->values().end()));
        }
        case Op::kInterpolate: {
            if (!ta->same_shape(*tb)) {
                shape_error("interpolate", id, ta->shape_string() + " vs " + tb->shape_string());
            }
            if (n.aux.size() != ta->rows()) {
                shape_error("interpolate", id, "weight count does not match row count");
            }
            Tensor::Storage out(ta->size());
            const double* x = ta->data();
            const double* y = tb->data();
            for (std::size_t r = 0; r < ta->rows(); ++r) {
                const double e = n.aux[r];
                for (std::size_t c = 0; c < ta->cols(); ++c) {
                    const std::size_t i = r * ta->cols() + c;
                    out[i] = e * x[i] + (1.0 - e) * y[i];
                }
            }
            return Tensor(ta->rows(), ta->cols(), std::move(out));
        }
    }
    throw ContractError("unknown op");
}

void Graph::compute(Node& n) const { n.value = eval_op(n); }

std::vector<Tensor> Graph::forward(std::span<const Tensor> inputs) {
    if (inputs.size() != input_ids_.size()) {
        throw ContractError("forward: expected " + std::to_string(input_ids_.size()) +
                            " inputs, got " + std::to_string(inputs.size()));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Node& leaf = nodes_[input_ids_[i]];
        if (!leaf.value.same_shape(inputs[i])) {
            shape_error("input", input_ids_[i],
                        "expected " + leaf.value.shape_string() + ", got " +
                            inputs[i].shape_string());
        }
        leaf.value = inputs[i];
    }
    std::vector<char> used(nodes_.size(), 0);
    for (const Node& n : nodes_) {
        if (n.a != kNone) used[n.a] = 1;
        if (n.b != kNone) used[n.b] = 1;
        for (std::uint32_t e : n.extra) used[e] = 1;
    }
    for (Node& n : nodes_) {
        if (n.op != Op::kInput && n.op != Op::kParam && n.op != Op::kConstant) {
            compute(n);
        }
    }
    std::vector<Tensor> sinks;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!used[i]) sinks.push_back(nodes_[i].value);
    }
    return sinks;
}

// --- reverse mode -----------------------------------------------------------

void Graph::add_grad(std::vector<std::uint32_t>& adj, std::uint32_t target, Value contribution) {
    if (adj[target] == kNone) {
        adj[target] = contribution.id();
    } else {
        adj[target] = add(wrap(adj[target]), contribution).id();
    }
}

std::vector<Value> Graph::backward(Value output, std::initializer_list<Value> wrt) {
    std::vector<Value> w(wrt);
    return backward(output, std::span<const Value>(w));
}

std::vector<Value> Graph::backward(Value output, std::span<const Value> wrt) {
    check_owned(output, "backward");
    if (!nodes_[output.id()].value.is_scalar()) {
        throw ContractError("backward: output must be scalar, got " +
                            nodes_[output.id()].value.shape_string());
    }
    for (const Value& v : wrt) {
        check_owned(v, "backward");
        const Op op = nodes_[v.id()].op;
        if (op != Op::kInput && op != Op::kParam) {
            throw ContractError("backward: wrt tensor must be a graph input or parameter");
        }
    }

    const std::size_t frontier = output.id() + 1;

    // A node participates in the adjoint sweep when it both depends on some
    // wrt leaf and feeds the output.
    std::vector<char> needs(frontier, 0);
    for (const Value& v : wrt) needs[v.id()] = 1;
    for (std::uint32_t i = 0; i < frontier; ++i) {
        const Node& n = nodes_[i];
        if (needs[i]) continue;
        bool flag = false;
        if (n.a != kNone && needs[n.a]) flag = true;
        if (!flag && n.b != kNone && needs[n.b]) flag = true;
        if (!flag) {
            for (std::uint32_t e : n.extra) {
                if (needs[e]) {
                    flag = true;
                    break;
                }
            }
        }
        // sign has zero derivative everywhere it is defined
        needs[i] = flag && n.op != Op::kSign ? 1 : 0;
    }
    std::vector<char> feeds(frontier, 0);
    feeds[output.id()] = 1;
    for (std::uint32_t i = static_cast<std::uint32_t>(frontier); i-- > 0;) {
        if (!feeds[i]) continue;
        const Node& n = nodes_[i];
        if (n.a != kNone) feeds[n.a] = 1;
        if (n.b != kNone) feeds[n.b] = 1;
        for (std::uint32_t e : n.extra) feeds[e] = 1;
    }

    std::vector<std::uint32_t> adj(frontier, kNone);
    if (needs[output.id()]) {
        adj[output.id()] = constant(Tensor::scalar(1.0)).id();
    }

    for (std::uint32_t i = static_cast<std::uint32_t>(frontier); i-- > 0;) {
        if (adj[i] == kNone || !needs[i] || !feeds[i]) continue;
        const Node n = nodes_[i];  // copy: emitting nodes may reallocate
        const Value g = wrap(adj[i]);
        auto wants = [&](std::uint32_t in) { return in != kNone && needs[in]; };
        switch (n.op) {
            case Op::kInput:
            case Op::kParam:
            case Op::kConstant:
                break;
            case Op::kAdd:
                if (wants(n.a)) add_grad(adj, n.a, g);
                if (wants(n.b)) add_grad(adj, n.b, g);
                break;
            case Op::kSub:
                if (wants(n.a)) add_grad(adj, n.a, g);
                if (wants(n.b)) add_grad(adj, n.b, neg(g));
                break;
            case Op::kNeg:
                if (wants(n.a)) add_grad(adj, n.a, neg(g));
                break;
            case Op::kMul:
                if (wants(n.a)) add_grad(adj, n.a, mul(g, wrap(n.b)));
                if (wants(n.b)) add_grad(adj, n.b, mul(g, wrap(n.a)));
                break;
            case Op::kDiv:
                if (wants(n.a)) add_grad(adj, n.a, div(g, wrap(n.b)));
                if (wants(n.b)) {
                    add_grad(adj, n.b, neg(div(mul(g, wrap(i)), wrap(n.b))));
                }
                break;
            case Op::kScalarMul:
                if (wants(n.a)) add_grad(adj, n.a, scalar_mul(g, n.scalar));
                break;
            case Op::kScalarAdd:
                if (wants(n.a)) add_grad(adj, n.a, g);
                break;
            case Op::kTanh:
                if (wants(n.a)) add_grad(adj, n.a, tanh_grad(g, wrap(i)));
                break;
            case Op::kTanhGrad:
                // out = a * (1 - b^2): d/da = (1 - b^2), d/db = -2 a b
                if (wants(n.a)) add_grad(adj, n.a, tanh_grad(g, wrap(n.b)));
                if (wants(n.b)) {
                    add_grad(adj, n.b,
                             scalar_mul(mul(mul(g, wrap(n.a)), wrap(n.b)), -2.0));
                }
                break;
            case Op::kAbs:
                if (wants(n.a)) add_grad(adj, n.a, mul(g, sign(wrap(n.a))));
                break;
            case Op::kSign:
                break;
            case Op::kSquare:
                if (wants(n.a)) add_grad(adj, n.a, scalar_mul(mul(g, wrap(n.a)), 2.0));
                break;
            case Op::kSqrt:
                if (wants(n.a)) add_grad(adj, n.a, scalar_mul(div(g, wrap(i)), 0.5));
                break;
            case Op::kMatmul: {
                const Value a = wrap(n.a);
                const Value b = wrap(n.b);
                if (!n.trans_a && !n.trans_b) {
                    if (wants(n.a)) add_grad(adj, n.a, matmul(g, b, false, true));
                    if (wants(n.b)) add_grad(adj, n.b, matmul(a, g, true, false));
                } else if (!n.trans_a && n.trans_b) {
                    if (wants(n.a)) add_grad(adj, n.a, matmul(g, b, false, false));
                    if (wants(n.b)) add_grad(adj, n.b, matmul(g, a, true, false));
                } else if (n.trans_a && !n.trans_b) {
                    if (wants(n.a)) add_grad(adj, n.a, matmul(b, g, false, true));
                    if (wants(n.b)) add_grad(adj, n.b, matmul(a, g, false, false));
                } else {
                    if (wants(n.a)) add_grad(adj, n.a, matmul(b, g, true, true));
                    if (wants(n.b)) add_grad(adj, n.b, matmul(g, a, true, true));
                }
                break;
            }
            case Op::kAffine: {
                const Value x = wrap(n.a);
                const Value w = wrap(n.b);
                if (wants(n.a)) add_grad(adj, n.a, matmul(g, w, false, true));
                if (wants(n.b)) add_grad(adj, n.b, matmul(x, g, true, false));
                if (wants(n.extra[0])) add_grad(adj, n.extra[0], col_sums(g));
                break;
            }
            case Op::kSum:
                if (wants(n.a)) {
                    const Tensor& in = nodes_[n.a].value;
                    add_grad(adj, n.a, broadcast(g, in.rows(), in.cols()));
                }
                break;
            case Op::kMean:
                if (wants(n.a)) {
                    const Tensor& in = nodes_[n.a].value;
                    Value gb = broadcast(g, in.rows(), in.cols());
                    add_grad(adj, n.a, scalar_mul(gb, 1.0 / static_cast<double>(in.size())));
                }
                break;
            case Op::kBroadcast:
                if (wants(n.a)) add_grad(adj, n.a, sum(g));
                break;
            case Op::kColSums:
                if (wants(n.a)) add_grad(adj, n.a, tile_rows(g, nodes_[n.a].value.rows()));
                break;
            case Op::kRowSums:
                if (wants(n.a)) add_grad(adj, n.a, tile_cols(g, nodes_[n.a].value.cols()));
                break;
            case Op::kTileRows:
                if (wants(n.a)) add_grad(adj, n.a, col_sums(g));
                break;
            case Op::kTileCols:
                if (wants(n.a)) add_grad(adj, n.a, row_sums(g));
                break;
            case Op::kConcatCols: {
                std::size_t offset = 0;
                for (std::uint32_t part : n.extra) {
                    const std::size_t w = nodes_[part].value.cols();
                    if (wants(part)) {
                        add_grad(adj, part, slice_cols(g, offset, offset + w));
                    }
                    offset += w;
                }
                break;
            }
            case Op::kSliceCols:
                if (wants(n.a)) {
                    add_grad(adj, n.a, pad_cols(g, nodes_[n.a].value.cols(), n.i0));
                }
                break;
            case Op::kPadCols:
                if (wants(n.a)) {
                    const std::size_t w = nodes_[n.a].value.cols();
                    add_grad(adj, n.a, slice_cols(g, n.i0, n.i0 + w));
                }
                break;
            case Op::kReverseCols:
                if (wants(n.a)) add_grad(adj, n.a, reverse_cols(g));
                break;
            case Op::kReshape:
                if (wants(n.a)) {
                    const Tensor& in = nodes_[n.a].value;
                    add_grad(adj, n.a, reshape(g, in.rows(), in.cols()));
                }
                break;
            case Op::kInterpolate: {
                const std::size_t cols = n.value.cols();
                if (wants(n.a)) {
                    Value e = tile_cols(constant(Tensor::column_vector(n.aux)), cols);
                    add_grad(adj, n.a, mul(g, e));
                }
                if (wants(n.b)) {
                    std::vector<double> inv(n.aux.size());
                    for (std::size_t r = 0; r < inv.size(); ++r) inv[r] = 1.0 - n.aux[r];
                    Value e = tile_cols(constant(Tensor::column_vector(std::move(inv))), cols);
                    add_grad(adj, n.b, mul(g, e));
                }
                break;
            }
        }
    }

    std::vector<Value> grads;
    grads.reserve(wrt.size());
    for (const Value& v : wrt) {
        if (adj[v.id()] != kNone) {
            grads.push_back(wrap(adj[v.id()]));
        } else {
            const Tensor& t = nodes_[v.id()].value;
            grads.push_back(constant(Tensor(t.rows(), t.cols())));
        }
    }
    return grads;
}

Value Graph::input_gradient_norm(Value scalar_output, Value input) {
    std::vector<Value> g = backward(scalar_output, {input});
    Value flat = reshape(g[0], 1, g[0].val().size());
    return sqrt(sum(square(flat)));
}

}  // namespace wiae::ad
