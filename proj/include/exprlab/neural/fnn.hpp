#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace exprlab {

enum class Activation { relu, identity };

const char* to_string(Activation act);
Activation activation_from_string(const std::string& s);

// One affine map followed by an elementwise activation.
// Weights are stored row-major: weights[r * in_dim + c].
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    Activation act = Activation::relu;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, Activation a)
        : in_dim(in), out_dim(out), weights(in * out, 0.0), bias(out, 0.0), act(a) {}

    double& w(std::size_t r, std::size_t c) { return weights[r * in_dim + c]; }
    double w(std::size_t r, std::size_t c) const { return weights[r * in_dim + c]; }
};

// Same layer with compressed-row weights, for large constructed networks.
struct SparseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<std::uint32_t> row_ptr;  // out_dim + 1 offsets into col/val
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    std::vector<double> bias;
    Activation act = Activation::relu;

    SparseLayer() = default;
    SparseLayer(std::size_t in, std::size_t out, Activation a)
        : in_dim(in), out_dim(out), row_ptr(1, 0), bias(out, 0.0), act(a) {}

    // Rows are filled in order: add() entries of the current row, then end_row().
    void add(std::uint32_t c, double v) {
        col.push_back(c);
        val.push_back(v);
    }
    void end_row() { row_ptr.push_back(static_cast<std::uint32_t>(col.size())); }
};

SparseLayer to_sparse(const DenseLayer& l);

// Cached per-layer values from a forward pass, used by backward().
struct FnnTape {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // affine outputs per layer
    std::vector<std::vector<double>> post;  // activated outputs per layer
};

struct FnnGrad {
    std::vector<double> dx;
    std::vector<double> dparams;
};

// Layered feedforward network. Immutable after construction.
//
// Invariants checked by the constructor: consecutive layer dimensions chain,
// the last layer uses the identity activation, at least one layer, and all
// weights and biases are finite. Hidden layers may use either activation.
//
// A network built from SparseLayers only supports evaluation and the
// structural queries; parameters and gradients need the dense form.
class Fnn {
public:
    Fnn(std::size_t input_dim, std::vector<DenseLayer> layers);
    Fnn(std::size_t input_dim, std::vector<SparseLayer> layers);

    // y = W x + b with no hidden layer.
    static Fnn affine(std::size_t in_dim, std::size_t out_dim, std::span<const double> weights,
                      std::span<const double> bias);
    static Fnn identity(std::size_t dim);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return sparse_.back().out_dim; }
    std::size_t depth() const { return sparse_.size(); }
    bool is_dense() const { return !dense_.empty(); }
    // Throws std::logic_error for networks built from SparseLayers.
    const std::vector<DenseLayer>& layers() const;
    const std::vector<SparseLayer>& sparse_layers() const { return sparse_; }

    // Number of nodes in the underlying DAG: inputs plus every layer's outputs.
    std::size_t node_count() const;
    // Dense parameter count; zero for sparse networks.
    std::size_t param_count() const;
    // Largest number of nonzero incoming weights of any node.
    std::size_t max_in_degree() const;

    void eval(std::span<const double> x, std::span<double> y) const;
    std::vector<double> eval(std::span<const double> x) const;

    void forward(std::span<const double> x, FnnTape& tape) const;
    // Vector-Jacobian product at the taped point. dx is overwritten; dparams
    // is accumulated into (layout matches params()). ReLU'(0) = 0.
    void backward(const FnnTape& tape, std::span<const double> upstream, std::span<double> dx,
                  std::span<double> dparams) const;

    // Flat parameters: per layer, the row-major weights followed by the bias.
    std::vector<double> params() const;
    Fnn with_params(std::span<const double> params) const;

private:
    void check();
    void apply_layer(std::size_t i, std::span<const double> x, std::span<double> y) const;
    void require_dense(const char* what) const;

    std::size_t input_dim_;
    std::vector<DenseLayer> dense_;   // empty for sparse networks
    std::vector<SparseLayer> sparse_;  // always populated
    std::vector<bool> use_sparse_;     // per layer evaluation path
};

FnnGrad fnn_grad(const Fnn& fnn, std::span<const double> x, std::span<const double> upstream);

// Upper bound on the max-norm Lipschitz constant: product over layers of the
// infinity operator norm (largest absolute row sum).
double lipschitz_upper(const Fnn& fnn);

// Dense networks serialize w as a row-major nested array; sparse networks
// use w_sparse: {row_ptr, col, val} per layer.
nlohmann::json to_json(const Fnn& fnn);
Fnn fnn_from_json(const nlohmann::json& j);

}  // namespace exprlab
