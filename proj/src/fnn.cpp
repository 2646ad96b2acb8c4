#include "exprlab/neural/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exprlab/util/error.hpp"

namespace exprlab {

const char* to_string(Activation act) { return act == Activation::relu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "identity" || s == "linear") return Activation::identity;
    throw ParseError("unknown activation '" + s + "'");
}

SparseLayer to_sparse(const DenseLayer& l) {
    SparseLayer s(l.in_dim, l.out_dim, l.act);
    for (std::size_t r = 0; r < l.out_dim; ++r) {
        for (std::size_t c = 0; c < l.in_dim; ++c)
            if (l.w(r, c) != 0.0) s.add(static_cast<std::uint32_t>(c), l.w(r, c));
        s.end_row();
    }
    s.bias = l.bias;
    return s;
}

Fnn::Fnn(std::size_t input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), dense_(std::move(layers)) {
    if (dense_.empty()) throw DimensionError("fnn needs at least one layer");
    std::size_t dim = input_dim_;
    for (std::size_t i = 0; i < dense_.size(); ++i) {
        const DenseLayer& l = dense_[i];
        if (l.in_dim != dim)
            throw DimensionError("layer " + std::to_string(i) + " expects input " +
                                 std::to_string(l.in_dim) + ", previous output is " +
                                 std::to_string(dim));
        if (l.weights.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim)
            throw DimensionError("layer " + std::to_string(i) + " parameter arrays have wrong size");
        dim = l.out_dim;
        sparse_.push_back(to_sparse(l));
        // Dense loops win unless the matrix is large and mostly empty.
        use_sparse_.push_back(l.weights.size() >= 64 && sparse_.back().val.size() * 4 <= l.weights.size());
    }
    check();
}

Fnn::Fnn(std::size_t input_dim, std::vector<SparseLayer> layers)
    : input_dim_(input_dim), sparse_(std::move(layers)), use_sparse_(sparse_.size(), true) {
    if (sparse_.empty()) throw DimensionError("fnn needs at least one layer");
    check();
}

void Fnn::check() {
    if (input_dim_ == 0) throw DimensionError("fnn input dimension must be positive");
    std::size_t dim = input_dim_;
    for (std::size_t i = 0; i < sparse_.size(); ++i) {
        const SparseLayer& l = sparse_[i];
        const std::string where = "layer " + std::to_string(i);
        if (l.in_dim != dim)
            throw DimensionError(where + " expects input " + std::to_string(l.in_dim) +
                                 ", previous output is " + std::to_string(dim));
        if (l.out_dim == 0) throw DimensionError(where + " has no outputs");
        if (l.bias.size() != l.out_dim || l.row_ptr.size() != l.out_dim + 1 || l.row_ptr.front() != 0 ||
            l.row_ptr.back() != l.col.size() || l.col.size() != l.val.size())
            throw DimensionError(where + " parameter arrays have wrong size");
        for (std::size_t r = 0; r < l.out_dim; ++r)
            if (l.row_ptr[r] > l.row_ptr[r + 1]) throw DimensionError(where + " row offsets decrease");
        for (auto c : l.col)
            if (c >= l.in_dim) throw DimensionError(where + " references a missing input");
        for (double w : l.val)
            if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
        for (double b : l.bias)
            if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias");
        dim = l.out_dim;
    }
    if (sparse_.back().act != Activation::identity)
        throw std::invalid_argument("final fnn layer must use the identity activation");
}

Fnn Fnn::affine(std::size_t in_dim, std::size_t out_dim, std::span<const double> weights,
                std::span<const double> bias) {
    DenseLayer l(in_dim, out_dim, Activation::identity);
    if (weights.size() != l.weights.size() || bias.size() != l.bias.size())
        throw DimensionError("affine parameter arrays have wrong size");
    std::copy(weights.begin(), weights.end(), l.weights.begin());
    std::copy(bias.begin(), bias.end(), l.bias.begin());
    return Fnn(in_dim, std::vector<DenseLayer>{std::move(l)});
}

Fnn Fnn::identity(std::size_t dim) {
    DenseLayer l(dim, dim, Activation::identity);
    for (std::size_t i = 0; i < dim; ++i) l.w(i, i) = 1.0;
    return Fnn(dim, std::vector<DenseLayer>{std::move(l)});
}

const std::vector<DenseLayer>& Fnn::layers() const {
    require_dense("layers()");
    return dense_;
}

void Fnn::require_dense(const char* what) const {
    if (dense_.empty()) throw std::logic_error(std::string(what) + " needs a dense network");
}

std::size_t Fnn::node_count() const {
    std::size_t n = input_dim_;
    for (const auto& l : sparse_) n += l.out_dim;
    return n;
}

std::size_t Fnn::param_count() const {
    std::size_t n = 0;
    for (const auto& l : dense_) n += l.weights.size() + l.bias.size();
    return n;
}

std::size_t Fnn::max_in_degree() const {
    std::size_t best = 0;
    for (const auto& l : sparse_) {
        for (std::size_t r = 0; r < l.out_dim; ++r) {
            std::size_t deg = 0;
            for (std::uint32_t e = l.row_ptr[r]; e < l.row_ptr[r + 1]; ++e) deg += l.val[e] != 0.0;
            best = std::max(best, deg);
        }
    }
    return best;
}

void Fnn::apply_layer(std::size_t i, std::span<const double> x, std::span<double> y) const {
    if (use_sparse_[i]) {
        const SparseLayer& s = sparse_[i];
        for (std::size_t r = 0; r < s.out_dim; ++r) {
            double acc = s.bias[r];
            for (std::uint32_t e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e) acc += s.val[e] * x[s.col[e]];
            y[r] = acc;
        }
        return;
    }
    const DenseLayer& l = dense_[i];
    const double* w = l.weights.data();
    for (std::size_t r = 0; r < l.out_dim; ++r, w += l.in_dim) {
        double acc = l.bias[r];
        for (std::size_t c = 0; c < l.in_dim; ++c) acc += w[c] * x[c];
        y[r] = acc;
    }
}

void Fnn::eval(std::span<const double> x, std::span<double> y) const {
    if (x.size() != input_dim_)
        throw DimensionError("fnn input has dimension " + std::to_string(x.size()) + ", expected " +
                             std::to_string(input_dim_));
    if (y.size() != output_dim()) throw DimensionError("fnn output buffer has wrong size");
    std::vector<double> a(x.begin(), x.end()), b;
    for (std::size_t i = 0; i < sparse_.size(); ++i) {
        b.assign(sparse_[i].out_dim, 0.0);
        apply_layer(i, a, b);
        if (sparse_[i].act == Activation::relu)
            for (double& v : b) v = v > 0.0 ? v : 0.0;
        a.swap(b);
    }
    std::copy(a.begin(), a.end(), y.begin());
}

std::vector<double> Fnn::eval(std::span<const double> x) const {
    std::vector<double> y(output_dim());
    eval(x, y);
    return y;
}

void Fnn::forward(std::span<const double> x, FnnTape& tape) const {
    if (x.size() != input_dim_) throw DimensionError("fnn input has wrong dimension");
    tape.input.assign(x.begin(), x.end());
    tape.pre.resize(sparse_.size());
    tape.post.resize(sparse_.size());
    std::span<const double> cur = tape.input;
    for (std::size_t i = 0; i < sparse_.size(); ++i) {
        tape.pre[i].assign(sparse_[i].out_dim, 0.0);
        apply_layer(i, cur, tape.pre[i]);
        tape.post[i] = tape.pre[i];
        if (sparse_[i].act == Activation::relu)
            for (double& v : tape.post[i]) v = v > 0.0 ? v : 0.0;
        cur = tape.post[i];
    }
}

void Fnn::backward(const FnnTape& tape, std::span<const double> upstream, std::span<double> dx,
                   std::span<double> dparams) const {
    require_dense("backward()");
    if (upstream.size() != output_dim()) throw DimensionError("upstream has wrong dimension");
    if (dx.size() != input_dim_) throw DimensionError("dx has wrong dimension");
    if (dparams.size() != param_count()) throw DimensionError("dparams has wrong size");
    std::vector<std::size_t> offset(dense_.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < dense_.size(); ++i) {
        offset[i] = off;
        off += dense_[i].weights.size() + dense_[i].bias.size();
    }
    std::vector<double> g(upstream.begin(), upstream.end()), gin;
    for (std::size_t i = dense_.size(); i-- > 0;) {
        const DenseLayer& l = dense_[i];
        if (l.act == Activation::relu)
            for (std::size_t r = 0; r < l.out_dim; ++r)
                if (!(tape.pre[i][r] > 0.0)) g[r] = 0.0;
        const std::vector<double>& in = i == 0 ? tape.input : tape.post[i - 1];
        double* dw = dparams.data() + offset[i];
        double* db = dw + l.weights.size();
        gin.assign(l.in_dim, 0.0);
        for (std::size_t r = 0; r < l.out_dim; ++r) {
            const double gr = g[r];
            if (gr == 0.0) continue;
            db[r] += gr;
            const double* wr = l.weights.data() + r * l.in_dim;
            double* dwr = dw + r * l.in_dim;
            for (std::size_t c = 0; c < l.in_dim; ++c) {
                dwr[c] += gr * in[c];
                gin[c] += gr * wr[c];
            }
        }
        g.swap(gin);
    }
    std::copy(g.begin(), g.end(), dx.begin());
}

std::vector<double> Fnn::params() const {
    require_dense("params()");
    std::vector<double> p;
    p.reserve(param_count());
    for (const auto& l : dense_) {
        p.insert(p.end(), l.weights.begin(), l.weights.end());
        p.insert(p.end(), l.bias.begin(), l.bias.end());
    }
    return p;
}

Fnn Fnn::with_params(std::span<const double> params) const {
    require_dense("with_params()");
    if (params.size() != param_count()) throw DimensionError("parameter vector has wrong size");
    std::vector<DenseLayer> layers = dense_;
    std::size_t off = 0;
    for (auto& l : layers) {
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), l.weights.size(), l.weights.begin());
        off += l.weights.size();
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), l.bias.size(), l.bias.begin());
        off += l.bias.size();
    }
    return Fnn(input_dim_, std::move(layers));
}

FnnGrad fnn_grad(const Fnn& fnn, std::span<const double> x, std::span<const double> upstream) {
    FnnTape tape;
    fnn.forward(x, tape);
    FnnGrad g{std::vector<double>(fnn.input_dim()), std::vector<double>(fnn.param_count(), 0.0)};
    fnn.backward(tape, upstream, g.dx, g.dparams);
    return g;
}

double lipschitz_upper(const Fnn& fnn) {
    double bound = 1.0;
    for (const auto& l : fnn.sparse_layers()) {
        double norm = 0.0;
        for (std::size_t r = 0; r < l.out_dim; ++r) {
            double row = 0.0;
            for (std::uint32_t e = l.row_ptr[r]; e < l.row_ptr[r + 1]; ++e) row += std::abs(l.val[e]);
            norm = std::max(norm, row);
        }
        bound *= norm;
    }
    return bound;
}

nlohmann::json to_json(const Fnn& fnn) {
    nlohmann::json layers = nlohmann::json::array();
    if (fnn.is_dense()) {
        for (const auto& l : fnn.layers()) {
            nlohmann::json w = nlohmann::json::array();
            for (std::size_t r = 0; r < l.out_dim; ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (std::size_t c = 0; c < l.in_dim; ++c) row.push_back(l.w(r, c));
                w.push_back(std::move(row));
            }
            layers.push_back({{"w", std::move(w)}, {"b", l.bias}, {"act", to_string(l.act)}});
        }
    } else {
        for (const auto& l : fnn.sparse_layers())
            layers.push_back({{"in_dim", l.in_dim},
                              {"w_sparse", {{"row_ptr", l.row_ptr}, {"col", l.col}, {"val", l.val}}},
                              {"b", l.bias},
                              {"act", to_string(l.act)}});
    }
    return {{"input_dim", fnn.input_dim()}, {"layers", std::move(layers)}};
}

Fnn fnn_from_json(const nlohmann::json& j) {
    try {
        const std::size_t input_dim = j.at("input_dim").get<std::size_t>();
        const auto& jl = j.at("layers");
        if (!jl.is_array()) throw ParseError("fnn.layers must be an array");
        bool any_sparse = false;
        for (const auto& e : jl) any_sparse = any_sparse || e.contains("w_sparse");
        std::vector<DenseLayer> dense;
        std::vector<SparseLayer> sparse;
        std::size_t dim = input_dim;
        for (std::size_t i = 0; i < jl.size(); ++i) {
            const auto& e = jl[i];
            const std::string where = "fnn.layers[" + std::to_string(i) + "]";
            const auto bias = e.at("b").get<std::vector<double>>();
            const Activation act = activation_from_string(e.at("act").get<std::string>());
            if (e.contains("w_sparse")) {
                SparseLayer l(dim, bias.size(), act);
                const auto& ws = e.at("w_sparse");
                l.row_ptr = ws.at("row_ptr").get<std::vector<std::uint32_t>>();
                l.col = ws.at("col").get<std::vector<std::uint32_t>>();
                l.val = ws.at("val").get<std::vector<double>>();
                l.bias = bias;
                sparse.push_back(std::move(l));
            } else {
                const auto& w = e.at("w");
                DenseLayer l(dim, bias.size(), act);
                if (w.size() != l.out_dim)
                    throw ParseError(where + ".w has " + std::to_string(w.size()) + " rows, bias has " +
                                     std::to_string(l.out_dim));
                for (std::size_t r = 0; r < l.out_dim; ++r) {
                    const auto row = w[r].get<std::vector<double>>();
                    if (row.size() != dim)
                        throw ParseError(where + ".w row " + std::to_string(r) + " has wrong length");
                    std::copy(row.begin(), row.end(), l.weights.begin() + static_cast<std::ptrdiff_t>(r * dim));
                }
                l.bias = bias;
                if (any_sparse)
                    sparse.push_back(to_sparse(l));
                else
                    dense.push_back(std::move(l));
            }
            dim = bias.size();
        }
        if (any_sparse) return Fnn(input_dim, std::move(sparse));
        return Fnn(input_dim, std::move(dense));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fnn: ") + e.what());
    } catch (const DimensionError& e) {
        throw ParseError(std::string("fnn: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("fnn: ") + e.what());
    }
}

}  // namespace exprlab
