#include "exprlab/experiments/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "exprlab/neural/adam.hpp"
#include "exprlab/util/error.hpp"
#include "exprlab/util/parallel.hpp"

namespace exprlab {

void validate(const TrainConfig& cfg) {
    if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (cfg.lr_candidates.empty()) throw std::invalid_argument("need at least one learning rate");
    for (double lr : cfg.lr_candidates)
        if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("learning rates must be positive");
    if (!(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0))
        throw std::invalid_argument("val_fraction must lie in [0, 1)");
    if (!(cfg.smooth_l1_beta > 0.0)) throw std::invalid_argument("smooth_l1_beta must be positive");
}

std::map<std::string, std::string> to_config(const TrainConfig& cfg) {
    std::ostringstream lrs;
    lrs.precision(17);
    for (std::size_t i = 0; i < cfg.lr_candidates.size(); ++i) lrs << (i ? "," : "") << cfg.lr_candidates[i];
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    return {{"epochs", std::to_string(cfg.epochs)},
            {"batch_size", std::to_string(cfg.batch_size)},
            {"lr_candidates", lrs.str()},
            {"val_fraction", num(cfg.val_fraction)},
            {"smooth_l1_beta", num(cfg.smooth_l1_beta)}};
}

TrainConfig train_config_from_config(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("missing config key '" + key + "'");
        return it->second;
    };
    auto num = [](const std::string& s, const std::string& key) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::logic_error&) {
        }
        throw ParseError("config key '" + key + "' is not a number: " + s);
    };
    TrainConfig cfg;
    cfg.epochs = static_cast<std::size_t>(num(get("epochs"), "epochs"));
    cfg.batch_size = static_cast<std::size_t>(num(get("batch_size"), "batch_size"));
    cfg.lr_candidates.clear();
    std::stringstream ss(get("lr_candidates"));
    for (std::string item; std::getline(ss, item, ',');) cfg.lr_candidates.push_back(num(item, "lr_candidates"));
    cfg.val_fraction = num(get("val_fraction"), "val_fraction");
    cfg.smooth_l1_beta = num(get("smooth_l1_beta"), "smooth_l1_beta");
    return cfg;
}

Gnn make_model(const TaskSpec& spec, std::mt19937_64& rng) {
    validate(spec);
    std::vector<GnnLayer> layers;
    std::size_t dim = 1;
    for (std::size_t l = 0; l < spec.layers; ++l) {
        std::vector<Aggregation> aggs;
        switch (spec.model) {
            case ModelKind::sum: aggs = {Aggregation::sum()}; break;
            case ModelKind::mean: aggs = {Aggregation::mean()}; break;
            case ModelKind::sum_mean:
                if (spec.both_slots)
                    aggs = {Aggregation::sum(), Aggregation::mean()};
                else
                    aggs = {l % 2 == 0 ? Aggregation::sum() : Aggregation::mean()};
                break;
        }
        const std::size_t out = l + 1 == spec.layers ? 1 : spec.hidden_dim;
        const std::size_t in = (1 + aggs.size()) * dim;
        std::vector<DenseLayer> fnn{DenseLayer(in, spec.hidden_dim, Activation::relu),
                                    DenseLayer(spec.hidden_dim, out, Activation::identity)};
        for (auto& d : fnn) {
            const double bound = 1.0 / std::sqrt(double(d.in_dim));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (double& w : d.weights) w = u(rng);
            for (double& b : d.bias) b = u(rng);
        }
        layers.emplace_back(Fnn(in, std::move(fnn)), std::move(aggs));
        dim = out;
    }
    return Gnn(std::move(layers));
}

double smooth_l1(double diff, double beta) {
    const double a = std::abs(diff);
    return a < beta ? 0.5 * diff * diff / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double diff, double beta) {
    if (std::abs(diff) < beta) return diff / beta;
    return diff > 0 ? 1.0 : -1.0;
}

FeatureMap center_loss_adjoint(const QuotientGraph& q, const FeatureMap& output, double target, double beta) {
    FeatureMap adj(output.n, output.dim);
    const double y = output.row(q.target_class)[0];
    adj.row(q.target_class)[0] = smooth_l1_grad(y - target, beta);
    return adj;
}

// ---- batched engine ----

namespace {

// Y = X W^T + b for n rows; W is out x in row-major. wt is scratch.
void affine_fwd(const double* X, std::size_t n, std::size_t in, const double* W, const double* b,
                std::size_t out, double* Y, std::vector<double>& wt) {
    wt.resize(in * out);
    for (std::size_t o = 0; o < out; ++o)
        for (std::size_t i = 0; i < in; ++i) wt[i * out + o] = W[o * in + i];
    for (std::size_t r = 0; r < n; ++r) {
        double* y = Y + r * out;
        std::copy(b, b + out, y);
        const double* x = X + r * in;
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            const double* w = wt.data() + i * out;
            for (std::size_t o = 0; o < out; ++o) y[o] += xi * w[o];
        }
    }
}

// Accumulates dW, db; writes dX when non-null.
void affine_bwd(const double* X, const double* dZ, std::size_t n, std::size_t in, std::size_t out,
                const double* W, double* dW, double* db, double* dX) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = X + r * in;
        const double* g = dZ + r * out;
        double* dx = dX ? dX + r * in : nullptr;
        if (dx) std::fill(dx, dx + in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double go = g[o];
            if (go == 0.0) continue;
            db[o] += go;
            double* dw = dW + o * in;
            for (std::size_t i = 0; i < in; ++i) dw[i] += go * x[i];
            if (dx) {
                const double* w = W + o * in;
                for (std::size_t i = 0; i < in; ++i) dx[i] += go * w[i];
            }
        }
    }
}

struct RowLink {
    std::size_t src;
    double count;
};

}  // namespace

BatchedGnn::BatchedGnn(const Gnn& shape) : shape_(shape) {
    if (shape.readout()) throw std::invalid_argument("batched trainer does not support readouts");
    if (shape.output_dim() != 1) throw DimensionError("batched trainer needs scalar output");
    for (const auto& l : shape.layers()) {
        Layer L;
        L.in_dim = l.in_dim();
        L.out_dim = l.out_dim();
        for (const auto& a : l.aggs) {
            if (a.kind != AggKind::sum && a.kind != AggKind::mean)
                throw std::invalid_argument("batched trainer supports sum and mean aggregation only");
            L.slots.push_back(a.kind);
        }
        for (const auto& d : l.fnn.layers()) {
            L.fnn.push_back({d.in_dim, d.out_dim, param_count_, d.act == Activation::relu});
            param_count_ += d.in_dim * d.out_dim + d.out_dim;
        }
        layers_.push_back(std::move(L));
    }
}

std::vector<double> BatchedGnn::params(const Gnn& gnn) const {
    std::vector<double> theta;
    theta.reserve(param_count_);
    for (const auto& l : gnn.layers()) {
        const auto p = l.fnn.params();
        theta.insert(theta.end(), p.begin(), p.end());
    }
    if (theta.size() != param_count_) throw DimensionError("model does not match trainer shape");
    return theta;
}

Gnn BatchedGnn::with_params(std::span<const double> theta) const {
    if (theta.size() != param_count_) throw DimensionError("parameter vector size mismatch");
    std::vector<GnnLayer> layers;
    std::size_t off = 0;
    for (const auto& l : shape_.layers()) {
        const std::size_t n = l.fnn.param_count();
        layers.emplace_back(l.fnn.with_params(theta.subspan(off, n)), l.aggs);
        off += n;
    }
    return Gnn(std::move(layers));
}

std::vector<double> BatchedGnn::predict(std::span<const double> theta,
                                        const std::vector<const QuotientGraph*>& batch) const {
    std::vector<double> out;
    run(theta, batch, {}, 1.0, {}, &out);
    return out;
}

double BatchedGnn::loss_grad(std::span<const double> theta, const std::vector<const QuotientGraph*>& batch,
                             std::span<const double> targets, double beta, std::span<double> grad) const {
    if (targets.size() != batch.size()) throw DimensionError("one target per sample required");
    if (grad.size() != param_count_) throw DimensionError("gradient buffer size mismatch");
    return run(theta, batch, targets, beta, grad, nullptr);
}

double BatchedGnn::run(std::span<const double> theta, const std::vector<const QuotientGraph*>& batch,
                       std::span<const double> targets, double beta, std::span<double> grad,
                       std::vector<double>* out) const {
    if (theta.size() != param_count_) throw DimensionError("parameter vector size mismatch");
    const std::size_t B = batch.size();
    const bool want_grad = !grad.empty();

    // Row layout: all classes of all samples; neighbour lists per row.
    std::vector<std::size_t> base(B), target_row(B);
    std::size_t R = 0;
    for (std::size_t b = 0; b < B; ++b) {
        if (batch[b]->dim != layers_.front().in_dim) throw DimensionError("sample feature dimension mismatch");
        base[b] = R;
        target_row[b] = R + batch[b]->target_class;
        R += batch[b]->class_count();
    }
    std::vector<std::vector<RowLink>> nbrs(R);
    std::vector<double> deg(R, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const QuotientGraph& q = *batch[b];
        for (std::size_t c = 0; c < q.class_count(); ++c) {
            for (const auto& l : q.nbrs[c])
                if (l.count > 0) nbrs[base[b] + c].push_back({base[b] + l.cls, double(l.count)});
            deg[base[b] + c] = double(q.degree(c));
        }
    }
    auto weight = [&](AggKind kind, std::size_t row, const RowLink& e) {
        if (kind == AggKind::sum) return e.count;
        return nbrs[row].size() == 1 ? 1.0 : e.count / deg[row];
    };

    std::vector<double> H(R * layers_.front().in_dim);
    for (std::size_t b = 0; b < B; ++b) {
        const auto& f = batch[b]->features;
        std::copy(f.begin(), f.end(), H.begin() + std::ptrdiff_t(base[b] * batch[b]->dim));
    }

    const std::size_t m = layers_.size();
    std::vector<std::vector<std::size_t>> rows(m);
    // acts[l][j]: input of dense layer j in GNN layer l; acts[l].back() its output.
    std::vector<std::vector<std::vector<double>>> acts(m);
    std::vector<double> wt;
    for (std::size_t l = 0; l < m; ++l) {
        const Layer& L = layers_[l];
        const std::size_t d = L.in_dim, width = (1 + L.slots.size()) * d;
        if (l + 1 == m) {
            rows[l] = target_row;
        } else {
            rows[l].resize(R);
            std::iota(rows[l].begin(), rows[l].end(), 0);
        }
        const std::size_t n = rows[l].size();
        std::vector<double> X(n * width, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = rows[l][i];
            double* x = X.data() + i * width;
            std::copy(H.begin() + std::ptrdiff_t(r * d), H.begin() + std::ptrdiff_t((r + 1) * d), x);
            for (std::size_t s = 0; s < L.slots.size(); ++s) {
                double* slot = x + (1 + s) * d;
                for (const RowLink& e : nbrs[r]) {
                    const double w = weight(L.slots[s], r, e);
                    const double* h = H.data() + e.src * d;
                    for (std::size_t j = 0; j < d; ++j) slot[j] += w * h[j];
                }
            }
        }
        acts[l].push_back(std::move(X));
        for (const Dense& D : L.fnn) {
            std::vector<double> Y(n * D.out);
            affine_fwd(acts[l].back().data(), n, D.in, theta.data() + D.offset, theta.data() + D.offset + D.in * D.out,
                       D.out, Y.data(), wt);
            if (D.relu)
                for (double& y : Y) y = y > 0.0 ? y : 0.0;
            acts[l].push_back(std::move(Y));
        }
        H = acts[l].back();
    }

    // H now holds one scalar per sample.
    if (out) *out = H;
    if (targets.empty()) return 0.0;
    double loss = 0.0;
    std::vector<double> dH(B);
    for (std::size_t b = 0; b < B; ++b) {
        const double diff = H[b] - targets[b];
        loss += smooth_l1(diff, beta);
        dH[b] = smooth_l1_grad(diff, beta) / double(B);
    }
    loss /= double(B);
    if (!want_grad) return loss;

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t l = m; l-- > 0;) {
        const Layer& L = layers_[l];
        const std::size_t n = rows[l].size();
        std::vector<double> dA = std::move(dH);
        for (std::size_t j = L.fnn.size(); j-- > 0;) {
            const Dense& D = L.fnn[j];
            if (D.relu) {
                const auto& Y = acts[l][j + 1];
                for (std::size_t t = 0; t < dA.size(); ++t)
                    if (Y[t] <= 0.0) dA[t] = 0.0;
            }
            const bool need_dx = j > 0 || l > 0;
            std::vector<double> dX(need_dx ? n * D.in : 0);
            affine_bwd(acts[l][j].data(), dA.data(), n, D.in, D.out, theta.data() + D.offset,
                       grad.data() + D.offset, grad.data() + D.offset + D.in * D.out, need_dx ? dX.data() : nullptr);
            dA = std::move(dX);
        }
        if (l == 0) break;
        // Scatter the input adjoint back to the previous layer's rows.
        const std::size_t d = L.in_dim, width = (1 + L.slots.size()) * d;
        dH.assign(R * d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = rows[l][i];
            const double* g = dA.data() + i * width;
            for (std::size_t j = 0; j < d; ++j) dH[r * d + j] += g[j];
            for (std::size_t s = 0; s < L.slots.size(); ++s) {
                const double* gs = g + (1 + s) * d;
                for (const RowLink& e : nbrs[r]) {
                    const double w = weight(L.slots[s], r, e);
                    double* dst = dH.data() + e.src * d;
                    for (std::size_t j = 0; j < d; ++j) dst[j] += w * gs[j];
                }
            }
        }
    }
    return loss;
}

// ---- training loop ----

namespace {

struct Split {
    std::vector<QuotientGraph> graphs;
    std::vector<double> targets;
    std::vector<std::size_t> train, val;
};

double eval_loss(const BatchedGnn& eng, std::span<const double> theta, const Split& data,
                 const std::vector<std::size_t>& idx, std::size_t batch_size, double beta) {
    if (idx.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < idx.size(); s += batch_size) {
        const std::size_t e = std::min(idx.size(), s + batch_size);
        std::vector<const QuotientGraph*> batch;
        for (std::size_t i = s; i < e; ++i) batch.push_back(&data.graphs[idx[i]]);
        const auto y = eng.predict(theta, batch);
        for (std::size_t i = s; i < e; ++i) total += smooth_l1(y[i - s] - data.targets[idx[i]], beta);
    }
    return total / double(idx.size());
}

struct Run {
    std::vector<double> best;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<HistoryRow> history;
    bool diverged = false;
};

}  // namespace

TrainResult train(const TaskSpec& spec, const TrainConfig& cfg, std::uint64_t seed) {
    validate(spec);
    validate(cfg);
    Split data;
    for (std::uint64_t k = spec.train_k.lo; k <= spec.train_k.hi; ++k)
        for (std::uint64_t c = spec.train_c.lo; c <= spec.train_c.hi; ++c) {
            data.graphs.push_back(make_family_quotient({task_family(spec.task), k, c}));
            data.targets.push_back(double(c));
        }
    const std::size_t N = data.graphs.size();
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t n_val = 0;
    if (cfg.val_fraction > 0.0 && N > 1)
        n_val = std::clamp<std::size_t>(std::size_t(std::llround(cfg.val_fraction * double(N))), 1, N - 1);
    data.val.assign(perm.begin(), perm.begin() + std::ptrdiff_t(n_val));
    data.train.assign(perm.begin() + std::ptrdiff_t(n_val), perm.end());

    const Gnn init = make_model(spec, rng);
    const BatchedGnn eng(init);
    const std::vector<double> theta0 = eng.params(init);
    const std::size_t per_epoch = (data.train.size() + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = std::max<std::size_t>(1, cfg.epochs * per_epoch);

    std::vector<Run> runs(cfg.lr_candidates.size());
    parallel_for(runs.size(), [&](std::size_t li) {
        Run& run = runs[li];
        const double lr0 = cfg.lr_candidates[li];
        std::seed_seq ss{seed, std::uint64_t(li) + 1};
        std::mt19937_64 order_rng(ss);
        std::vector<double> theta = theta0, grad(theta.size());
        AdamState adam(theta.size(), lr0, total_steps);
        std::vector<std::size_t> order = data.train;
        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), order_rng);
            double total = 0.0;
            for (std::size_t s = 0; s < order.size(); s += cfg.batch_size) {
                const std::size_t e = std::min(order.size(), s + cfg.batch_size);
                std::vector<const QuotientGraph*> batch;
                std::vector<double> targets;
                for (std::size_t i = s; i < e; ++i) {
                    batch.push_back(&data.graphs[order[i]]);
                    targets.push_back(data.targets[order[i]]);
                }
                total += eng.loss_grad(theta, batch, targets, cfg.smooth_l1_beta, grad) * double(e - s);
                adam_step(theta, grad, adam);
            }
            const double train_loss = total / double(order.size());
            if (!std::isfinite(train_loss)) {
                run.diverged = true;
                break;
            }
            const double val_loss = data.val.empty()
                                        ? train_loss
                                        : eval_loss(eng, theta, data, data.val, cfg.batch_size, cfg.smooth_l1_beta);
            run.history.push_back({lr0, epoch, adam.current_lr(), train_loss, val_loss});
            if (val_loss < run.best_loss) {
                run.best_loss = val_loss;
                run.best = theta;
            }
        }
    });

    TrainResult result{init, {}, cfg.lr_candidates.front(), 0.0, {}};
    if (cfg.epochs == 0) {
        result.best_val_loss = eval_loss(eng, theta0, data, data.val.empty() ? data.train : data.val,
                                         cfg.batch_size, cfg.smooth_l1_beta);
        return result;
    }
    std::size_t chosen = runs.size();
    for (std::size_t li = 0; li < runs.size(); ++li) {
        if (runs[li].diverged) result.diverged_lrs.push_back(cfg.lr_candidates[li]);
        if (!runs[li].best.empty() && (chosen == runs.size() || runs[li].best_loss < runs[chosen].best_loss))
            chosen = li;
        result.history.insert(result.history.end(), runs[li].history.begin(), runs[li].history.end());
    }
    if (chosen == runs.size()) {
        std::ostringstream os;
        os << "training diverged for every learning rate; last tried lr=" << cfg.lr_candidates.back();
        throw Error(os.str());
    }
    result.gnn = eng.with_params(runs[chosen].best);
    result.chosen_lr = cfg.lr_candidates[chosen];
    result.best_val_loss = runs[chosen].best_loss;
    return result;
}

}  // namespace exprlab
