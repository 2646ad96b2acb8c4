#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "exprlab/experiments/dataset.hpp"
#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/quotient.hpp"

namespace exprlab {

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 100;
    std::vector<double> lr_candidates{1e-3, 1e-4, 1e-5};
    double val_fraction = 0.05;
    double smooth_l1_beta = 1.0;
};

void validate(const TrainConfig& cfg);
std::map<std::string, std::string> to_config(const TrainConfig& cfg);
TrainConfig train_config_from_config(const std::map<std::string, std::string>& kv);

// Two-layer MLP per GNN layer: (1 + slots) * in -> hidden (ReLU) -> out.
// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Gnn make_model(const TaskSpec& spec, std::mt19937_64& rng);

double smooth_l1(double diff, double beta);
double smooth_l1_grad(double diff, double beta);

// Loss adjoint for a quotient output: nonzero only in the target class row.
FeatureMap center_loss_adjoint(const QuotientGraph& q, const FeatureMap& output, double target, double beta);

// Minibatch trainer over quotient graphs. Parameters are flat, in the
// concatenated Fnn::params() layout of the layers. Only the target class is
// evaluated in the last layer. Supports sum and mean aggregations.
class BatchedGnn {
public:
    explicit BatchedGnn(const Gnn& shape);

    std::size_t param_count() const { return param_count_; }
    std::vector<double> params(const Gnn& gnn) const;
    Gnn with_params(std::span<const double> theta) const;

    // Target-vertex outputs, one per sample.
    std::vector<double> predict(std::span<const double> theta, const std::vector<const QuotientGraph*>& batch) const;

    // Mean smooth-L1 loss over the batch; grad (same size as theta) is
    // overwritten with its gradient.
    double loss_grad(std::span<const double> theta, const std::vector<const QuotientGraph*>& batch,
                     std::span<const double> targets, double beta, std::span<double> grad) const;

private:
    struct Dense {
        std::size_t in, out, offset;
        bool relu;
    };
    struct Layer {
        std::vector<Dense> fnn;
        std::vector<AggKind> slots;
        std::size_t in_dim, out_dim;
    };
    double run(std::span<const double> theta, const std::vector<const QuotientGraph*>& batch,
               std::span<const double> targets, double beta, std::span<double> grad, std::vector<double>* out) const;

    Gnn shape_;
    std::vector<Layer> layers_;
    std::size_t param_count_ = 0;
};

struct HistoryRow {
    double lr0 = 0.0;
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    Gnn gnn;
    std::vector<HistoryRow> history;
    double chosen_lr = 0.0;
    double best_val_loss = 0.0;
    // Candidates whose training loss became non-finite; their runs stop there.
    std::vector<double> diverged_lrs;
};

// Trains one model on the task's training grid. Deterministic given seed.
// Each learning-rate candidate starts from the same initialization; the
// best validation checkpoint over all candidates is returned. Throws Error
// when every candidate diverges.
TrainResult train(const TaskSpec& spec, const TrainConfig& cfg, std::uint64_t seed);

}  // namespace exprlab
