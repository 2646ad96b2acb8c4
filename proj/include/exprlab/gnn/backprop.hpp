#pragma once

#include <span>
#include <vector>

#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/quotient.hpp"

namespace exprlab {

// Gradients of a scalar loss with respect to every layer's FNN parameters
// (layout of Fnn::params()) and the input feature rows of each class.
struct GnnGradients {
    std::vector<std::vector<double>> layer_params;
    FeatureMap input;

    explicit GnnGradients(const Gnn& gnn, const QuotientGraph& q);
    void clear();
};

struct GnnTape {
    LayerTrace trace;
    // Per layer, per class FNN tapes.
    std::vector<std::vector<FnnTape>> fnn_tapes;
    // Per layer, per class, per aggregation slot, per coordinate: the class
    // whose value won a max aggregation (unused for other kinds).
    std::vector<std::vector<std::vector<std::uint32_t>>> argmax;
};

void gnn_forward_taped(const Gnn& gnn, const QuotientGraph& q, GnnTape& tape);

// Backpropagates output adjoints given as class totals (the sum of dL/dh
// over the vertices of each class) and accumulates into grads.
//
// Sum and mean distribute adjoints through the neighbour counts; max routes
// each coordinate to the winning class, ties going to the class with the
// smallest representative. That matches per-vertex lowest-index routing
// whenever classes occupy contiguous id ranges, as for the graph families
// and for discrete quotients. upa aggregations are rejected.
void gnn_backward(const Gnn& gnn, const QuotientGraph& q, const GnnTape& tape,
                  const FeatureMap& output_adjoint, GnnGradients& grads);

}  // namespace exprlab
