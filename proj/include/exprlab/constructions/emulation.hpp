#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "exprlab/gnn/gnn.hpp"
#include "json.hpp"

namespace exprlab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct EmulationReport {
    double eps = 0.0;
    double eps_hat = 0.0;
    double a = 0.0;          // largest lipschitz_upper over the source FNNs
    std::size_t d = 0;       // largest layer input dimension
    std::size_t m = 0;       // source depth
    std::size_t size_built = 0;
    std::size_t source_size = 0;
    std::size_t gadget_units = 0;
    // Per source layer and coordinate: the range used to normalize layer
    // inputs and the gadget resolution chosen for it.
    std::vector<std::vector<Interval>> ranges;
    std::vector<std::vector<std::size_t>> resolutions;
};

nlohmann::json to_json(const EmulationReport& r);

// eps * (1 - 2ad) / (ad * (1 - (2ad)^m)), with the limit eps / (m*ad) at
// 2ad = 1. When ad = 0 the source is constant and eps itself is returned.
double emulation_tolerance(double eps, double a, std::size_t d, std::size_t m);

// Interval bounds of every layer's output when inputs range over [0,1]^p.
// Aggregated slots are bounded by the hull of the layer input box and 0.
std::vector<std::vector<Interval>> layer_bounds(const Gnn& source);

struct CompileOptions {
    // Compilation fails when the gadget layers would need more ReLU units.
    std::size_t max_gadget_units = 4'000'000;
};

// Compiles a Mean-GNN or Max-GNN into a 2m-layer Sum-GNN that stays within
// eps of the source at every vertex of every graph featured in [0,1]^p.
// Throws std::invalid_argument for mixed or unsupported aggregations and
// InfeasibleError when the tolerance underflows or the gadgets are too big.
std::pair<Gnn, EmulationReport> compile_to_sum(const Gnn& source, double eps,
                                               const CompileOptions& opts = {});

// (2*d*a)^m for a Mean-GNN or Max-GNN.
double growth_bound(const Gnn& gnn);

}  // namespace exprlab
