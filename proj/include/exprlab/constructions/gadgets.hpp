#pragma once

#include <cstddef>

#include "exprlab/gnn/gnn.hpp"

namespace exprlab {

// Threshold indicator on the neighbour average: 0 < a <= s <= 1.
struct IndicatorSpec {
    double s = 0.5;
    double a = 0.25;
    std::size_t d = 1;
};

void validate(const IndicatorSpec& spec);

// Smallest positive integer q with 1/q < eps.
std::size_t resolution_for(double eps);

// Two-layer Sum-GNN. Layer 1 emits (1, x); layer 2 receives the neighbour
// count n and the neighbour sum S and, per coordinate, with
// z = (s*n - S)/a, returns ReLU(z) - ReLU(z-1) + ReLU(z-n-1) - ReLU(z-n).
Gnn build_indicator(const IndicatorSpec& spec);

// Two-layer Sum-GNN whose output satisfies avg <= out <= avg + 1/q at every
// vertex with at least one neighbour, for features in [0,1]^d.
Gnn build_mean_approx(double eps, std::size_t d);

// Two-layer Sum-GNN with max <= out <= max + 1/q under the same conditions.
// Layer 1 splits each coordinate into q buckets of width 1/q; layer 2 caps
// the summed buckets at 1/q and adds them up.
Gnn build_max_approx(double eps, std::size_t d);

}  // namespace exprlab
