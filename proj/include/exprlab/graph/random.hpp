#pragma once

#include <cstddef>
#include <random>

#include "exprlab/graph/featured_graph.hpp"

namespace exprlab {

// G(n, edge_prob) with features drawn uniformly from [flo, fhi]^d; target 0.
FeaturedGraph random_featured_graph(std::mt19937_64& rng, std::size_t n, std::size_t d, double edge_prob,
                                    double flo = 0.0, double fhi = 1.0);

}  // namespace exprlab
