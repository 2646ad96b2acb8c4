#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exprlab/gnn/aggregation.hpp"
#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/quotient.hpp"

namespace exprlab::detail {

// Aggregates the neighbour multiset of any vertex of class `cls`. When
// argmax is non-null it receives, per coordinate, the class that won a max.
void quotient_aggregate(const Aggregation& agg, const QuotientGraph& q, const FeatureMap& feats,
                        std::size_t cls, std::span<double> out, std::vector<std::uint32_t>* argmax);

}  // namespace exprlab::detail
