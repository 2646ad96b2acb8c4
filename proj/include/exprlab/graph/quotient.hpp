#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "exprlab/graph/featured_graph.hpp"

namespace exprlab {

// Equitable partition of a featured graph: every vertex of class C has
// exactly `count` neighbours in class D for each (D, count) in nbrs[C], and
// all vertices of a class share one feature vector. Any AC-GNN assigns the
// same value to all vertices of a class, so evaluating on the quotient is
// exact.
struct QuotientGraph {
    struct Link {
        std::uint32_t cls;
        std::uint64_t count;
    };

    std::size_t dim = 0;
    std::vector<std::uint64_t> class_size;
    std::vector<VertexId> representative;  // smallest vertex id in the class
    std::vector<double> features;          // class-major, dim per class
    std::vector<std::vector<Link>> nbrs;   // sorted by class index
    std::uint32_t target_class = 0;

    std::size_t class_count() const { return class_size.size(); }
    std::span<const double> feature(std::size_t cls) const {
        return std::span<const double>(features).subspan(cls * dim, dim);
    }
    std::uint64_t degree(std::size_t cls) const;
};

// Coarsest equitable refinement of the feature partition (colour refinement).
QuotientGraph quotient_of(const FeaturedGraph& g);

// Each vertex its own class.
QuotientGraph discrete_quotient(const FeaturedGraph& g);

}  // namespace exprlab
