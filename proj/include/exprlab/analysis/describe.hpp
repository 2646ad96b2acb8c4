#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "exprlab/analysis/poly2.hpp"
#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/families.hpp"

namespace exprlab {

// What the describing set covers: the target vertex output, or the sum of
// all vertex outputs (class sizes times class values).
enum class DescribeTarget { center, sum_readout };

struct DescribeOptions {
    std::size_t cap = 100'000;
    // Polynomials match when every coefficient agrees within this tolerance.
    double dedupe_tol = 1e-9;
    std::size_t output_coord = 0;
    // Skip the {p, 0} split when all coefficients of p share a sign (p is
    // then nonnegative or nonpositive for k, c >= 1). Constants always fold.
    bool prune_signs = false;
};

// Symbolically propagates describing sets through a Sum-GNN on a family.
// Each class carries a set of branches (vectors of polynomials, one per
// feature coordinate); affine maps act per branch, ReLU splits a coordinate
// into {p, 0} (constants fold), and aggregations combine neighbour classes
// through their count monomials.
//
// Supported families: star_sv, star_uc, bipartite_uc, tripartite_sv,
// tripartite_embed. Throws std::invalid_argument for other families or
// non-sum aggregations, and CapExceededError when a set outgrows the cap.
PolySet describe(const Gnn& gnn, Family family, DescribeTarget target = DescribeTarget::center,
                 const DescribeOptions& opts = {});

// Describing set of output_coord for every vertex class (class 0 holds the
// target vertex), after the last layer.
std::vector<PolySet> describe_classes(const Gnn& gnn, Family family, const DescribeOptions& opts = {});

// Monomials that can occur in sum over classes of |C| * p_C with p_C drawn
// from the class sets. Cancellation can only remove monomials, so a monomial
// absent here is absent from every readout polynomial.
std::set<Poly2::Key> readout_support(const std::vector<PolySet>& class_sets, Family family);

struct DescriptionCheck {
    std::size_t points = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> violations;
    // Number of grid points at which more than one polynomial matches.
    std::size_t ambiguous = 0;
};

// For every (k, c) in the grid, some polynomial must match the numeric
// output within 1e-6 * max(1, |y|).
DescriptionCheck check_description(const PolySet& ps, const Gnn& gnn, Family family,
                                   DescribeTarget target, std::uint64_t k_lo, std::uint64_t k_hi,
                                   std::uint64_t c_lo, std::uint64_t c_hi, std::size_t output_coord = 0);

// Numeric value the describing set is checked against.
double described_value(const Gnn& gnn, Family family, DescribeTarget target, std::uint64_t k,
                       std::uint64_t c, std::size_t output_coord = 0);

}  // namespace exprlab
