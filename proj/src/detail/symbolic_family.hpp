#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "exprlab/analysis/poly2.hpp"
#include "exprlab/graph/families.hpp"

namespace exprlab::detail {

// Vertex classes of a family with sizes, features and neighbour counts as
// monomials k^i c^j. Class 0 holds the target vertex.
struct SymClass {
    Poly2::Key size;
    Poly2 feature;
    std::vector<std::pair<std::size_t, Poly2::Key>> nbrs;
};

// Throws std::invalid_argument for star_flag.
std::vector<SymClass> symbolic_family(Family f);

}  // namespace exprlab::detail
