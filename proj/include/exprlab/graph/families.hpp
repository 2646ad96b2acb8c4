#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "exprlab/graph/featured_graph.hpp"
#include "exprlab/graph/quotient.hpp"

namespace exprlab {

enum class Family { star_sv, star_uc, star_flag, bipartite_uc, tripartite_sv, tripartite_embed };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

// k is the leaf / intermediate count. The second parameter is c for the
// two-parameter families and b (0 or 1) for star_flag; star_sv ignores it.
struct FamilySpec {
    Family family = Family::star_sv;
    std::uint64_t k = 1;
    std::uint64_t c = 1;
};

// Throws std::invalid_argument when parameters are out of range.
void validate(const FamilySpec& spec);

std::uint64_t family_vertex_count(const FamilySpec& spec);
std::uint64_t family_edge_count(const FamilySpec& spec);

// Explicit graph. Vertices are numbered class by class in definition order
// (u-class, then v-class, then w-class); the target is vertex 0.
FeaturedGraph make_family(const FamilySpec& spec);

// The same graph as an equitable partition into its vertex classes, built
// without materializing edges. Usable for parameters far beyond what
// make_family can hold in memory.
QuotientGraph make_family_quotient(const FamilySpec& spec);

}  // namespace exprlab
