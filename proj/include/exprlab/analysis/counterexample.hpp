#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/families.hpp"

namespace exprlab {

struct Witness {
    std::uint64_t k = 0;
    std::uint64_t c = 0;
    double output = 0.0;
    double gap = 0.0;
};

struct SearchGrid {
    std::uint64_t k_max = 10'000;
    std::uint64_t c_max = 10'000;
    double ratio = 2.0;
};

// 1, r, r^2, ... (rounded, deduplicated) below max, then max itself.
std::vector<std::uint64_t> geometric_ladder(std::uint64_t max, double ratio);

// Scans k (outer) and c (inner) over the ladders and returns the first pair,
// in lexicographic order, where the target-vertex output misses target(k, c)
// by more than eps.
std::optional<Witness> counterexample_search(const Gnn& gnn, Family family,
                                             const std::function<double(std::uint64_t, std::uint64_t)>& target,
                                             double eps, const SearchGrid& grid = {});

}  // namespace exprlab
