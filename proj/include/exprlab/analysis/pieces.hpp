#pragma once

#include <cstdint>
#include <map>

#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/families.hpp"
#include "json.hpp"

namespace exprlab {

struct PieceReport {
    std::uint64_t bound = 0;  // 0 when no network was involved
    std::size_t detected_pieces = 0;
    std::size_t max_degree_used = 0;
    std::int64_t k_lo = 0;
    std::int64_t k_hi = 0;
};

nlohmann::json to_json(const PieceReport& r);

// ((d+1)^l)^m with l the largest FNN depth, d the largest nonzero in-degree
// of any FNN node and m the layer count. Saturates at UINT64_MAX.
std::uint64_t piece_bound(const Gnn& gnn);

// Degree bound on the polynomial pieces of the target output along the
// family's k (c held fixed), tracked through aggregation counts and upa
// polynomials.
std::size_t piece_degree_bound(const Gnn& gnn, Family family);

// Greedy scan over samples on consecutive integers. A sample joins the
// current piece when the (max_degree+1)-th finite difference over the
// window ending at it vanishes relative to the window magnitude.
// Throws std::invalid_argument when samples are missing or too few.
PieceReport detect_pieces(const std::map<std::int64_t, double>& samples, std::size_t max_degree,
                          double rel_tol = 1e-6);

// Samples the target output on family(k, c) for k in [k_lo, k_hi] and runs
// detect_pieces with piece_degree_bound; fills in piece_bound.
PieceReport analyze_pieces(const Gnn& gnn, Family family, std::int64_t k_lo, std::int64_t k_hi,
                           std::uint64_t c = 1);

}  // namespace exprlab
