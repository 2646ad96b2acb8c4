#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "exprlab/constructions/emulation.hpp"
#include "exprlab/gnn/gnn.hpp"
#include "json.hpp"

namespace exprlab {

// Absolute slack on both sides of a sandwich, for rounding in the sums.
inline constexpr double kSandwichSlack = 1e-12;

struct SandwichCheck {
    AggKind kind = AggKind::mean;
    double eps = 0.0;
    double resolution = 0.0;  // 1/q actually used, <= eps
    std::size_t d = 0;
    std::size_t graphs = 0;
    std::size_t vertices = 0;  // vertices with at least one neighbour
    std::size_t violations = 0;
    // Extremes of output minus the exact aggregate over all checked coordinates.
    double min_excess = 0.0;
    double max_excess = 0.0;
};

nlohmann::json to_json(const SandwichCheck& c);

// Builds the mean or max approximator for (eps, d) and checks
// ref <= out <= ref + eps on `graphs` random graphs of 1..max_vertices
// vertices with features in [0,1]^d.
SandwichCheck verify_sandwich(AggKind kind, double eps, std::size_t d, std::size_t graphs,
                              std::size_t max_vertices, std::mt19937_64& rng);

struct EmulationCheck {
    double eps = 0.0;
    std::size_t graphs = 0;
    std::size_t vertices = 0;
    double max_gap = 0.0;
    bool within = true;
};

nlohmann::json to_json(const EmulationCheck& c);

// Largest |source - compiled| over every vertex and coordinate of random
// graphs with features in [0,1]^p.
EmulationCheck verify_emulation(const Gnn& source, const Gnn& compiled, double eps, std::size_t graphs,
                                std::size_t max_vertices, std::mt19937_64& rng);

struct GrowthRow {
    std::uint64_t k = 0;
    double output = 0.0;  // largest |coordinate| at the star center
    double bound = 0.0;
};

struct GrowthCheck {
    std::vector<GrowthRow> rows;
    bool holds = true;
};

nlohmann::json to_json(const GrowthCheck& c);

// |N(star_sv(k), center)| <= (2da)^m for each k.
GrowthCheck verify_growth(const Gnn& gnn, const std::vector<std::uint64_t>& ks);

}  // namespace exprlab
