#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace exprlab {

using VertexId = std::uint32_t;
using Edge = std::pair<VertexId, VertexId>;

// Undirected graph with a real feature vector of dimension dim() per vertex
// and one designated target vertex. Immutable after construction.
class FeaturedGraph {
public:
    // Throws std::invalid_argument on dangling endpoints, self-loops,
    // duplicate edges, feature arrays of the wrong length, or a bad target.
    FeaturedGraph(std::size_t n, std::size_t dim, std::vector<Edge> edges,
                  std::vector<double> features, VertexId target = 0);

    std::size_t n() const { return n_; }
    std::size_t dim() const { return dim_; }
    VertexId target() const { return target_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const double> features() const { return features_; }
    std::span<const double> feature(VertexId v) const {
        return std::span<const double>(features_).subspan(std::size_t{v} * dim_, dim_);
    }
    std::span<const VertexId> neighbors(VertexId v) const {
        return std::span<const VertexId>(adj_).subspan(adj_ptr_[v], adj_ptr_[v + 1] - adj_ptr_[v]);
    }
    std::size_t degree(VertexId v) const { return adj_ptr_[v + 1] - adj_ptr_[v]; }

    // Same graph with vertex v renamed to perm[v].
    FeaturedGraph relabeled(std::span<const VertexId> perm) const;

    bool operator==(const FeaturedGraph& other) const;

private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<Edge> edges_;
    std::vector<double> features_;
    VertexId target_;
    std::vector<std::size_t> adj_ptr_;
    std::vector<VertexId> adj_;
};

// {n, d, edges: [[i,j]...], features: [[...]...], target}
nlohmann::json to_json(const FeaturedGraph& g);
// Throws ParseError naming the offending field.
FeaturedGraph graph_from_json(const nlohmann::json& j);

void write_graph(const std::filesystem::path& path, const FeaturedGraph& g);
FeaturedGraph read_graph(const std::filesystem::path& path);

}  // namespace exprlab
