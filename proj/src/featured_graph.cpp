#include "exprlab/graph/featured_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "exprlab/util/error.hpp"
#include "exprlab/util/files.hpp"

namespace exprlab {

FeaturedGraph::FeaturedGraph(std::size_t n, std::size_t dim, std::vector<Edge> edges,
                             std::vector<double> features, VertexId target)
    : n_(n), dim_(dim), edges_(std::move(edges)), features_(std::move(features)), target_(target) {
    if (n_ == 0) throw std::invalid_argument("graph needs at least one vertex");
    if (dim_ == 0) throw std::invalid_argument("feature dimension must be positive");
    if (features_.size() != n_ * dim_)
        throw std::invalid_argument("feature array has " + std::to_string(features_.size()) +
                                    " entries, expected " + std::to_string(n_ * dim_));
    if (target_ >= n_) throw std::invalid_argument("target vertex out of range");
    std::vector<Edge> norm;
    norm.reserve(edges_.size());
    for (const auto& [a, b] : edges_) {
        if (a >= n_ || b >= n_)
            throw std::invalid_argument("edge {" + std::to_string(a) + "," + std::to_string(b) +
                                        "} references a missing vertex");
        if (a == b) throw std::invalid_argument("self-loop at vertex " + std::to_string(a));
        norm.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(norm.begin(), norm.end());
    if (std::adjacent_find(norm.begin(), norm.end()) != norm.end())
        throw std::invalid_argument("duplicate edge");

    adj_ptr_.assign(n_ + 1, 0);
    for (const auto& [a, b] : edges_) {
        ++adj_ptr_[a + 1];
        ++adj_ptr_[b + 1];
    }
    for (std::size_t v = 0; v < n_; ++v) adj_ptr_[v + 1] += adj_ptr_[v];
    adj_.resize(adj_ptr_[n_]);
    std::vector<std::size_t> fill(adj_ptr_.begin(), adj_ptr_.end() - 1);
    for (const auto& [a, b] : edges_) {
        adj_[fill[a]++] = b;
        adj_[fill[b]++] = a;
    }
    for (std::size_t v = 0; v < n_; ++v)
        std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(adj_ptr_[v]),
                  adj_.begin() + static_cast<std::ptrdiff_t>(adj_ptr_[v + 1]));
}

FeaturedGraph FeaturedGraph::relabeled(std::span<const VertexId> perm) const {
    if (perm.size() != n_) throw std::invalid_argument("permutation has wrong length");
    std::vector<bool> seen(n_, false);
    for (VertexId p : perm) {
        if (p >= n_ || seen[p]) throw std::invalid_argument("not a permutation");
        seen[p] = true;
    }
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const auto& [a, b] : edges_) edges.emplace_back(perm[a], perm[b]);
    std::vector<double> feats(features_.size());
    for (std::size_t v = 0; v < n_; ++v)
        std::copy_n(features_.begin() + static_cast<std::ptrdiff_t>(v * dim_), dim_,
                    feats.begin() + static_cast<std::ptrdiff_t>(std::size_t{perm[v]} * dim_));
    return FeaturedGraph(n_, dim_, std::move(edges), std::move(feats), perm[target_]);
}

bool FeaturedGraph::operator==(const FeaturedGraph& o) const {
    return n_ == o.n_ && dim_ == o.dim_ && target_ == o.target_ && edges_ == o.edges_ &&
           features_ == o.features_;
}

nlohmann::json to_json(const FeaturedGraph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
    nlohmann::json feats = nlohmann::json::array();
    for (std::size_t v = 0; v < g.n(); ++v) {
        auto f = g.feature(static_cast<VertexId>(v));
        feats.push_back(std::vector<double>(f.begin(), f.end()));
    }
    return {{"n", g.n()}, {"d", g.dim()}, {"edges", std::move(edges)},
            {"features", std::move(feats)}, {"target", g.target()}};
}

FeaturedGraph graph_from_json(const nlohmann::json& j) {
    auto field = [&](const char* name) -> const nlohmann::json& {
        if (!j.is_object() || !j.contains(name)) throw ParseError(std::string("graph: missing field '") + name + "'");
        return j.at(name);
    };
    try {
        const auto n = field("n").get<std::size_t>();
        const auto d = field("d").get<std::size_t>();
        const auto target = j.contains("target") ? j.at("target").get<VertexId>() : VertexId{0};
        std::vector<Edge> edges;
        const auto& je = field("edges");
        for (std::size_t i = 0; i < je.size(); ++i) {
            if (!je[i].is_array() || je[i].size() != 2)
                throw ParseError("graph: edges[" + std::to_string(i) + "] is not a pair");
            edges.emplace_back(je[i][0].get<VertexId>(), je[i][1].get<VertexId>());
        }
        std::vector<double> feats;
        const auto& jf = field("features");
        if (jf.size() != n)
            throw ParseError("graph: features has " + std::to_string(jf.size()) + " rows, n is " +
                             std::to_string(n));
        for (std::size_t v = 0; v < n; ++v) {
            const auto row = jf[v].get<std::vector<double>>();
            if (row.size() != d)
                throw ParseError("graph: features[" + std::to_string(v) + "] has dimension " +
                                 std::to_string(row.size()) + ", d is " + std::to_string(d));
            feats.insert(feats.end(), row.begin(), row.end());
        }
        return FeaturedGraph(n, d, std::move(edges), std::move(feats), target);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("graph: ") + e.what());
    }
}

void write_graph(const std::filesystem::path& path, const FeaturedGraph& g) {
    write_file_atomic(path, to_json(g).dump() + "\n");
}

FeaturedGraph read_graph(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return graph_from_json(j);
}

}  // namespace exprlab
