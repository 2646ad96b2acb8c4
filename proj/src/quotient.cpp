#include "exprlab/graph/quotient.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace exprlab {

std::uint64_t QuotientGraph::degree(std::size_t cls) const {
    std::uint64_t d = 0;
    for (const auto& l : nbrs[cls]) d += l.count;
    return d;
}

namespace {

// Renumbers colours so that classes are ordered by their smallest vertex.
std::size_t canonicalize(std::vector<std::uint32_t>& colour) {
    std::map<std::uint32_t, std::uint32_t> rename;
    for (auto& c : colour) {
        auto [it, inserted] = rename.try_emplace(c, static_cast<std::uint32_t>(rename.size()));
        c = it->second;
    }
    return rename.size();
}

QuotientGraph build(const FeaturedGraph& g, const std::vector<std::uint32_t>& colour, std::size_t k) {
    QuotientGraph q;
    q.dim = g.dim();
    q.class_size.assign(k, 0);
    q.representative.assign(k, 0);
    q.features.assign(k * g.dim(), 0.0);
    q.nbrs.assign(k, {});
    std::vector<bool> seen(k, false);
    for (std::size_t v = 0; v < g.n(); ++v) {
        const std::uint32_t c = colour[v];
        ++q.class_size[c];
        if (seen[c]) continue;
        seen[c] = true;
        q.representative[c] = static_cast<VertexId>(v);
        auto f = g.feature(static_cast<VertexId>(v));
        std::copy(f.begin(), f.end(), q.features.begin() + static_cast<std::ptrdiff_t>(c * g.dim()));
        std::map<std::uint32_t, std::uint64_t> counts;
        for (VertexId w : g.neighbors(static_cast<VertexId>(v))) ++counts[colour[w]];
        for (const auto& [d, n] : counts) q.nbrs[c].push_back({d, n});
    }
    q.target_class = colour[g.target()];
    return q;
}

}  // namespace

QuotientGraph quotient_of(const FeaturedGraph& g) {
    const std::size_t n = g.n();
    std::vector<std::uint32_t> colour(n);
    {
        std::map<std::vector<double>, std::uint32_t> ids;
        for (std::size_t v = 0; v < n; ++v) {
            auto f = g.feature(static_cast<VertexId>(v));
            std::vector<double> key(f.begin(), f.end());
            auto [it, inserted] = ids.try_emplace(std::move(key), static_cast<std::uint32_t>(ids.size()));
            colour[v] = it->second;
        }
    }
    std::size_t classes = canonicalize(colour);
    for (;;) {
        std::map<std::vector<std::uint64_t>, std::uint32_t> ids;
        std::vector<std::uint32_t> next(n);
        for (std::size_t v = 0; v < n; ++v) {
            std::vector<std::uint64_t> sig{colour[v]};
            std::vector<std::uint32_t> nc;
            for (VertexId w : g.neighbors(static_cast<VertexId>(v))) nc.push_back(colour[w]);
            std::sort(nc.begin(), nc.end());
            sig.insert(sig.end(), nc.begin(), nc.end());
            auto [it, inserted] = ids.try_emplace(std::move(sig), static_cast<std::uint32_t>(ids.size()));
            next[v] = it->second;
        }
        const std::size_t refined = canonicalize(next);
        colour.swap(next);
        if (refined == classes) break;
        classes = refined;
    }
    return build(g, colour, classes);
}

QuotientGraph discrete_quotient(const FeaturedGraph& g) {
    std::vector<std::uint32_t> colour(g.n());
    std::iota(colour.begin(), colour.end(), 0u);
    return build(g, colour, g.n());
}

}  // namespace exprlab
