#include "exprlab/graph/random.hpp"

#include <stdexcept>

namespace exprlab {

FeaturedGraph random_featured_graph(std::mt19937_64& rng, std::size_t n, std::size_t d, double edge_prob,
                                    double flo, double fhi) {
    if (n == 0) throw std::invalid_argument("random graph needs at least one vertex");
    std::uniform_real_distribution<double> coin(0.0, 1.0), feat(flo, fhi);
    std::vector<Edge> edges;
    for (VertexId a = 0; a < n; ++a)
        for (VertexId b = a + 1; b < n; ++b)
            if (coin(rng) < edge_prob) edges.emplace_back(a, b);
    std::vector<double> feats(n * d);
    for (double& f : feats) f = feat(rng);
    return FeaturedGraph(n, d, std::move(edges), std::move(feats), 0);
}

}  // namespace exprlab
