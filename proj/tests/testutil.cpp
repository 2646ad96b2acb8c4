#include "testutil.hpp"

namespace exprlab::tu {

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Fnn random_fnn(Rng& rng, std::size_t in, std::size_t out, std::size_t depth, std::size_t max_width,
               double wlo, double whi, bool zero_bias) {
    std::vector<DenseLayer> layers;
    std::size_t dim = in;
    for (std::size_t i = 0; i < depth; ++i) {
        const bool last = i + 1 == depth;
        const std::size_t width = last ? out : uniform_int(rng, 1, max_width);
        DenseLayer l(dim, width, last ? Activation::identity : Activation::relu);
        for (double& w : l.weights) w = uniform(rng, wlo, whi);
        if (!zero_bias)
            for (double& b : l.bias) b = uniform(rng, wlo, whi);
        layers.push_back(std::move(l));
        dim = width;
    }
    return Fnn(in, std::move(layers));
}

FeaturedGraph random_graph(Rng& rng, std::size_t n, std::size_t d, double edge_prob, double flo,
                           double fhi) {
    std::vector<Edge> edges;
    for (VertexId a = 0; a < n; ++a)
        for (VertexId b = a + 1; b < n; ++b)
            if (uniform(rng, 0.0, 1.0) < edge_prob) edges.emplace_back(a, b);
    std::vector<double> feats(n * d);
    for (double& f : feats) f = uniform(rng, flo, fhi);
    return FeaturedGraph(n, d, std::move(edges), std::move(feats), 0);
}

Gnn random_gnn(Rng& rng, AggKind kind, std::size_t in_dim, std::size_t out_dim, std::size_t m,
               std::size_t max_width, std::size_t fnn_depth, double wlo, double whi, bool zero_bias) {
    std::vector<GnnLayer> layers;
    std::size_t dim = in_dim;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t next = i + 1 == m ? out_dim : uniform_int(rng, 1, max_width);
        Aggregation agg;
        agg.kind = kind;
        layers.emplace_back(random_fnn(rng, 2 * dim, next, fnn_depth, max_width, wlo, whi, zero_bias),
                            std::vector<Aggregation>{agg});
        dim = next;
    }
    return Gnn(std::move(layers));
}

Gnn random_mupa_gnn(Rng& rng, std::size_t m, std::size_t max_width, std::size_t fnn_depth) {
    std::vector<GnnLayer> layers;
    std::size_t dim = 1;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t next = i + 1 == m ? 1 : uniform_int(rng, 1, max_width);
        Aggregation agg;
        switch (uniform_int(rng, 0, 3)) {
            case 0: agg = Aggregation::sum(); break;
            case 1: agg = Aggregation::mean(); break;
            case 2: agg = Aggregation::max(); break;
            default: {
                std::vector<double> coeffs(uniform_int(rng, 1, 3));
                for (double& c : coeffs) c = uniform(rng, -1.0, 1.0);
                agg = Aggregation::upa(coeffs, uniform_int(rng, 0, 1) ? UpaMode::of_bx : UpaMode::of_x);
            }
        }
        layers.emplace_back(random_fnn(rng, 2 * dim, next, fnn_depth, max_width), std::vector<Aggregation>{agg});
        dim = next;
    }
    return Gnn(std::move(layers));
}

}  // namespace exprlab::tu
