#include "exprlab/constructions/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exprlab/constructions/gadgets.hpp"
#include "exprlab/graph/families.hpp"
#include "exprlab/graph/random.hpp"

namespace exprlab {

nlohmann::json to_json(const SandwichCheck& c) {
    return {{"kind", to_string(c.kind)},       {"eps", c.eps},
            {"resolution", c.resolution},      {"d", c.d},
            {"graphs", c.graphs},              {"vertices", c.vertices},
            {"violations", c.violations},      {"min_excess", c.min_excess},
            {"max_excess", c.max_excess}};
}

SandwichCheck verify_sandwich(AggKind kind, double eps, std::size_t d, std::size_t graphs,
                              std::size_t max_vertices, std::mt19937_64& rng) {
    if (kind != AggKind::mean && kind != AggKind::max)
        throw std::invalid_argument("sandwich check applies to mean or max");
    if (max_vertices == 0) throw std::invalid_argument("max_vertices must be positive");
    const Gnn approx = kind == AggKind::mean ? build_mean_approx(eps, d) : build_max_approx(eps, d);
    const Aggregation ref_agg = kind == AggKind::mean ? Aggregation::mean() : Aggregation::max();
    SandwichCheck c;
    c.kind = kind;
    c.eps = eps;
    c.resolution = 1.0 / double(resolution_for(eps));
    c.d = d;
    c.graphs = graphs;
    c.min_excess = INFINITY;
    c.max_excess = -INFINITY;
    std::uniform_int_distribution<std::size_t> nv(1, max_vertices);
    std::uniform_real_distribution<double> prob(0.02, 0.5);
    for (std::size_t gi = 0; gi < graphs; ++gi) {
        const std::size_t n = nv(rng);
        const FeaturedGraph g = random_featured_graph(rng, n, d, prob(rng));
        const LayerTrace trace = gnn_forward(approx, g);
        const FeatureMap& out = trace.back();
        for (VertexId v = 0; v < n; ++v) {
            if (g.degree(v) == 0) continue;
            std::vector<std::vector<double>> nb;
            for (VertexId u : g.neighbors(v)) nb.emplace_back(g.feature(u).begin(), g.feature(u).end());
            const auto ref = aggregate(ref_agg, nb, d);
            ++c.vertices;
            bool bad = false;
            for (std::size_t j = 0; j < d; ++j) {
                const double ex = out.row(v)[j] - ref[j];
                c.min_excess = std::min(c.min_excess, ex);
                c.max_excess = std::max(c.max_excess, ex);
                if (ex < -kSandwichSlack || ex > eps + kSandwichSlack) bad = true;
            }
            c.violations += bad;
        }
    }
    if (c.vertices == 0) c.min_excess = c.max_excess = 0.0;
    return c;
}

nlohmann::json to_json(const EmulationCheck& c) {
    return {{"eps", c.eps}, {"graphs", c.graphs}, {"vertices", c.vertices}, {"max_gap", c.max_gap}, {"within", c.within}};
}

EmulationCheck verify_emulation(const Gnn& source, const Gnn& compiled, double eps, std::size_t graphs,
                                std::size_t max_vertices, std::mt19937_64& rng) {
    if (source.input_dim() != compiled.input_dim() || source.output_dim() != compiled.output_dim())
        throw std::invalid_argument("source and compiled networks have different shapes");
    if (max_vertices == 0) throw std::invalid_argument("max_vertices must be positive");
    EmulationCheck c;
    c.eps = eps;
    c.graphs = graphs;
    std::uniform_int_distribution<std::size_t> nv(1, max_vertices);
    std::uniform_real_distribution<double> prob(0.05, 0.6);
    for (std::size_t gi = 0; gi < graphs; ++gi) {
        const FeaturedGraph g = random_featured_graph(rng, nv(rng), source.input_dim(), prob(rng));
        const LayerTrace a = gnn_forward(source, g), b = gnn_forward(compiled, g);
        for (std::size_t i = 0; i < a.back().data.size(); ++i)
            c.max_gap = std::max(c.max_gap, std::abs(a.back().data[i] - b.back().data[i]));
        c.vertices += g.n();
    }
    c.within = c.max_gap <= eps;
    return c;
}

nlohmann::json to_json(const GrowthCheck& c) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : c.rows) rows.push_back({{"k", r.k}, {"output", r.output}, {"bound", r.bound}});
    return {{"holds", c.holds}, {"rows", rows}};
}

GrowthCheck verify_growth(const Gnn& gnn, const std::vector<std::uint64_t>& ks) {
    if (gnn.input_dim() != 1) throw std::invalid_argument("growth check runs on single-value stars (input dim 1)");
    const double bound = growth_bound(gnn);
    GrowthCheck c;
    for (std::uint64_t k : ks) {
        const auto out = target_output(gnn, make_family_quotient({Family::star_sv, k, 1}));
        double m = 0.0;
        for (double v : out) m = std::max(m, std::abs(v));
        c.rows.push_back({k, m, bound});
        if (!(m <= bound)) c.holds = false;
    }
    return c;
}

}  // namespace exprlab
