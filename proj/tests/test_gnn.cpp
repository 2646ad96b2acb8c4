#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exprlab/gnn/aggregation.hpp"
#include "exprlab/gnn/backprop.hpp"
#include "exprlab/gnn/gnn.hpp"
#include "exprlab/graph/families.hpp"
#include "exprlab/graph/quotient.hpp"
#include "exprlab/util/error.hpp"
#include "testutil.hpp"

using namespace exprlab;
using exprlab::tu::Rng;

namespace {

// f(own, agg) = agg for one-dimensional features.
GnnLayer projection_layer(Aggregation agg) {
    std::vector<double> w{0.0, 1.0}, b{0.0};
    return GnnLayer(Fnn::affine(2, 1, w, b), {agg});
}

Gnn identity_gnn(std::size_t dim, Aggregation agg) {
    std::vector<double> w(dim * 2 * dim, 0.0), b(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) w[i * 2 * dim + i] = 1.0;
    return Gnn({GnnLayer(Fnn::affine(2 * dim, dim, w, b), {agg})});
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
    return d;
}

}  // namespace

TEST(Aggregate, Examples) {
    EXPECT_EQ(aggregate(Aggregation::sum(), {{1}, {1}, {1}}, 1)[0], 3.0);
    EXPECT_EQ(aggregate(Aggregation::mean(), {{0}, {1}}, 1)[0], 0.5);
    EXPECT_EQ(aggregate(Aggregation::max(), {{0.2, 5}, {0.7, -1}}, 2), (std::vector<double>{0.7, 5}));
    EXPECT_EQ(aggregate(Aggregation::upa({0, 1}, UpaMode::of_bx), {{2}, {2}, {2}}, 1)[0], 6.0);
    EXPECT_EQ(aggregate(Aggregation::upa({1, 0, 1}, UpaMode::of_x), {{2}, {2}}, 1)[0], 5.0);
}

TEST(Aggregate, EmptyMultisets) {
    EXPECT_EQ(aggregate(Aggregation::sum(), {}, 2), (std::vector<double>{0, 0}));
    EXPECT_THROW(aggregate(Aggregation::mean(), {}, 1), std::invalid_argument);
    EXPECT_THROW(aggregate(Aggregation::max(), {}, 1), std::invalid_argument);
    EXPECT_THROW(aggregate(Aggregation::upa({1}, UpaMode::of_x), {}, 1), std::invalid_argument);
}

TEST(Aggregate, UpaRejectsMixedMultiset) {
    EXPECT_THROW(aggregate(Aggregation::upa({0, 1}, UpaMode::of_x), {{1}, {2}}, 1), std::invalid_argument);
}

TEST(Aggregate, MixedDimensions) {
    EXPECT_THROW(aggregate(Aggregation::sum(), {{1}, {1, 2}}, 1), DimensionError);
}

TEST(Aggregate, OrderInvariant) {
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = tu::uniform_int(rng, 1, 60);
        std::vector<std::vector<double>> vals(n, std::vector<double>(2));
        for (auto& v : vals)
            for (double& x : v) x = tu::uniform(rng, -1e3, 1e3) * std::pow(10.0, tu::uniform(rng, -8, 2));
        for (auto agg : {Aggregation::sum(), Aggregation::mean(), Aggregation::max()}) {
            auto ref = aggregate(agg, vals, 2);
            auto shuffled = vals;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            EXPECT_EQ(aggregate(agg, shuffled, 2), ref);
        }
    }
}

TEST(LayerForward, StarProjection) {
    auto g = make_family({Family::star_sv, 3, 1});
    auto in = input_features(g);
    auto s = layer_forward(projection_layer(Aggregation::sum()), g, in);
    EXPECT_EQ(s.row(0)[0], 3.0);
    for (VertexId v = 1; v <= 3; ++v) EXPECT_EQ(s.row(v)[0], 1.0);
    for (auto agg : {Aggregation::mean(), Aggregation::max()}) {
        auto m = layer_forward(projection_layer(agg), g, in);
        for (VertexId v = 0; v <= 3; ++v) EXPECT_EQ(m.row(v)[0], 1.0);
    }
}

TEST(LayerForward, EmptyNeighbourhoodIsZero) {
    FeaturedGraph g(3, 1, {{0, 1}}, {5.0, 7.0, 9.0}, 0);
    for (auto agg : {Aggregation::sum(), Aggregation::mean(), Aggregation::max(),
                     Aggregation::upa({3, 1}, UpaMode::of_x)}) {
        auto out = layer_forward(projection_layer(agg), g, input_features(g));
        EXPECT_EQ(out.row(2)[0], 0.0) << to_string(agg.kind);
    }
}

TEST(LayerForward, DimensionMismatch) {
    auto g = make_family({Family::star_sv, 3, 1});
    FeatureMap wrong(g.n(), 2);
    EXPECT_THROW(layer_forward(projection_layer(Aggregation::sum()), g, wrong), DimensionError);
    Gnn two = identity_gnn(2, Aggregation::sum());
    EXPECT_THROW(gnn_forward(two, g), DimensionError);
}

TEST(GnnForward, TraceShape) {
    Rng rng(2);
    auto g = tu::random_graph(rng, 8, 1, 0.4);
    Gnn gnn({projection_layer(Aggregation::sum())});
    auto trace = gnn_forward(gnn, g);
    ASSERT_EQ(trace.size(), 2u);
    EXPECT_EQ(trace[0].data, std::vector<double>(g.features().begin(), g.features().end()));
}

TEST(GnnForward, ConstructorChecks) {
    std::vector<double> w{1, 0, 0, 1, 0, 0}, b{0, 0};
    EXPECT_THROW(GnnLayer(Fnn::affine(3, 2, w, b), {Aggregation::sum()}), DimensionError);
    EXPECT_THROW(Gnn({}), std::invalid_argument);
    Gnn a = identity_gnn(2, Aggregation::sum());
    EXPECT_THROW(Gnn({a.layers()[0], projection_layer(Aggregation::sum())}), DimensionError);
}

TEST(GnnForward, MaxGnnBlindToFlagLeafCount) {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        Gnn gnn = tu::random_gnn(rng, AggKind::max, 1, 1, 3, 4, 2);
        auto y1 = gnn_forward(gnn, make_family({Family::star_flag, 1, 1})).back().row(0)[0];
        auto y7 = gnn_forward(gnn, make_family({Family::star_flag, 7, 1})).back().row(0)[0];
        EXPECT_EQ(y1, y7);
    }
}

TEST(GnnForward, IsomorphismInvariance) {
    Rng rng(4);
    for (AggKind kind : {AggKind::sum, AggKind::mean, AggKind::max}) {
        for (int t = 0; t < 30; ++t) {
            auto g = tu::random_graph(rng, tu::uniform_int(rng, 2, 25), 2, 0.25);
            Gnn gnn = tu::random_gnn(rng, kind, 2, 2, 2, 5, 2);
            std::vector<VertexId> perm(g.n());
            std::iota(perm.begin(), perm.end(), 0u);
            std::shuffle(perm.begin(), perm.end(), rng);
            auto h = g.relabeled(perm);
            auto a = gnn_forward(gnn, g).back();
            auto b = gnn_forward(gnn, h).back();
            for (VertexId v = 0; v < g.n(); ++v)
                for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(a.row(v)[j], b.row(perm[v])[j]);
        }
    }
}

TEST(GnnForward, MeanMaxConstantOnHomogeneousStars) {
    Rng rng(5);
    for (AggKind kind : {AggKind::mean, AggKind::max}) {
        for (int t = 0; t < 10; ++t) {
            Gnn gnn = tu::random_gnn(rng, kind, 1, 1, 2, 4, 2);
            const double ref = gnn_forward(gnn, make_family({Family::star_sv, 1, 1})).back().row(0)[0];
            for (std::uint64_t k = 2; k <= 100; ++k) {
                const double y = gnn_forward(gnn, make_family({Family::star_sv, k, 1})).back().row(0)[0];
                EXPECT_NEAR(y, ref, 1e-12);
            }
        }
    }
}

TEST(GnnForward, AutomorphicLeavesAgree) {
    Rng rng(6);
    for (AggKind kind : {AggKind::sum, AggKind::mean, AggKind::max}) {
        Gnn gnn = tu::random_gnn(rng, kind, 1, 2, 3, 4, 2);
        for (Family f : {Family::star_sv, Family::star_uc}) {
            auto trace = gnn_forward(gnn, make_family({f, 9, 4}));
            for (const auto& layer : trace)
                for (VertexId v = 2; v <= 9; ++v)
                    for (std::size_t j = 0; j < layer.dim; ++j) EXPECT_EQ(layer.row(v)[j], layer.row(1)[j]);
        }
    }
}

TEST(Readout, Examples) {
    std::vector<double> w{1.0}, b{0.0};
    Fnn id = Fnn::identity(1);
    // Final map all zeros.
    Gnn zero({GnnLayer(Fnn::affine(2, 1, std::vector<double>{0, 0}, b), {Aggregation::sum()})},
             Readout{ReadoutAgg::sum, id});
    EXPECT_EQ(readout_eval(zero, make_family({Family::star_sv, 4, 1}))[0], 0.0);
    // avg over {1, 3}.
    Gnn keep({GnnLayer(Fnn::affine(2, 1, std::vector<double>{1, 0}, b), {Aggregation::sum()})},
             Readout{ReadoutAgg::avg, id});
    FeaturedGraph pair(2, 1, {{0, 1}}, {1.0, 3.0}, 0);
    EXPECT_EQ(readout_eval(keep, pair)[0], 2.0);
    // Sum readout over the bipartite family with k=2, c=3.
    Gnn keep_sum({keep.layers()[0]}, Readout{ReadoutAgg::sum, id});
    EXPECT_EQ(readout_eval(keep_sum, make_family({Family::bipartite_uc, 2, 3}))[0], 6.0);
    EXPECT_EQ(readout_eval(keep_sum, make_family_quotient({Family::bipartite_uc, 2, 3}))[0], 6.0);
    EXPECT_THROW(readout_eval(identity_gnn(1, Aggregation::sum()), pair), std::invalid_argument);
}

TEST(Quotient, ForwardMatchesFullGraph) {
    Rng rng(7);
    for (AggKind kind : {AggKind::sum, AggKind::mean, AggKind::max}) {
        for (int t = 0; t < 20; ++t) {
            auto g0 = tu::random_graph(rng, 20, 1, 0.2);
            std::vector<double> feats(g0.features().begin(), g0.features().end());
            for (double& f : feats) f = std::floor(f * 2.0) / 2.0;
            FeaturedGraph g(g0.n(), 1, g0.edges(), feats, 0);
            Gnn gnn = tu::random_gnn(rng, kind, 1, 2, 2, 4, 2);
            auto full = gnn_forward(gnn, g).back();
            for (const auto& q : {quotient_of(g), discrete_quotient(g)}) {
                auto part = gnn_forward(gnn, q).back();
                for (std::size_t c = 0; c < q.class_count(); ++c)
                    for (std::size_t j = 0; j < 2; ++j)
                        EXPECT_NEAR(part.row(c)[j], full.row(q.representative[c])[j],
                                    1e-12 * (1 + std::abs(full.row(q.representative[c])[j])));
            }
        }
    }
    for (Family f : {Family::star_uc, Family::tripartite_sv, Family::tripartite_embed, Family::bipartite_uc}) {
        Gnn gnn = tu::random_gnn(rng, AggKind::sum, 1, 1, 2, 3, 2);
        FamilySpec s{f, 3, 2};
        const double full = gnn_forward(gnn, make_family(s)).back().row(0)[0];
        const double part = target_output(gnn, make_family_quotient(s))[0];
        EXPECT_NEAR(part, full, 1e-12 * (1 + std::abs(full)));
    }
}

namespace {

double center_loss(const Gnn& gnn, const FeaturedGraph& g) {
    const double y = gnn_forward(gnn, g).back().row(g.target())[0];
    return 0.5 * y * y;
}

}  // namespace

TEST(Backprop, MatchesFiniteDifferences) {
    Rng rng(8);
    for (AggKind kind : {AggKind::sum, AggKind::mean, AggKind::max}) {
        int checked = 0;
        for (int t = 0; t < 20; ++t) {
            auto g = tu::random_graph(rng, tu::uniform_int(rng, 2, 12), 2, 0.4);
            Gnn gnn = tu::random_gnn(rng, kind, 2, 1, 2, 4, 2);
            auto q = discrete_quotient(g);
            GnnTape tape;
            gnn_forward_taped(gnn, q, tape);
            const double y = tape.trace.back().row(q.target_class)[0];
            FeatureMap adj(q.class_count(), 1);
            adj.row(q.target_class)[0] = y;
            GnnGradients grads(gnn, q);
            gnn_backward(gnn, q, tape, adj, grads);
            const double h = 1e-6;
            for (std::size_t li = 0; li < gnn.depth(); ++li) {
                auto p = gnn.layers()[li].fnn.params();
                for (std::size_t i = 0; i < p.size(); ++i) {
                    auto rebuilt = [&](double delta) {
                        auto pp = p;
                        pp[i] += delta;
                        std::vector<GnnLayer> layers = gnn.layers();
                        layers[li].fnn = layers[li].fnn.with_params(pp);
                        return Gnn(std::move(layers));
                    };
                    const double fd = (center_loss(rebuilt(h), g) - center_loss(rebuilt(-h), g)) / (2 * h);
                    const double an = grads.layer_params[li][i];
                    if (std::abs(fd) <= 1e-8 || std::abs(an) <= 1e-8) continue;
                    if (std::abs(fd - an) / std::abs(fd) > 1e-4) {
                        // Straddling a kink; confirm with a smaller step before failing.
                        const double h2 = 1e-8;
                        const double fd2 = (center_loss(rebuilt(h2), g) - center_loss(rebuilt(-h2), g)) / (2 * h2);
                        EXPECT_LT(std::abs(fd2 - an) / std::abs(an), 1e-3) << to_string(kind);
                    }
                    ++checked;
                }
            }
        }
        EXPECT_GT(checked, 50) << to_string(kind);
    }
}

TEST(Backprop, InputAdjointMatchesFiniteDifferences) {
    Rng rng(9);
    auto g = tu::random_graph(rng, 8, 1, 0.5);
    Gnn gnn = tu::random_gnn(rng, AggKind::mean, 1, 1, 2, 4, 2);
    auto q = discrete_quotient(g);
    GnnTape tape;
    gnn_forward_taped(gnn, q, tape);
    FeatureMap adj(q.class_count(), 1);
    adj.row(q.target_class)[0] = tape.trace.back().row(q.target_class)[0];
    GnnGradients grads(gnn, q);
    gnn_backward(gnn, q, tape, adj, grads);
    const double h = 1e-6;
    for (VertexId v = 0; v < g.n(); ++v) {
        auto shifted = [&](double d) {
            std::vector<double> f(g.features().begin(), g.features().end());
            f[v] += d;
            return FeaturedGraph(g.n(), 1, g.edges(), f, g.target());
        };
        const double fd = (center_loss(gnn, shifted(h)) - center_loss(gnn, shifted(-h))) / (2 * h);
        EXPECT_NEAR(grads.input.row(v)[0], fd, 1e-5 * (1 + std::abs(fd)));
    }
}

TEST(Backprop, UpaRejected) {
    auto g = make_family({Family::star_sv, 2, 1});
    Gnn gnn({projection_layer(Aggregation::upa({0, 1}, UpaMode::of_bx))});
    auto q = discrete_quotient(g);
    GnnTape tape;
    gnn_forward_taped(gnn, q, tape);
    FeatureMap adj(q.class_count(), 1);
    adj.row(0)[0] = 1.0;
    GnnGradients grads(gnn, q);
    EXPECT_THROW(gnn_backward(gnn, q, tape, adj, grads), std::invalid_argument);
}

TEST(GnnJson, RoundTrip) {
    Rng rng(10);
    Gnn a = tu::random_gnn(rng, AggKind::max, 2, 1, 2, 3, 2);
    std::vector<GnnLayer> layers = a.layers();
    layers[0].aggs.push_back(Aggregation::upa({0.5, -1, 2}, UpaMode::of_bx));
    layers[0].fnn = tu::random_fnn(rng, 6, layers[0].out_dim(), 2, 3);
    Gnn b(std::move(layers), Readout{ReadoutAgg::avg, Fnn::identity(1)});
    Gnn c = gnn_from_json(nlohmann::json::parse(to_json(b).dump()));
    EXPECT_EQ(to_json(c).dump(), to_json(b).dump());
    EXPECT_EQ(c.layers()[0].aggs[1], b.layers()[0].aggs[1]);
    EXPECT_THROW(gnn_from_json(nlohmann::json::parse(R"({"layers":[{"fnn":{},"aggs":["median"]}]})")), ParseError);
}
