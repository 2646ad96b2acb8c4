#include "exprlab/gnn/gnn.hpp"

#include <algorithm>
#include <stdexcept>

#include "detail/quotient_aggregate.hpp"
#include "exprlab/util/error.hpp"
#include "exprlab/util/files.hpp"
#include "exprlab/util/parallel.hpp"
#include "exprlab/util/summation.hpp"

namespace exprlab {

GnnLayer::GnnLayer(Fnn f, std::vector<Aggregation> a) : fnn(std::move(f)), aggs(std::move(a)) {
    if (aggs.empty()) throw std::invalid_argument("gnn layer needs at least one aggregation");
    if (fnn.input_dim() % (1 + aggs.size()) != 0)
        throw DimensionError("layer fnn input dimension " + std::to_string(fnn.input_dim()) +
                             " is not a multiple of " + std::to_string(1 + aggs.size()));
}

Gnn::Gnn(std::vector<GnnLayer> layers, std::optional<Readout> readout)
    : layers_(std::move(layers)), readout_(std::move(readout)) {
    if (layers_.empty()) throw std::invalid_argument("gnn needs at least one layer");
    for (std::size_t i = 1; i < layers_.size(); ++i)
        if (layers_[i].in_dim() != layers_[i - 1].out_dim())
            throw DimensionError("layer " + std::to_string(i) + " expects dimension " +
                                 std::to_string(layers_[i].in_dim()) + ", previous layer outputs " +
                                 std::to_string(layers_[i - 1].out_dim()));
    if (readout_ && readout_->fnn.input_dim() != output_dim())
        throw DimensionError("readout fnn input dimension does not match gnn output");
}

std::size_t Gnn::size() const {
    std::size_t s = 0;
    for (const auto& l : layers_) s += l.fnn.node_count();
    return s;
}

std::size_t Gnn::max_layer_input_dim() const {
    std::size_t d = 0;
    for (const auto& l : layers_) d = std::max(d, l.in_dim());
    return d;
}

bool Gnn::uses_only(AggKind kind) const {
    return std::all_of(layers_.begin(), layers_.end(), [&](const GnnLayer& l) {
        return l.aggs.size() == 1 && l.aggs[0].kind == kind;
    });
}

FeatureMap input_features(const FeaturedGraph& g) {
    FeatureMap m(g.n(), g.dim());
    auto f = g.features();
    std::copy(f.begin(), f.end(), m.data.begin());
    return m;
}

FeatureMap layer_forward(const GnnLayer& layer, const FeaturedGraph& g, const FeatureMap& feats) {
    const std::size_t p = layer.in_dim();
    if (feats.dim != p || feats.n != g.n())
        throw DimensionError("layer expects " + std::to_string(p) + "-dimensional features, got " +
                             std::to_string(feats.dim));
    FeatureMap out(g.n(), layer.out_dim());
    parallel_for(g.n(), [&](std::size_t v) {
        std::vector<double> in(layer.fnn.input_dim());
        auto own = feats.row(v);
        std::copy(own.begin(), own.end(), in.begin());
        std::vector<const double*> rows;
        for (VertexId w : g.neighbors(static_cast<VertexId>(v))) rows.push_back(feats.row(w).data());
        for (std::size_t a = 0; a < layer.aggs.size(); ++a)
            aggregate_rows(layer.aggs[a], rows, p, std::span<double>(in).subspan((a + 1) * p, p));
        layer.fnn.eval(in, out.row(v));
    });
    return out;
}

LayerTrace gnn_forward(const Gnn& gnn, const FeaturedGraph& g) {
    if (g.dim() != gnn.input_dim())
        throw DimensionError("graph features have dimension " + std::to_string(g.dim()) +
                             ", gnn expects " + std::to_string(gnn.input_dim()));
    LayerTrace trace;
    trace.reserve(gnn.depth() + 1);
    trace.push_back(input_features(g));
    for (const auto& layer : gnn.layers()) trace.push_back(layer_forward(layer, g, trace.back()));
    return trace;
}

namespace {

std::vector<double> apply_readout(const Readout& r, std::span<const double> pooled) {
    return r.fnn.eval(pooled);
}

const Readout& require_readout(const Gnn& gnn) {
    if (!gnn.readout()) throw std::invalid_argument("gnn has no readout");
    return *gnn.readout();
}

}  // namespace

std::vector<double> readout_eval(const Gnn& gnn, const FeaturedGraph& g) {
    const Readout& r = require_readout(gnn);
    const LayerTrace trace = gnn_forward(gnn, g);
    const FeatureMap& last = trace.back();
    std::vector<double> pooled(last.dim), col(last.n);
    for (std::size_t j = 0; j < last.dim; ++j) {
        for (std::size_t v = 0; v < last.n; ++v) col[v] = last.row(v)[j];
        pooled[j] = canonical_sum(col);
        if (r.agg == ReadoutAgg::avg) pooled[j] /= static_cast<double>(last.n);
    }
    return apply_readout(r, pooled);
}

namespace detail {

void quotient_aggregate(const Aggregation& agg, const QuotientGraph& q, const FeatureMap& feats,
                        std::size_t cls, std::span<double> out, std::vector<std::uint32_t>* argmax) {
    const std::size_t p = feats.dim;
    const auto& links = q.nbrs[cls];
    std::vector<const QuotientGraph::Link*> live;
    for (const auto& l : links)
        if (l.count > 0) live.push_back(&l);
    if (argmax) argmax->assign(p, 0);
    if (live.empty()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double deg = static_cast<double>(q.degree(cls));
    bool homogeneous = true;
    for (const auto* l : live)
        if (!std::equal(feats.row(l->cls).begin(), feats.row(l->cls).end(), feats.row(live[0]->cls).begin()))
            homogeneous = false;
    if (agg.kind == AggKind::upa) {
        if (!homogeneous)
            throw std::invalid_argument("upa aggregation applied to a non-homogeneous multiset");
        for (std::size_t j = 0; j < p; ++j) {
            const double x = feats.row(live[0]->cls)[j];
            out[j] = eval_polynomial(agg.upa_coeffs, agg.upa_mode == UpaMode::of_x ? x : deg * x);
        }
        return;
    }
    std::vector<double> terms(live.size());
    for (std::size_t j = 0; j < p; ++j) {
        switch (agg.kind) {
            case AggKind::sum:
            case AggKind::mean: {
                double first = feats.row(live[0]->cls)[j];
                bool same = true;
                for (std::size_t i = 0; i < live.size(); ++i) {
                    const double x = feats.row(live[i]->cls)[j];
                    same = same && x == first;
                    terms[i] = static_cast<double>(live[i]->count) * x;
                }
                if (agg.kind == AggKind::mean && same)
                    out[j] = first;
                else {
                    out[j] = canonical_sum(terms);
                    if (agg.kind == AggKind::mean) out[j] /= deg;
                }
                break;
            }
            case AggKind::max: {
                std::uint32_t best = live[0]->cls;
                double v = feats.row(best)[j];
                for (const auto* l : live) {
                    const double x = feats.row(l->cls)[j];
                    if (x > v || (x == v && q.representative[l->cls] < q.representative[best])) {
                        v = x;
                        best = l->cls;
                    }
                }
                out[j] = v;
                if (argmax) (*argmax)[j] = best;
                break;
            }
            case AggKind::upa:
                break;
        }
    }
}

}  // namespace detail

LayerTrace gnn_forward(const Gnn& gnn, const QuotientGraph& q) {
    if (q.dim != gnn.input_dim()) throw DimensionError("quotient features do not match gnn input");
    LayerTrace trace;
    FeatureMap in(q.class_count(), q.dim);
    std::copy(q.features.begin(), q.features.end(), in.data.begin());
    trace.push_back(std::move(in));
    for (const auto& layer : gnn.layers()) {
        const FeatureMap& prev = trace.back();
        const std::size_t p = layer.in_dim();
        FeatureMap out(q.class_count(), layer.out_dim());
        parallel_for(q.class_count(), [&](std::size_t c) {
            std::vector<double> buf(layer.fnn.input_dim());
            auto own = prev.row(c);
            std::copy(own.begin(), own.end(), buf.begin());
            for (std::size_t a = 0; a < layer.aggs.size(); ++a)
                detail::quotient_aggregate(layer.aggs[a], q, prev, c,
                                           std::span<double>(buf).subspan((a + 1) * p, p), nullptr);
            layer.fnn.eval(buf, out.row(c));
        });
        trace.push_back(std::move(out));
    }
    return trace;
}

std::vector<double> target_output(const Gnn& gnn, const QuotientGraph& q) {
    const LayerTrace trace = gnn_forward(gnn, q);
    auto row = trace.back().row(q.target_class);
    return {row.begin(), row.end()};
}

std::vector<double> readout_eval(const Gnn& gnn, const QuotientGraph& q) {
    const Readout& r = require_readout(gnn);
    const LayerTrace trace = gnn_forward(gnn, q);
    const FeatureMap& last = trace.back();
    std::vector<double> pooled(last.dim), col(last.n);
    double total = 0.0;
    for (auto s : q.class_size) total += static_cast<double>(s);
    for (std::size_t j = 0; j < last.dim; ++j) {
        for (std::size_t c = 0; c < last.n; ++c)
            col[c] = static_cast<double>(q.class_size[c]) * last.row(c)[j];
        pooled[j] = canonical_sum(col);
        if (r.agg == ReadoutAgg::avg) pooled[j] /= total;
    }
    return apply_readout(r, pooled);
}

nlohmann::json to_json(const Gnn& gnn) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : gnn.layers()) {
        nlohmann::json aggs = nlohmann::json::array();
        for (const auto& a : l.aggs) aggs.push_back(to_json(a));
        layers.push_back({{"fnn", to_json(l.fnn)}, {"aggs", std::move(aggs)}});
    }
    nlohmann::json j = {{"layers", std::move(layers)}};
    if (gnn.readout())
        j["readout"] = {{"agg", gnn.readout()->agg == ReadoutAgg::sum ? "sum" : "avg"},
                        {"fnn", to_json(gnn.readout()->fnn)}};
    return j;
}

Gnn gnn_from_json(const nlohmann::json& j) {
    try {
        std::vector<GnnLayer> layers;
        const auto& jl = j.at("layers");
        for (std::size_t i = 0; i < jl.size(); ++i) {
            std::vector<Aggregation> aggs;
            for (const auto& a : jl[i].at("aggs")) aggs.push_back(aggregation_from_json(a));
            layers.emplace_back(fnn_from_json(jl[i].at("fnn")), std::move(aggs));
        }
        std::optional<Readout> readout;
        if (j.contains("readout") && !j.at("readout").is_null()) {
            const auto& r = j.at("readout");
            const auto agg = r.at("agg").get<std::string>();
            if (agg != "sum" && agg != "avg") throw ParseError("unknown readout aggregation '" + agg + "'");
            readout = Readout{agg == "sum" ? ReadoutAgg::sum : ReadoutAgg::avg, fnn_from_json(r.at("fnn"))};
        }
        return Gnn(std::move(layers), std::move(readout));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("gnn: ") + e.what());
    } catch (const DimensionError& e) {
        throw ParseError(std::string("gnn: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("gnn: ") + e.what());
    }
}

void write_gnn(const std::filesystem::path& path, const Gnn& gnn) {
    write_file_atomic(path, to_json(gnn).dump() + "\n");
}

Gnn read_gnn(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return gnn_from_json(j);
}

}  // namespace exprlab
