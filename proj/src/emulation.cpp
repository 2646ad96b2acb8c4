#include "exprlab/constructions/emulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exprlab/constructions/gadgets.hpp"
#include "exprlab/util/error.hpp"

namespace exprlab {

nlohmann::json to_json(const EmulationReport& r) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& layer : r.ranges) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& iv : layer) row.push_back({iv.lo, iv.hi});
        ranges.push_back(std::move(row));
    }
    return {{"eps", r.eps},
            {"eps_hat", r.eps_hat},
            {"a", r.a},
            {"d", r.d},
            {"m", r.m},
            {"size_built", r.size_built},
            {"source_size", r.source_size},
            {"gadget_units", r.gadget_units},
            {"ranges", std::move(ranges)},
            {"resolutions", r.resolutions}};
}

double emulation_tolerance(double eps, double a, std::size_t d, std::size_t m) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (m == 0) throw std::invalid_argument("source depth must be positive");
    const double ad = a * static_cast<double>(d);
    if (ad == 0.0) return eps;
    const double r = 2.0 * ad;
    if (r == 1.0) return eps / (static_cast<double>(m) * ad);
    return eps * (1.0 - r) / (ad * (1.0 - std::pow(r, static_cast<double>(m))));
}

namespace {

enum class Source { mean, max };

Source source_kind(const Gnn& g) {
    if (g.uses_only(AggKind::mean)) return Source::mean;
    if (g.uses_only(AggKind::max)) return Source::max;
    throw std::invalid_argument("source must use a single mean or a single max aggregation in every layer");
}

std::vector<Interval> propagate(const Fnn& fnn, std::vector<Interval> box) {
    for (const auto& l : fnn.sparse_layers()) {
        std::vector<Interval> next(l.out_dim);
        for (std::size_t r = 0; r < l.out_dim; ++r) {
            double lo = l.bias[r], hi = l.bias[r];
            for (std::uint32_t e = l.row_ptr[r]; e < l.row_ptr[r + 1]; ++e) {
                const double w = l.val[e];
                const Interval& x = box[l.col[e]];
                lo += w > 0.0 ? w * x.lo : w * x.hi;
                hi += w > 0.0 ? w * x.hi : w * x.lo;
            }
            if (l.act == Activation::relu) {
                lo = std::max(lo, 0.0);
                hi = std::max(hi, 0.0);
            }
            next[r] = {lo, hi};
        }
        box = std::move(next);
    }
    return box;
}

// Source layer FNN with the gadget front end prepended.
Fnn splice(std::vector<SparseLayer> front, const Fnn& source) {
    for (const auto& l : source.sparse_layers()) front.push_back(l);
    const std::size_t in_dim = front.front().in_dim;
    return Fnn(in_dim, std::move(front));
}

struct LayerPlan {
    std::size_t p = 0;
    std::vector<Interval> range;
    std::vector<std::size_t> q;
};

// Odd layer for mean sources: [h | sum h] -> [h, 1, normalized h].
GnnLayer mean_front(const LayerPlan& plan) {
    const std::size_t p = plan.p;
    SparseLayer l(2 * p, 2 * p + 1, Activation::identity);
    for (std::size_t c = 0; c < p; ++c) {
        l.add(static_cast<std::uint32_t>(c), 1.0);
        l.end_row();
    }
    l.end_row();
    l.bias[p] = 1.0;
    for (std::size_t c = 0; c < p; ++c) {
        const double R = plan.range[c].hi - plan.range[c].lo;
        l.add(static_cast<std::uint32_t>(c), 1.0 / R);
        l.end_row();
        l.bias[p + 1 + c] = -plan.range[c].lo / R;
    }
    return GnnLayer(Fnn(2 * p, std::vector<SparseLayer>{std::move(l)}), {Aggregation::sum()});
}

// Passthrough units for own h and the neighbour-count indicator, shared by
// both even layers. Returns the hidden row index of the first indicator unit.
std::size_t add_shared_units(SparseLayer& h, std::size_t p, std::size_t n_col) {
    for (std::size_t c = 0; c < p; ++c) {
        h.add(static_cast<std::uint32_t>(c), 1.0);
        h.end_row();
        h.add(static_cast<std::uint32_t>(c), -1.0);
        h.end_row();
    }
    const std::size_t first = 2 * p;
    h.add(static_cast<std::uint32_t>(n_col), 1.0);
    h.end_row();
    h.add(static_cast<std::uint32_t>(n_col), 1.0);
    h.end_row();
    h.bias[first + 1] = -1.0;
    return first;
}

// Combine rows: own h from the passthrough pair, then per coordinate
// lo * [n >= 1] + R * (gadget units . coeffs).
SparseLayer combine(const LayerPlan& plan, std::size_t hidden, std::size_t ind,
                    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& gadget_rows) {
    const std::size_t p = plan.p;
    SparseLayer o(hidden, 2 * p, Activation::identity);
    for (std::size_t c = 0; c < p; ++c) {
        o.add(static_cast<std::uint32_t>(2 * c), 1.0);
        o.add(static_cast<std::uint32_t>(2 * c + 1), -1.0);
        o.end_row();
    }
    for (std::size_t c = 0; c < p; ++c) {
        const double lo = plan.range[c].lo, R = plan.range[c].hi - plan.range[c].lo;
        if (lo != 0.0) {
            o.add(static_cast<std::uint32_t>(ind), lo);
            o.add(static_cast<std::uint32_t>(ind + 1), -lo);
        }
        for (const auto& [col, coeff] : gadget_rows[c]) o.add(col, R * coeff);
        o.end_row();
    }
    return o;
}

// Even layer for mean sources. Input: own [h, 1, u] and aggregated
// [sum h, n, sum u] where u is h normalized to [0,1].
GnnLayer mean_back(const LayerPlan& plan, const Fnn& source, std::size_t& units) {
    const std::size_t p = plan.p, width = 2 * p + 1, in = 2 * width;
    const std::size_t n_col = width + p;
    std::size_t hidden = 2 * p + 2;
    for (auto q : plan.q) hidden += 4 * (q + 1);
    SparseLayer h(in, hidden, Activation::relu);
    const std::size_t ind = add_shared_units(h, p, n_col);
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(p);
    std::size_t row = 2 * p + 2;
    for (std::size_t c = 0; c < p; ++c) {
        const auto s_col = static_cast<std::uint32_t>(n_col + 1 + c);
        const double q = static_cast<double>(plan.q[c]);
        for (std::size_t i = 1; i <= plan.q[c] + 1; ++i) {
            const double si = static_cast<double>(i);
            // z = (s n - S)/a with s = i/q, a = 1/q.
            const double slopes[4] = {si, si, si - 1.0, si - 1.0};
            const double biases[4] = {0.0, -1.0, -1.0, 0.0};
            const double signs[4] = {1.0, -1.0, 1.0, -1.0};
            for (int u = 0; u < 4; ++u, ++row) {
                h.add(static_cast<std::uint32_t>(n_col), slopes[u]);
                h.add(s_col, -q);
                h.end_row();
                h.bias[row] = biases[u];
                rows[c].emplace_back(static_cast<std::uint32_t>(row), signs[u] * si / q);
            }
        }
    }
    units += hidden;
    SparseLayer o = combine(plan, hidden, ind, rows);
    return GnnLayer(splice({std::move(h), std::move(o)}, source), {Aggregation::sum()});
}

// Odd layer for max sources: [h | sum h] -> [h, 1, buckets of normalized h].
GnnLayer max_front(const LayerPlan& plan, std::size_t& units) {
    const std::size_t p = plan.p;
    std::size_t buckets = 0;
    for (auto q : plan.q) buckets += q;
    SparseLayer h(2 * p, 2 * p + 2 * buckets, Activation::relu);
    for (std::size_t c = 0; c < p; ++c) {
        h.add(static_cast<std::uint32_t>(c), 1.0);
        h.end_row();
        h.add(static_cast<std::uint32_t>(c), -1.0);
        h.end_row();
    }
    std::size_t row = 2 * p;
    for (std::size_t c = 0; c < p; ++c) {
        const double lo = plan.range[c].lo, R = plan.range[c].hi - plan.range[c].lo;
        const double q = static_cast<double>(plan.q[c]);
        for (std::size_t i = 0; i < plan.q[c]; ++i) {
            for (std::size_t edge : {i, i + 1}) {
                h.add(static_cast<std::uint32_t>(c), 1.0 / R);
                h.end_row();
                h.bias[row++] = -lo / R - static_cast<double>(edge) / q;
            }
        }
    }
    units += h.out_dim;
    SparseLayer o(h.out_dim, p + 1 + buckets, Activation::identity);
    for (std::size_t c = 0; c < p; ++c) {
        o.add(static_cast<std::uint32_t>(2 * c), 1.0);
        o.add(static_cast<std::uint32_t>(2 * c + 1), -1.0);
        o.end_row();
    }
    o.end_row();
    o.bias[p] = 1.0;
    for (std::size_t b = 0; b < buckets; ++b) {
        o.add(static_cast<std::uint32_t>(2 * p + 2 * b), 1.0);
        o.add(static_cast<std::uint32_t>(2 * p + 2 * b + 1), -1.0);
        o.end_row();
    }
    return GnnLayer(Fnn(2 * p, std::vector<SparseLayer>{std::move(h), std::move(o)}), {Aggregation::sum()});
}

// Even layer for max sources: caps each summed bucket at its width.
GnnLayer max_back(const LayerPlan& plan, const Fnn& source, std::size_t& units) {
    const std::size_t p = plan.p;
    std::size_t buckets = 0;
    for (auto q : plan.q) buckets += q;
    const std::size_t width = p + 1 + buckets, in = 2 * width;
    const std::size_t n_col = width + p, y0 = width + p + 1;
    const std::size_t hidden = 2 * p + 2 + 2 * buckets;
    SparseLayer h(in, hidden, Activation::relu);
    const std::size_t ind = add_shared_units(h, p, n_col);
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(p);
    std::size_t row = 2 * p + 2, b = 0;
    for (std::size_t c = 0; c < p; ++c) {
        const double a = 1.0 / static_cast<double>(plan.q[c]);
        for (std::size_t i = 0; i < plan.q[c]; ++i, ++b) {
            h.add(static_cast<std::uint32_t>(y0 + b), 1.0);
            h.end_row();
            rows[c].emplace_back(static_cast<std::uint32_t>(row++), 1.0);
            h.add(static_cast<std::uint32_t>(y0 + b), 1.0);
            h.end_row();
            h.bias[row] = -a;
            rows[c].emplace_back(static_cast<std::uint32_t>(row++), -1.0);
        }
    }
    units += hidden;
    SparseLayer o = combine(plan, hidden, ind, rows);
    return GnnLayer(splice({std::move(h), std::move(o)}, source), {Aggregation::sum()});
}

}  // namespace

std::vector<std::vector<Interval>> layer_bounds(const Gnn& source) {
    std::vector<std::vector<Interval>> out;
    out.emplace_back(source.input_dim(), Interval{0.0, 1.0});
    for (const auto& layer : source.layers()) {
        for (const auto& agg : layer.aggs)
            if (agg.kind != AggKind::mean && agg.kind != AggKind::max)
                throw std::invalid_argument("interval bounds need mean or max aggregations");
        const auto& box = out.back();
        std::vector<Interval> in = box;
        for (std::size_t a = 0; a < layer.aggs.size(); ++a)
            for (const auto& iv : box) in.push_back({std::min(iv.lo, 0.0), std::max(iv.hi, 0.0)});
        out.push_back(propagate(layer.fnn, std::move(in)));
    }
    return out;
}

std::pair<Gnn, EmulationReport> compile_to_sum(const Gnn& source, double eps, const CompileOptions& opts) {
    const Source kind = source_kind(source);
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
    EmulationReport rep;
    rep.eps = eps;
    rep.m = source.depth();
    rep.d = source.max_layer_input_dim();
    for (const auto& l : source.layers()) rep.a = std::max(rep.a, lipschitz_upper(l.fnn));
    rep.source_size = source.size();
    rep.eps_hat = emulation_tolerance(eps, rep.a, rep.d, rep.m);
    if (!(rep.eps_hat > 0.0) || !std::isfinite(rep.eps_hat))
        throw InfeasibleError("per-gadget tolerance underflows (a=" + std::to_string(rep.a) +
                              ", d=" + std::to_string(rep.d) + ", m=" + std::to_string(rep.m) + ")");

    const auto bounds = layer_bounds(source);
    std::vector<LayerPlan> plans(rep.m);
    double budget = 0.0;
    for (std::size_t j = 0; j < rep.m; ++j) {
        LayerPlan& plan = plans[j];
        plan.p = source.layers()[j].in_dim();
        // Emulated inputs of later layers lie within eps of the source values.
        const double pad = j == 0 ? 0.0 : eps;
        for (std::size_t c = 0; c < plan.p; ++c) {
            Interval iv{bounds[j][c].lo - pad, bounds[j][c].hi + pad};
            if (!(iv.hi > iv.lo)) iv.hi = iv.lo + 1.0;
            const double ratio = (iv.hi - iv.lo) / rep.eps_hat;
            budget += ratio;
            if (budget > static_cast<double>(opts.max_gadget_units))
                throw InfeasibleError("gadgets would need more than " + std::to_string(opts.max_gadget_units) +
                                      " units (eps_hat=" + std::to_string(rep.eps_hat) + ")");
            plan.range.push_back(iv);
            plan.q.push_back(resolution_for(rep.eps_hat / (iv.hi - iv.lo)));
        }
        rep.ranges.push_back(plan.range);
        rep.resolutions.push_back(plan.q);
    }

    std::vector<GnnLayer> layers;
    for (std::size_t j = 0; j < rep.m; ++j) {
        const Fnn& f = source.layers()[j].fnn;
        if (kind == Source::mean) {
            layers.push_back(mean_front(plans[j]));
            layers.push_back(mean_back(plans[j], f, rep.gadget_units));
        } else {
            layers.push_back(max_front(plans[j], rep.gadget_units));
            layers.push_back(max_back(plans[j], f, rep.gadget_units));
        }
        if (rep.gadget_units > 4 * opts.max_gadget_units)
            throw InfeasibleError("gadget layers exceed the unit cap");
    }
    Gnn out(std::move(layers));
    rep.size_built = out.size();
    return {std::move(out), std::move(rep)};
}

double growth_bound(const Gnn& gnn) {
    if (!gnn.uses_only(AggKind::mean) && !gnn.uses_only(AggKind::max))
        throw std::invalid_argument("growth bound needs a Mean-GNN or a Max-GNN");
    double a = 0.0;
    for (const auto& l : gnn.layers()) a = std::max(a, lipschitz_upper(l.fnn));
    const double d = static_cast<double>(gnn.max_layer_input_dim());
    return std::pow(2.0 * d * a, static_cast<double>(gnn.depth()));
}

}  // namespace exprlab
