#include "exprlab/gnn/backprop.hpp"

#include <algorithm>
#include <stdexcept>

#include "detail/quotient_aggregate.hpp"
#include "exprlab/util/error.hpp"

namespace exprlab {

GnnGradients::GnnGradients(const Gnn& gnn, const QuotientGraph& q)
    : input(q.class_count(), gnn.input_dim()) {
    for (const auto& l : gnn.layers()) layer_params.emplace_back(l.fnn.param_count(), 0.0);
}

void GnnGradients::clear() {
    for (auto& p : layer_params) std::fill(p.begin(), p.end(), 0.0);
    std::fill(input.data.begin(), input.data.end(), 0.0);
}

void gnn_forward_taped(const Gnn& gnn, const QuotientGraph& q, GnnTape& tape) {
    if (q.dim != gnn.input_dim()) throw DimensionError("quotient features do not match gnn input");
    const std::size_t nc = q.class_count();
    tape.trace.assign(1, FeatureMap(nc, q.dim));
    std::copy(q.features.begin(), q.features.end(), tape.trace[0].data.begin());
    tape.fnn_tapes.assign(gnn.depth(), std::vector<FnnTape>(nc));
    tape.argmax.assign(gnn.depth(), std::vector<std::vector<std::uint32_t>>(nc));
    std::vector<std::uint32_t> am;
    for (std::size_t i = 0; i < gnn.depth(); ++i) {
        const GnnLayer& layer = gnn.layers()[i];
        const FeatureMap& prev = tape.trace.back();
        const std::size_t p = layer.in_dim();
        const std::size_t r = layer.aggs.size();
        FeatureMap out(nc, layer.out_dim());
        std::vector<double> buf(layer.fnn.input_dim());
        for (std::size_t c = 0; c < nc; ++c) {
            auto own = prev.row(c);
            std::copy(own.begin(), own.end(), buf.begin());
            auto& winners = tape.argmax[i][c];
            winners.assign(r * p, 0);
            for (std::size_t a = 0; a < r; ++a) {
                detail::quotient_aggregate(layer.aggs[a], q, prev, c,
                                           std::span<double>(buf).subspan((a + 1) * p, p), &am);
                std::copy(am.begin(), am.end(), winners.begin() + static_cast<std::ptrdiff_t>(a * p));
            }
            FnnTape& ft = tape.fnn_tapes[i][c];
            layer.fnn.forward(buf, ft);
            std::copy(ft.post.back().begin(), ft.post.back().end(), out.row(c).begin());
        }
        tape.trace.push_back(std::move(out));
    }
}

void gnn_backward(const Gnn& gnn, const QuotientGraph& q, const GnnTape& tape,
                  const FeatureMap& output_adjoint, GnnGradients& grads) {
    const std::size_t nc = q.class_count();
    if (output_adjoint.n != nc || output_adjoint.dim != gnn.output_dim())
        throw DimensionError("output adjoint has wrong shape");
    FeatureMap adj = output_adjoint;
    std::vector<double> din;
    for (std::size_t i = gnn.depth(); i-- > 0;) {
        const GnnLayer& layer = gnn.layers()[i];
        const std::size_t p = layer.in_dim();
        FeatureMap prev_adj(nc, p);
        din.assign(layer.fnn.input_dim(), 0.0);
        for (std::size_t c = 0; c < nc; ++c) {
            auto up = adj.row(c);
            if (std::all_of(up.begin(), up.end(), [](double v) { return v == 0.0; })) continue;
            layer.fnn.backward(tape.fnn_tapes[i][c], up, din, grads.layer_params[i]);
            auto own = prev_adj.row(c);
            for (std::size_t j = 0; j < p; ++j) own[j] += din[j];
            const double deg = static_cast<double>(q.degree(c));
            for (std::size_t a = 0; a < layer.aggs.size(); ++a) {
                const double* g = din.data() + (a + 1) * p;
                switch (layer.aggs[a].kind) {
                    case AggKind::sum:
                    case AggKind::mean:
                        for (const auto& l : q.nbrs[c]) {
                            if (l.count == 0) continue;
                            double scale = static_cast<double>(l.count);
                            if (layer.aggs[a].kind == AggKind::mean) scale /= deg;
                            auto dst = prev_adj.row(l.cls);
                            for (std::size_t j = 0; j < p; ++j) dst[j] += scale * g[j];
                        }
                        break;
                    case AggKind::max:
                        if (q.degree(c) == 0) break;
                        for (std::size_t j = 0; j < p; ++j)
                            prev_adj.row(tape.argmax[i][c][a * p + j])[j] += g[j];
                        break;
                    case AggKind::upa:
                        throw std::invalid_argument("backpropagation through upa aggregations is not supported");
                }
            }
        }
        adj = std::move(prev_adj);
    }
    for (std::size_t k = 0; k < adj.data.size(); ++k) grads.input.data[k] += adj.data[k];
}

}  // namespace exprlab
