#include "exprlab/analysis/pieces.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "detail/symbolic_family.hpp"

namespace exprlab {

nlohmann::json to_json(const PieceReport& r) {
    return {{"bound", r.bound},       {"detected_pieces", r.detected_pieces}, {"max_degree_used", r.max_degree_used},
            {"k_lo", r.k_lo},         {"k_hi", r.k_hi}};
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

std::uint64_t sat_pow(std::uint64_t base, std::size_t e) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r = sat_mul(r, base);
    return r;
}

std::size_t upa_degree(const Aggregation& agg) {
    std::size_t n = agg.upa_coeffs.size();
    while (n > 0 && agg.upa_coeffs[n - 1] == 0.0) --n;
    return n == 0 ? 0 : n - 1;
}

}  // namespace

std::uint64_t piece_bound(const Gnn& gnn) {
    std::size_t d = 0, l = 0;
    for (const auto& layer : gnn.layers()) {
        d = std::max(d, layer.fnn.max_in_degree());
        l = std::max(l, layer.fnn.depth());
    }
    return sat_pow(sat_pow(d + 1, l), gnn.depth());
}

std::size_t piece_degree_bound(const Gnn& gnn, Family family) {
    const auto classes = detail::symbolic_family(family);
    for (const auto& cls : classes)
        if (cls.nbrs.size() != 1)
            throw std::invalid_argument(std::string("piece analysis needs one neighbour class per class; ") +
                                        to_string(family) + " has more");
    std::vector<std::size_t> deg(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) deg[i] = classes[i].feature.k_degree();

    for (const auto& layer : gnn.layers()) {
        std::vector<std::size_t> next(classes.size());
        for (std::size_t i = 0; i < classes.size(); ++i) {
            const auto [d, cnt] = classes[i].nbrs.front();
            std::size_t out = deg[i];
            for (const auto& agg : layer.aggs) {
                std::size_t slot = deg[d];
                switch (agg.kind) {
                    case AggKind::sum: slot = deg[d] + cnt.first; break;
                    case AggKind::mean:
                    case AggKind::max: break;
                    case AggKind::upa:
                        slot = upa_degree(agg) *
                               (agg.upa_mode == UpaMode::of_bx ? deg[d] + cnt.first : deg[d]);
                        break;
                }
                out = std::max(out, slot);
            }
            next[i] = out;
        }
        deg = std::move(next);
    }
    return deg[0];
}

PieceReport detect_pieces(const std::map<std::int64_t, double>& samples, std::size_t max_degree, double rel_tol) {
    if (samples.empty()) throw std::invalid_argument("detect_pieces: no samples");
    const std::int64_t lo = samples.begin()->first, hi = samples.rbegin()->first;
    if (static_cast<std::uint64_t>(hi - lo) + 1 != samples.size())
        throw std::invalid_argument("detect_pieces: samples must cover consecutive integers");
    if (static_cast<std::uint64_t>(hi - lo) < 2 * (max_degree + 2))
        throw std::invalid_argument("detect_pieces: need k_hi - k_lo >= 2(max_degree + 2)");

    std::vector<double> f;
    f.reserve(samples.size());
    for (const auto& [k, v] : samples) f.push_back(v);

    // Signed binomial weights of the (D+1)-th forward difference.
    const std::size_t w = max_degree + 2;
    std::vector<double> binom(w, 1.0);
    for (std::size_t i = 1; i < w; ++i) binom[i] = binom[i - 1] * double(w - i) / double(i);

    PieceReport r;
    r.k_lo = lo;
    r.k_hi = hi;
    r.max_degree_used = max_degree;
    r.detected_pieces = 1;
    std::size_t start = 0;
    for (std::size_t t = 0; t < f.size(); ++t) {
        if (t < start + w - 1) continue;
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
            const double term = binom[i] * f[t + 1 - w + i];
            diff += ((w - 1 - i) % 2 == 0) ? term : -term;
            scale += std::abs(term);
        }
        if (std::abs(diff) > rel_tol * scale) {
            ++r.detected_pieces;
            start = t;
        }
    }
    return r;
}

PieceReport analyze_pieces(const Gnn& gnn, Family family, std::int64_t k_lo, std::int64_t k_hi, std::uint64_t c) {
    if (k_lo < 1 || k_hi < k_lo) throw std::invalid_argument("analyze_pieces: need 1 <= k_lo <= k_hi");
    std::map<std::int64_t, double> samples;
    for (std::int64_t k = k_lo; k <= k_hi; ++k)
        samples[k] = target_output(gnn, make_family_quotient({family, std::uint64_t(k), c})).at(0);
    PieceReport r = detect_pieces(samples, piece_degree_bound(gnn, family));
    r.bound = piece_bound(gnn);
    return r;
}

}  // namespace exprlab
