#include "exprlab/analysis/describe.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "detail/symbolic_family.hpp"
#include "exprlab/util/error.hpp"

namespace exprlab {

namespace detail {

std::vector<SymClass> symbolic_family(Family f) {
    const Poly2 zero, one = Poly2::constant(1.0), c = Poly2::monomial(0, 1);
    switch (f) {
        case Family::star_sv:
            return {{{0, 0}, one, {{1, {1, 0}}}}, {{1, 0}, one, {{0, {0, 0}}}}};
        case Family::star_uc:
            return {{{0, 0}, zero, {{1, {1, 0}}}}, {{1, 0}, c, {{0, {0, 0}}}}};
        case Family::bipartite_uc:
            return {{{2, 0}, zero, {{1, {1, 0}}}}, {{1, 0}, c, {{0, {2, 0}}}}};
        case Family::tripartite_sv:
            return {{{0, 0}, one, {{1, {1, 0}}}},
                    {{1, 0}, one, {{0, {0, 0}}, {2, {0, 1}}}},
                    {{0, 1}, one, {{1, {1, 0}}}}};
        case Family::tripartite_embed:
            return {{{2, 0}, zero, {{1, {3, 0}}}},
                    {{3, 0}, zero, {{0, {2, 0}}, {2, {1, 1}}}},
                    {{1, 1}, one, {{1, {3, 0}}}}};
        default:
            throw std::invalid_argument(std::string("describe: unsupported family ") + to_string(f));
    }
}

}  // namespace detail

namespace {

using detail::SymClass;
using detail::symbolic_family;

using Branch = std::vector<Poly2>;
using Key = Poly2::Key;

// Deduplicates branches whose coefficients agree after rounding to tol.
class BranchSet {
public:
    BranchSet(double tol, std::size_t cap) : tol_(tol), cap_(cap) {}

    void insert(Branch b) {
        std::vector<double> key;
        for (const auto& p : b) {
            key.push_back(static_cast<double>(p.terms().size()));
            for (const auto& [k, v] : p.terms()) {
                key.push_back(k.first);
                key.push_back(k.second);
                key.push_back(std::round(v / tol_));
            }
        }
        if (!seen_.emplace(std::move(key), items_.size()).second) return;
        items_.push_back(std::move(b));
        if (items_.size() > cap_)
            throw CapExceededError("describe: describing set exceeded cap of " + std::to_string(cap_));
    }

    std::vector<Branch> take() { return std::move(items_); }

private:
    double tol_;
    std::size_t cap_;
    std::map<std::vector<double>, std::size_t> seen_;
    std::vector<Branch> items_;
};

Branch affine(const DenseLayer& l, const Branch& x) {
    Branch y(l.out_dim);
    for (std::size_t r = 0; r < l.out_dim; ++r) {
        Poly2 acc = Poly2::constant(l.bias[r]);
        for (std::size_t c = 0; c < l.in_dim; ++c) acc.add_scaled(x[c], l.w(r, c));
        y[r] = std::move(acc);
    }
    return y;
}

// All sign patterns of ReLU on a branch. Coordinates with a fixed sign on
// k, c >= 1 (all coefficients of one sign) do not split.
void relu_expand(Branch b, std::size_t i, bool prune, BranchSet& out) {
    for (; i < b.size(); ++i) {
        Poly2& p = b[i];
        if (p.is_zero()) continue;
        if (p.is_constant()) {
            if (p.constant_term() < 0) p = Poly2();
            continue;
        }
        const int sign = prune ? p.coefficient_sign() : 0;
        if (sign > 0) continue;
        if (sign < 0) {
            p = Poly2();
            continue;
        }
        Branch zeroed = b;
        zeroed[i] = Poly2();
        relu_expand(std::move(zeroed), i + 1, prune, out);
    }
    out.insert(std::move(b));
}

std::vector<Branch> apply_fnn(const Fnn& fnn, std::vector<Branch> inputs, const DescribeOptions& opts) {
    for (const auto& layer : fnn.layers()) {
        BranchSet next(opts.dedupe_tol, opts.cap);
        for (const auto& b : inputs) {
            Branch y = affine(layer, b);
            if (layer.act == Activation::relu)
                relu_expand(std::move(y), 0, opts.prune_signs, next);
            else
                next.insert(std::move(y));
        }
        inputs = next.take();
    }
    return inputs;
}

void check_count(std::size_t n, std::size_t factor, std::size_t cap) {
    if (factor != 0 && n > cap / factor)
        throw CapExceededError("describe: combination count exceeded cap of " + std::to_string(cap));
}

// Branch sets per class after the last layer.
std::vector<std::vector<Branch>> propagate(const Gnn& gnn, const std::vector<SymClass>& classes,
                                           const DescribeOptions& opts) {
    if (gnn.input_dim() != 1) throw DimensionError("describe: family features are 1-dimensional");
    for (const auto& layer : gnn.layers())
        for (const auto& agg : layer.aggs)
            if (agg.kind != AggKind::sum) throw std::invalid_argument("describe: only sum aggregation is supported");

    std::vector<std::vector<Branch>> sets(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) sets[i] = {Branch{classes[i].feature}};

    for (const auto& layer : gnn.layers()) {
        std::vector<std::vector<Branch>> next(classes.size());
        for (std::size_t ci = 0; ci < classes.size(); ++ci) {
            const auto& cls = classes[ci];
            // Every choice of own branch and one branch per neighbour class.
            std::vector<const std::vector<Branch>*> parts{&sets[ci]};
            for (const auto& [d, cnt] : cls.nbrs) parts.push_back(&sets[d]);
            std::size_t total = 1;
            for (const auto* p : parts) {
                check_count(total, p->size(), opts.cap);
                total *= p->size();
            }

            std::vector<Branch> inputs;
            inputs.reserve(total);
            std::vector<std::size_t> idx(parts.size(), 0);
            for (std::size_t n = 0; n < total; ++n) {
                const Branch& own = (*parts[0])[idx[0]];
                Branch agg(own.size());
                for (std::size_t t = 0; t < cls.nbrs.size(); ++t) {
                    const Branch& nb = (*parts[t + 1])[idx[t + 1]];
                    const Key cnt = cls.nbrs[t].second;
                    for (std::size_t j = 0; j < agg.size(); ++j) agg[j] += nb[j].shifted(cnt.first, cnt.second);
                }
                Branch in = own;
                for (std::size_t s = 0; s < layer.aggs.size(); ++s) in.insert(in.end(), agg.begin(), agg.end());
                inputs.push_back(std::move(in));
                for (std::size_t t = parts.size(); t-- > 0;) {
                    if (++idx[t] < parts[t]->size()) break;
                    idx[t] = 0;
                }
            }
            next[ci] = apply_fnn(layer.fnn, std::move(inputs), opts);
        }
        sets = std::move(next);
    }
    return sets;
}

PolySet coordinate_set(const std::vector<Branch>& branches, const DescribeOptions& opts) {
    BranchSet out(opts.dedupe_tol, opts.cap);
    for (const auto& b : branches) out.insert(Branch{b.at(opts.output_coord)});
    std::vector<Poly2> polys;
    for (auto& b : out.take()) polys.push_back(std::move(b[0]));
    return PolySet::from(std::move(polys));
}

}  // namespace

std::vector<PolySet> describe_classes(const Gnn& gnn, Family family, const DescribeOptions& opts) {
    const auto sets = propagate(gnn, symbolic_family(family), opts);
    std::vector<PolySet> out;
    for (const auto& s : sets) out.push_back(coordinate_set(s, opts));
    return out;
}

std::set<Poly2::Key> readout_support(const std::vector<PolySet>& class_sets, Family family) {
    const auto classes = symbolic_family(family);
    if (class_sets.size() != classes.size()) throw std::invalid_argument("readout_support: class count mismatch");
    std::set<Poly2::Key> keys;
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (const auto& p : class_sets[i].polys)
            for (const auto& [key, v] : p.terms())
                keys.insert({key.first + classes[i].size.first, key.second + classes[i].size.second});
    return keys;
}

PolySet describe(const Gnn& gnn, Family family, DescribeTarget target, const DescribeOptions& opts) {
    const auto classes = symbolic_family(family);
    const auto sets = propagate(gnn, classes, opts);
    if (target == DescribeTarget::center) return coordinate_set(sets[0], opts);

    const auto& ro = gnn.readout();
    if (ro && ro->agg != ReadoutAgg::sum)
        throw std::invalid_argument("describe: only sum readout is polynomial in the parameters");
    std::vector<Branch> totals{Branch(gnn.output_dim())};
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        check_count(totals.size(), sets[ci].size(), opts.cap);
        const Poly2::Key size = classes[ci].size;
        std::vector<Branch> grown;
        grown.reserve(totals.size() * sets[ci].size());
        for (const auto& t : totals)
            for (const auto& b : sets[ci]) {
                Branch s = t;
                for (std::size_t j = 0; j < s.size(); ++j) s[j] += b[j].shifted(size.first, size.second);
                grown.push_back(std::move(s));
            }
        totals = std::move(grown);
    }
    if (ro) totals = apply_fnn(ro->fnn, std::move(totals), opts);
    return coordinate_set(totals, opts);
}

double described_value(const Gnn& gnn, Family family, DescribeTarget target, std::uint64_t k, std::uint64_t c,
                       std::size_t output_coord) {
    const QuotientGraph q = make_family_quotient({family, k, c});
    if (target == DescribeTarget::center) return target_output(gnn, q).at(output_coord);
    if (gnn.readout()) return readout_eval(gnn, q).at(output_coord);
    const LayerTrace trace = gnn_forward(gnn, q);
    const FeatureMap& last = trace.back();
    double s = 0.0;
    for (std::size_t ci = 0; ci < q.class_count(); ++ci)
        s += static_cast<double>(q.class_size[ci]) * last.row(ci)[output_coord];
    return s;
}

DescriptionCheck check_description(const PolySet& ps, const Gnn& gnn, Family family, DescribeTarget target,
                                   std::uint64_t k_lo, std::uint64_t k_hi, std::uint64_t c_lo,
                                   std::uint64_t c_hi, std::size_t output_coord) {
    DescriptionCheck r;
    for (std::uint64_t k = k_lo; k <= k_hi; ++k)
        for (std::uint64_t c = c_lo; c <= c_hi; ++c) {
            const double y = described_value(gnn, family, target, k, c, output_coord);
            const double tol = 1e-6 * std::max(1.0, std::abs(y));
            std::size_t matches = 0;
            for (const auto& p : ps.polys)
                if (std::abs(p.eval(double(k), double(c)) - y) <= tol) ++matches;
            ++r.points;
            if (matches == 0) r.violations.emplace_back(k, c);
            if (matches > 1) ++r.ambiguous;
        }
    return r;
}

}  // namespace exprlab
