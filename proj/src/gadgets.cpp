#include "exprlab/constructions/gadgets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "exprlab/util/error.hpp"

namespace exprlab {

void validate(const IndicatorSpec& spec) {
    if (!(spec.a > 0.0) || !(spec.a <= spec.s) || !(spec.s <= 1.0))
        throw std::invalid_argument("indicator needs 0 < a <= s <= 1");
    if (spec.d == 0) throw std::invalid_argument("indicator dimension must be positive");
}

std::size_t resolution_for(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("tolerance must be positive");
    const double guess = std::floor(1.0 / eps) + 1.0;
    if (guess > 1e15) throw InfeasibleError("tolerance " + std::to_string(eps) + " needs too fine a resolution");
    auto q = static_cast<std::size_t>(guess);
    while (q > 1 && 1.0 / static_cast<double>(q - 1) < eps) --q;
    while (!(1.0 / static_cast<double>(q) < eps)) ++q;
    return q;
}

namespace {

// Emits (1, x) so that a following sum aggregation delivers (n_v, sum).
GnnLayer count_and_copy_layer(std::size_t d) {
    DenseLayer l(2 * d, 1 + d, Activation::identity);
    l.bias[0] = 1.0;
    for (std::size_t i = 0; i < d; ++i) l.w(1 + i, i) = 1.0;
    return GnnLayer(Fnn(2 * d, {std::move(l)}), {Aggregation::sum()});
}

// Four units computing the trapezoid for one (s, a) pair on one coordinate.
// Inputs are laid out [1, x (d) | n, S (d)].
void add_trapezoid_units(DenseLayer& h, std::size_t& row, std::size_t d, std::size_t coord, double s_over_a,
                         double inv_a) {
    const std::size_t n_col = d + 1, s_col = d + 2 + coord;
    const double slopes[4] = {s_over_a, s_over_a, s_over_a - 1.0, s_over_a - 1.0};
    const double biases[4] = {0.0, -1.0, -1.0, 0.0};
    for (int u = 0; u < 4; ++u, ++row) {
        h.w(row, n_col) = slopes[u];
        h.w(row, s_col) = -inv_a;
        h.bias[row] = biases[u];
    }
}

constexpr double kTrapezoidSigns[4] = {1.0, -1.0, 1.0, -1.0};

}  // namespace

Gnn build_indicator(const IndicatorSpec& spec) {
    validate(spec);
    const std::size_t d = spec.d;
    DenseLayer h(2 * (d + 1), 4 * d, Activation::relu);
    DenseLayer o(4 * d, d, Activation::identity);
    std::size_t row = 0;
    for (std::size_t c = 0; c < d; ++c) {
        add_trapezoid_units(h, row, d, c, spec.s / spec.a, 1.0 / spec.a);
        for (int u = 0; u < 4; ++u) o.w(c, 4 * c + u) = kTrapezoidSigns[u];
    }
    return Gnn({count_and_copy_layer(d),
                GnnLayer(Fnn(2 * (d + 1), {std::move(h), std::move(o)}), {Aggregation::sum()})});
}

Gnn build_mean_approx(double eps, std::size_t d) {
    if (d == 0) throw std::invalid_argument("dimension must be positive");
    const std::size_t q = resolution_for(eps);
    const double qd = static_cast<double>(q);
    DenseLayer h(2 * (d + 1), 4 * (q + 1) * d, Activation::relu);
    DenseLayer o(h.out_dim, d, Activation::identity);
    std::size_t row = 0;
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 1; i <= q + 1; ++i) {
            const std::size_t first = row;
            // s_i = i/q and a = 1/q, so s/a = i.
            add_trapezoid_units(h, row, d, c, static_cast<double>(i), qd);
            for (int u = 0; u < 4; ++u) o.w(c, first + u) = kTrapezoidSigns[u] * static_cast<double>(i) / qd;
        }
    }
    return Gnn({count_and_copy_layer(d),
                GnnLayer(Fnn(2 * (d + 1), {std::move(h), std::move(o)}), {Aggregation::sum()})});
}

Gnn build_max_approx(double eps, std::size_t d) {
    if (d == 0) throw std::invalid_argument("dimension must be positive");
    const std::size_t q = resolution_for(eps);
    const double a = 1.0 / static_cast<double>(q);
    const std::size_t buckets = q * d;

    DenseLayer h1(2 * d, 2 * buckets, Activation::relu);
    DenseLayer o1(2 * buckets, buckets, Activation::identity);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < q; ++i) {
            const std::size_t b = c * q + i;
            h1.w(2 * b, c) = 1.0;
            h1.bias[2 * b] = -static_cast<double>(i) * a;
            h1.w(2 * b + 1, c) = 1.0;
            h1.bias[2 * b + 1] = -static_cast<double>(i + 1) * a;
            o1.w(b, 2 * b) = 1.0;
            o1.w(b, 2 * b + 1) = -1.0;
        }
    }

    DenseLayer h2(2 * buckets, 2 * buckets, Activation::relu);
    DenseLayer o2(2 * buckets, d, Activation::identity);
    for (std::size_t b = 0; b < buckets; ++b) {
        h2.w(2 * b, buckets + b) = 1.0;
        h2.w(2 * b + 1, buckets + b) = 1.0;
        h2.bias[2 * b + 1] = -a;
        o2.w(b / q, 2 * b) = 1.0;
        o2.w(b / q, 2 * b + 1) = -1.0;
    }
    return Gnn({GnnLayer(Fnn(2 * d, {std::move(h1), std::move(o1)}), {Aggregation::sum()}),
                GnnLayer(Fnn(2 * buckets, {std::move(h2), std::move(o2)}), {Aggregation::sum()})});
}

}  // namespace exprlab
