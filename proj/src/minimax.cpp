#include "exprlab/analysis/minimax.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "exprlab/analysis/simplex.hpp"
#include "exprlab/util/parallel.hpp"

namespace exprlab {

nlohmann::json to_json(const GapResult& r) {
    return {{"gap", r.gap}, {"best_poly", r.best_poly}, {"points", r.points}};
}

GapResult minimax_gap(std::span<const double> values, std::int64_t x, std::size_t n) {
    const std::size_t N = values.size();
    if (N < n + 2)
        throw std::invalid_argument("minimax_gap: need at least n+2 points, got " + std::to_string(N));
    double fscale = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("minimax_gap: non-finite value");
        fscale = std::max(fscale, std::abs(v));
    }
    if (fscale == 0.0) fscale = 1.0;

    // Points mapped to z in [-1, 1]; values normalized to max 1.
    const double mid = double(x) + double(N - 1) / 2.0, half = double(N - 1) / 2.0;
    std::vector<std::vector<double>> zpow(N, std::vector<double>(n + 1));
    for (std::size_t i = 0; i < N; ++i) {
        const double z = (double(x) + double(i) - mid) / half;
        double p = 1.0;
        for (std::size_t j = 0; j <= n; ++j, p *= z) zpow[i][j] = p;
    }

    // Variables: a_j^+ (0..n), a_j^- (n+1..2n+1), t.
    const std::size_t nv = 2 * (n + 1) + 1;
    std::vector<double> cost(nv, 0.0);
    cost[nv - 1] = 1.0;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < N; ++i) {
        const double f = values[i] / fscale;
        std::vector<double> up(nv, 0.0), dn(nv, 0.0);
        for (std::size_t j = 0; j <= n; ++j) {
            up[j] = zpow[i][j];
            up[n + 1 + j] = -zpow[i][j];
            dn[j] = -zpow[i][j];
            dn[n + 1 + j] = zpow[i][j];
        }
        up[nv - 1] = dn[nv - 1] = -1.0;
        A.push_back(std::move(up));
        b.push_back(f);
        A.push_back(std::move(dn));
        b.push_back(-f);
    }
    const LpResult lp = solve_lp(cost, A, b);
    if (lp.status != LpStatus::optimal) throw std::runtime_error("minimax_gap: LP did not reach an optimum");

    std::vector<double> az(n + 1);
    for (std::size_t j = 0; j <= n; ++j) az[j] = (lp.x[j] - lp.x[n + 1 + j]) * fscale;

    GapResult r;
    for (std::size_t i = 0; i < N; ++i) {
        double p = 0.0;
        for (std::size_t j = 0; j <= n; ++j) p += az[j] * zpow[i][j];
        r.gap = std::max(r.gap, std::abs(p - values[i]));
        r.points.push_back(x + std::int64_t(i));
    }

    // Expand sum_j az_j ((y - mid) / half)^j in powers of y.
    r.best_poly.assign(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        double binom = 1.0;
        const double s = az[j] / std::pow(half, double(j));
        for (std::size_t q = 0; q <= j; ++q) {
            r.best_poly[q] += s * binom * std::pow(-mid, double(j - q));
            binom = binom * double(j - q) / double(q + 1);
        }
    }
    return r;
}

ScanResult scan_gap(const std::function<double(std::int64_t)>& f, std::size_t q, std::size_t n, std::size_t k_n) {
    if (q == 0) throw std::invalid_argument("scan_gap: q must be positive");
    if (k_n < n + 2) throw std::invalid_argument("scan_gap: k_n must be at least n+2");
    const auto T = [&](std::size_t i) { return std::int64_t((k_n - 1) * i + 1); };

    std::vector<std::vector<double>> values(q);
    for (std::size_t i = 1; i <= q; ++i)
        for (std::size_t t = 0; t < k_n; ++t) values[i - 1].push_back(f(T(i - 1) + std::int64_t(t)));

    ScanResult r;
    r.T = T(q);
    r.interval_gaps.assign(q, 0.0);
    parallel_for(q, [&](std::size_t i) { r.interval_gaps[i] = minimax_gap(values[i], T(i), n).gap; });
    r.delta = r.interval_gaps.front();
    for (std::size_t i = 0; i < q; ++i) {
        double scale = 1.0;
        for (double v : values[i]) scale = std::max(scale, std::abs(v));
        if (r.interval_gaps[i] <= 1e-12 * scale)
            throw NoCertificate("scan_gap: interval starting at " + std::to_string(T(i)) +
                                " is matched by a degree-" + std::to_string(n) + " polynomial");
        r.delta = std::min(r.delta, r.interval_gaps[i]);
    }
    return r;
}

}  // namespace exprlab
