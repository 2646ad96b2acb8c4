#include "exprlab/analysis/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace exprlab {
namespace {

constexpr double kEps = 1e-11;

struct Tableau {
    std::size_t rows = 0, cols = 0;  // cols excludes the right-hand side
    std::vector<double> a;           // (rows + 1) x (cols + 1), objective last
    std::vector<std::size_t> basis;

    double& at(std::size_t r, std::size_t c) { return a[r * (cols + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols); }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t c = 0; c <= cols; ++c) at(pr, c) /= p;
        for (std::size_t r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        basis[pr] = pc;
    }

    // Sets the objective row to the reduced costs of `cost`.
    void price(const std::vector<double>& cost) {
        for (std::size_t c = 0; c <= cols; ++c) at(rows, c) = c < cols ? cost[c] : 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            const double cb = cost[basis[r]];
            if (cb == 0.0) continue;
            for (std::size_t c = 0; c <= cols; ++c) at(rows, c) -= cb * at(r, c);
        }
    }

    // Bland's rule. Returns false when unbounded.
    bool optimize(std::size_t allowed_cols) {
        for (std::size_t iter = 0;; ++iter) {
            if (iter > 1'000'000) throw std::runtime_error("solve_lp: iteration limit");
            std::size_t pc = allowed_cols;
            for (std::size_t c = 0; c < allowed_cols; ++c)
                if (at(rows, c) < -kEps) {
                    pc = c;
                    break;
                }
            if (pc == allowed_cols) return true;
            std::size_t pr = rows;
            double best = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                const double v = at(r, pc);
                if (v <= kEps) continue;
                const double ratio = rhs(r) / v;
                if (pr == rows || ratio < best - kEps || (std::abs(ratio - best) <= kEps && basis[r] < basis[pr])) {
                    pr = r;
                    best = ratio;
                }
            }
            if (pr == rows) return false;
            pivot(pr, pc);
        }
    }
};

}  // namespace

LpResult solve_lp(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b) {
    const std::size_t m = A.size(), n = c.size();
    if (b.size() != m) throw std::invalid_argument("solve_lp: b size mismatch");
    for (const auto& row : A)
        if (row.size() != n) throw std::invalid_argument("solve_lp: A row size mismatch");

    std::size_t n_art = 0;
    for (double v : b) n_art += v < 0;
    // Columns: originals, one slack per row, then artificials.
    Tableau t;
    t.rows = m;
    t.cols = n + m + n_art;
    t.a.assign((m + 1) * (t.cols + 1), 0.0);
    t.basis.resize(m);
    std::size_t art = n + m;
    for (std::size_t r = 0; r < m; ++r) {
        const double sign = b[r] < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.at(r, j) = sign * A[r][j];
        t.at(r, n + r) = sign;
        t.rhs(r) = sign * b[r];
        if (b[r] < 0) {
            t.at(r, art) = 1.0;
            t.basis[r] = art++;
        } else {
            t.basis[r] = n + r;
        }
    }

    LpResult res;
    if (n_art > 0) {
        std::vector<double> phase1(t.cols, 0.0);
        for (std::size_t j = n + m; j < t.cols; ++j) phase1[j] = 1.0;
        t.price(phase1);
        t.optimize(t.cols);
        double bscale = 1.0;
        for (double v : b) bscale = std::max(bscale, std::abs(v));
        if (-t.rhs(m) > 1e-9 * bscale) return res;  // infeasible
        // Drive remaining zero-level artificials out of the basis.
        for (std::size_t r = 0; r < m; ++r) {
            if (t.basis[r] < n + m) continue;
            for (std::size_t j = 0; j < n + m; ++j)
                if (std::abs(t.at(r, j)) > kEps) {
                    t.pivot(r, j);
                    break;
                }
        }
    }

    std::vector<double> cost(t.cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = c[j];
    t.price(cost);
    if (!t.optimize(n + m)) {
        res.status = LpStatus::unbounded;
        return res;
    }
    res.status = LpStatus::optimal;
    res.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (t.basis[r] < n) res.x[t.basis[r]] = t.rhs(r);
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
    return res;
}

}  // namespace exprlab
