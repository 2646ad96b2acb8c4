#pragma once

#include <cstddef>
#include <vector>

namespace exprlab {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

// minimize c.x subject to A x <= b and x >= 0, with A given row-major
// (rows x c.size()). Dense two-phase tableau simplex using Bland's rule.
LpResult solve_lp(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b);

}  // namespace exprlab
