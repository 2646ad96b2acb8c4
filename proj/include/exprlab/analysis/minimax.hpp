#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

namespace exprlab {

struct GapResult {
    double gap = 0.0;
    std::vector<double> best_poly;  // coefficients in increasing degree of y
    std::vector<std::int64_t> points;
};

nlohmann::json to_json(const GapResult& r);

// Best uniform approximation by polynomials of degree <= n on the points
// x, x+1, ..., x+values.size()-1, solved as a linear program. The gap is
// recomputed from the returned coefficients. Needs at least n+2 points.
GapResult minimax_gap(std::span<const double> values, std::int64_t x, std::size_t n);

struct ScanResult {
    std::int64_t T = 0;
    double delta = 0.0;
    std::vector<double> interval_gaps;
};

// Thrown when some interval is matched exactly by a degree-n polynomial.
struct NoCertificate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// T_0 = 1, T_i = (k_n - 1) i + 1, interval i covers T_{i-1} .. T_{i-1}+k_n-1.
// Returns T_q and the smallest interval gap.
ScanResult scan_gap(const std::function<double(std::int64_t)>& f, std::size_t q, std::size_t n,
                    std::size_t k_n);

}  // namespace exprlab
