#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace exprlab {

// Pairwise (tree) summation; blocks of 8 are summed left to right.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// Sorts before summing so the result does not depend on enumeration order.
inline double canonical_sum(std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    return pairwise_sum(xs);
}

}  // namespace exprlab
