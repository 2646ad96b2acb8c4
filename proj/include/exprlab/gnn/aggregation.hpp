#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace exprlab {

enum class AggKind { sum, mean, max, upa };
enum class UpaMode { of_x, of_bx };

const char* to_string(AggKind k);
const char* to_string(UpaMode m);

// Order-invariant multiset-to-vector function, applied coordinatewise.
//
// A uniform polynomial aggregation (upa) is only defined on homogeneous
// multisets {x}^b: it returns p(x) (of_x) or p(b*x) (of_bx), with p given by
// its coefficients in increasing degree.
struct Aggregation {
    AggKind kind = AggKind::sum;
    std::vector<double> upa_coeffs;
    UpaMode upa_mode = UpaMode::of_x;

    static Aggregation sum() { return {AggKind::sum, {}, UpaMode::of_x}; }
    static Aggregation mean() { return {AggKind::mean, {}, UpaMode::of_x}; }
    static Aggregation max() { return {AggKind::max, {}, UpaMode::of_x}; }
    static Aggregation upa(std::vector<double> coeffs, UpaMode mode) {
        return {AggKind::upa, std::move(coeffs), mode};
    }

    bool operator==(const Aggregation&) const = default;
};

double eval_polynomial(std::span<const double> coeffs, double x);

// Throws std::invalid_argument on an empty multiset (except for sum, which
// yields the zero vector of length dim), on mixed dimensions, and for upa on
// a non-homogeneous multiset.
std::vector<double> aggregate(const Aggregation& agg, const std::vector<std::vector<double>>& values,
                              std::size_t dim);

// Coordinatewise kernel over gathered rows; `rows` holds pointers to dim
// values each. Used by the forward passes.
void aggregate_rows(const Aggregation& agg, std::span<const double* const> rows, std::size_t dim,
                    std::span<double> out);

nlohmann::json to_json(const Aggregation& agg);
Aggregation aggregation_from_json(const nlohmann::json& j);

}  // namespace exprlab
