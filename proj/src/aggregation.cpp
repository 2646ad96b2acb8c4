#include "exprlab/gnn/aggregation.hpp"

#include <algorithm>
#include <stdexcept>

#include "exprlab/util/error.hpp"
#include "exprlab/util/summation.hpp"

namespace exprlab {

const char* to_string(AggKind k) {
    switch (k) {
        case AggKind::sum: return "sum";
        case AggKind::mean: return "mean";
        case AggKind::max: return "max";
        case AggKind::upa: return "upa";
    }
    return "?";
}

const char* to_string(UpaMode m) { return m == UpaMode::of_x ? "of_x" : "of_bx"; }

double eval_polynomial(std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

void aggregate_rows(const Aggregation& agg, std::span<const double* const> rows, std::size_t dim,
                    std::span<double> out) {
    if (out.size() != dim) throw DimensionError("aggregation output has wrong size");
    const std::size_t n = rows.size();
    if (n == 0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (agg.kind == AggKind::upa) {
        for (std::size_t i = 1; i < n; ++i)
            if (!std::equal(rows[i], rows[i] + dim, rows[0]))
                throw std::invalid_argument("upa aggregation applied to a non-homogeneous multiset");
        const double b = static_cast<double>(n);
        for (std::size_t j = 0; j < dim; ++j) {
            const double x = rows[0][j];
            out[j] = eval_polynomial(agg.upa_coeffs, agg.upa_mode == UpaMode::of_x ? x : b * x);
        }
        return;
    }
    std::vector<double> col(n);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = rows[i][j];
        switch (agg.kind) {
            case AggKind::sum:
                out[j] = canonical_sum(col);
                break;
            case AggKind::mean: {
                std::sort(col.begin(), col.end());
                // Homogeneous multisets average to their element exactly.
                out[j] = col.front() == col.back() ? col.front()
                                                   : pairwise_sum(col) / static_cast<double>(n);
                break;
            }
            case AggKind::max:
                out[j] = *std::max_element(col.begin(), col.end());
                break;
            case AggKind::upa:
                break;
        }
    }
}

std::vector<double> aggregate(const Aggregation& agg, const std::vector<std::vector<double>>& values,
                              std::size_t dim) {
    if (values.empty() && agg.kind != AggKind::sum)
        throw std::invalid_argument(std::string(to_string(agg.kind)) + " of an empty multiset");
    std::vector<const double*> rows;
    rows.reserve(values.size());
    for (const auto& v : values) {
        if (v.size() != dim) throw DimensionError("aggregated vectors have mixed dimensions");
        rows.push_back(v.data());
    }
    std::vector<double> out(dim);
    aggregate_rows(agg, rows, dim, out);
    return out;
}

nlohmann::json to_json(const Aggregation& agg) {
    if (agg.kind != AggKind::upa) return to_string(agg.kind);
    return {{"kind", "upa"}, {"coeffs", agg.upa_coeffs}, {"mode", to_string(agg.upa_mode)}};
}

Aggregation aggregation_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "sum") return Aggregation::sum();
        if (s == "mean") return Aggregation::mean();
        if (s == "max") return Aggregation::max();
        throw ParseError("unknown aggregation '" + s + "'");
    }
    try {
        if (j.at("kind").get<std::string>() != "upa") throw ParseError("aggregation object must be a upa");
        const auto mode = j.at("mode").get<std::string>();
        if (mode != "of_x" && mode != "of_bx") throw ParseError("unknown upa mode '" + mode + "'");
        return Aggregation::upa(j.at("coeffs").get<std::vector<double>>(),
                                mode == "of_x" ? UpaMode::of_x : UpaMode::of_bx);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("aggregation: ") + e.what());
    }
}

}  // namespace exprlab
