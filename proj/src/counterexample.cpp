#include "exprlab/analysis/counterexample.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "exprlab/util/parallel.hpp"

namespace exprlab {

std::vector<std::uint64_t> geometric_ladder(std::uint64_t max, double ratio) {
    if (max < 1 || !(ratio > 1.0)) throw std::invalid_argument("geometric_ladder: need max >= 1 and ratio > 1");
    std::vector<std::uint64_t> out;
    for (double v = 1.0; v < double(max); v *= ratio) {
        const auto r = static_cast<std::uint64_t>(std::llround(v));
        if (out.empty() || r > out.back()) out.push_back(r);
    }
    if (out.empty() || out.back() != max) out.push_back(max);
    return out;
}

std::optional<Witness> counterexample_search(const Gnn& gnn, Family family,
                                             const std::function<double(std::uint64_t, std::uint64_t)>& target,
                                             double eps, const SearchGrid& grid) {
    const auto ks = geometric_ladder(grid.k_max, grid.ratio);
    const auto cs = geometric_ladder(grid.c_max, grid.ratio);
    std::vector<std::optional<Witness>> rows(ks.size());
    parallel_for(ks.size(), [&](std::size_t i) {
        for (std::uint64_t c : cs) {
            const double y = target_output(gnn, make_family_quotient({family, ks[i], c})).at(0);
            const double gap = std::isfinite(y) ? std::abs(y - target(ks[i], c)) : std::numeric_limits<double>::infinity();
            if (gap > eps) {
                rows[i] = Witness{ks[i], c, y, gap};
                return;
            }
        }
    });
    for (auto& r : rows)
        if (r) return r;
    return std::nullopt;
}

}  // namespace exprlab
