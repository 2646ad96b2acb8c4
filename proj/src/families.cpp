#include "exprlab/graph/families.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace exprlab {

namespace {

constexpr std::uint64_t kMaxExplicit = 50'000'000;

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        throw std::overflow_error("family size overflows 64 bits");
    return a * b;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    if (b > std::numeric_limits<std::uint64_t>::max() - a)
        throw std::overflow_error("family size overflows 64 bits");
    return a + b;
}

struct ClassDef {
    std::uint64_t size;
    double feature;
};

struct LinkDef {
    std::uint32_t a, b;
};

// Class sizes and features plus complete bipartite connections between classes.
void layout(const FamilySpec& s, std::vector<ClassDef>& classes, std::vector<LinkDef>& links) {
    const std::uint64_t k = s.k, c = s.c;
    const double cf = static_cast<double>(c);
    switch (s.family) {
        case Family::star_sv:
            classes = {{1, 1.0}, {k, 1.0}};
            links = {{0, 1}};
            break;
        case Family::star_uc:
            classes = {{1, 0.0}, {k, cf}};
            links = {{0, 1}};
            break;
        case Family::star_flag:
            classes = {{1, 0.0}, {k, 0.0}, {1, cf}};
            links = {{0, 1}, {0, 2}};
            break;
        case Family::bipartite_uc:
            classes = {{checked_mul(k, k), 0.0}, {k, cf}};
            links = {{0, 1}};
            break;
        case Family::tripartite_sv:
            classes = {{1, 1.0}, {k, 1.0}, {c, 1.0}};
            links = {{0, 1}, {1, 2}};
            break;
        case Family::tripartite_embed:
            classes = {{checked_mul(k, k), 0.0}, {checked_mul(checked_mul(k, k), k), 0.0},
                       {checked_mul(k, c), 1.0}};
            links = {{0, 1}, {1, 2}};
            break;
    }
}

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::star_sv: return "star_sv";
        case Family::star_uc: return "star_uc";
        case Family::star_flag: return "star_flag";
        case Family::bipartite_uc: return "bipartite_uc";
        case Family::tripartite_sv: return "tripartite_sv";
        case Family::tripartite_embed: return "tripartite_embed";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    for (Family f : {Family::star_sv, Family::star_uc, Family::star_flag, Family::bipartite_uc,
                     Family::tripartite_sv, Family::tripartite_embed})
        if (s == to_string(f)) return f;
    throw std::invalid_argument("unknown family '" + s + "'");
}

void validate(const FamilySpec& s) {
    if (s.k == 0) throw std::invalid_argument("k must be positive");
    if (s.family == Family::star_flag) {
        if (s.c > 1) throw std::invalid_argument("star_flag parameter b must be 0 or 1");
    } else if (s.family != Family::star_sv && s.c == 0) {
        throw std::invalid_argument("c must be positive");
    }
}

std::uint64_t family_vertex_count(const FamilySpec& spec) {
    validate(spec);
    std::vector<ClassDef> classes;
    std::vector<LinkDef> links;
    layout(spec, classes, links);
    std::uint64_t n = 0;
    for (const auto& cl : classes) n = checked_add(n, cl.size);
    return n;
}

std::uint64_t family_edge_count(const FamilySpec& spec) {
    validate(spec);
    std::vector<ClassDef> classes;
    std::vector<LinkDef> links;
    layout(spec, classes, links);
    std::uint64_t m = 0;
    for (const auto& l : links) m = checked_add(m, checked_mul(classes[l.a].size, classes[l.b].size));
    return m;
}

FeaturedGraph make_family(const FamilySpec& spec) {
    validate(spec);
    std::vector<ClassDef> classes;
    std::vector<LinkDef> links;
    layout(spec, classes, links);
    const std::uint64_t n = family_vertex_count(spec);
    const std::uint64_t m = family_edge_count(spec);
    if (n > kMaxExplicit || m > kMaxExplicit)
        throw std::length_error("family too large to materialize; use make_family_quotient");
    std::vector<std::uint64_t> start(classes.size() + 1, 0);
    for (std::size_t i = 0; i < classes.size(); ++i) start[i + 1] = start[i] + classes[i].size;
    std::vector<double> feats;
    feats.reserve(n);
    for (const auto& cl : classes) feats.insert(feats.end(), cl.size, cl.feature);
    std::vector<Edge> edges;
    edges.reserve(m);
    for (const auto& l : links)
        for (std::uint64_t a = start[l.a]; a < start[l.a + 1]; ++a)
            for (std::uint64_t b = start[l.b]; b < start[l.b + 1]; ++b)
                edges.emplace_back(static_cast<VertexId>(a), static_cast<VertexId>(b));
    return FeaturedGraph(n, 1, std::move(edges), std::move(feats), 0);
}

QuotientGraph make_family_quotient(const FamilySpec& spec) {
    validate(spec);
    std::vector<ClassDef> classes;
    std::vector<LinkDef> links;
    layout(spec, classes, links);
    QuotientGraph q;
    q.dim = 1;
    q.nbrs.resize(classes.size());
    std::uint64_t start = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        q.class_size.push_back(classes[i].size);
        q.representative.push_back(static_cast<VertexId>(
            std::min<std::uint64_t>(start, std::numeric_limits<VertexId>::max())));
        q.features.push_back(classes[i].feature);
        start += classes[i].size;
    }
    for (const auto& l : links) {
        q.nbrs[l.a].push_back({l.b, classes[l.b].size});
        q.nbrs[l.b].push_back({l.a, classes[l.a].size});
    }
    for (auto& row : q.nbrs)
        std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.cls < y.cls; });
    q.target_class = 0;
    return q;
}

}  // namespace exprlab
