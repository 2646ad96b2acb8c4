#include "exprlab/experiments/dataset.hpp"

#include <sstream>
#include <stdexcept>

#include "exprlab/util/error.hpp"

namespace exprlab {

const char* to_string(Task t) { return t == Task::uc ? "uc" : "sv"; }

const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::sum: return "sum";
        case ModelKind::mean: return "mean";
        case ModelKind::sum_mean: return "sum_mean";
    }
    return "?";
}

Task task_from_string(const std::string& s) {
    if (s == "uc" || s == "UC") return Task::uc;
    if (s == "sv" || s == "SV") return Task::sv;
    throw std::invalid_argument("unknown task '" + s + "' (expected uc or sv)");
}

ModelKind model_from_string(const std::string& s) {
    if (s == "sum") return ModelKind::sum;
    if (s == "mean") return ModelKind::mean;
    if (s == "sum_mean") return ModelKind::sum_mean;
    throw std::invalid_argument("unknown model '" + s + "' (expected sum, mean or sum_mean)");
}

Family task_family(Task t) { return t == Task::uc ? Family::star_uc : Family::tripartite_sv; }

namespace {

void check_range(const IntRange& r, const char* what) {
    if (r.lo < 1 || r.hi < r.lo)
        throw std::invalid_argument(std::string(what) + " range must satisfy 1 <= lo <= hi, got [" +
                                    std::to_string(r.lo) + ".." + std::to_string(r.hi) + "]");
}

std::string range_text(const IntRange& r) { return std::to_string(r.lo) + ".." + std::to_string(r.hi); }

IntRange parse_range(const std::string& s) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) throw ParseError("range '" + s + "' must look like lo..hi");
    try {
        std::size_t used = 0;
        IntRange r{std::stoull(s.substr(0, dots), &used), 0};
        if (used != dots) throw ParseError("range '" + s + "' has trailing characters");
        const std::string hi = s.substr(dots + 2);
        r.hi = std::stoull(hi, &used);
        if (used != hi.size()) throw ParseError("range '" + s + "' has trailing characters");
        return r;
    } catch (const std::logic_error&) {
        throw ParseError("range '" + s + "' is not numeric");
    }
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing config key '" + key + "'");
    return it->second;
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw ParseError("config key '" + key + "' is not an integer: " + s);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("config key '" + key + "' is not an integer: " + s);
    }
}

}  // namespace

void validate(const TaskSpec& spec) {
    check_range(spec.train_k, "train k");
    check_range(spec.train_c, "train c");
    check_range(spec.test_k, "test k");
    check_range(spec.test_c, "test c");
    if (spec.hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
    if (spec.layers == 0) throw std::invalid_argument("layers must be positive");
    if (spec.model == ModelKind::sum_mean && spec.layers < 2)
        throw std::invalid_argument("sum_mean needs at least two layers");
}

std::vector<DatasetItem> make_dataset(Task task, IntRange k, IntRange c) {
    check_range(k, "k");
    check_range(c, "c");
    std::vector<DatasetItem> out;
    out.reserve(k.size() * c.size());
    for (std::uint64_t kk = k.lo; kk <= k.hi; ++kk)
        for (std::uint64_t cc = c.lo; cc <= c.hi; ++cc) {
            const FamilySpec spec{task_family(task), kk, cc};
            FeaturedGraph g = make_family(spec);
            const VertexId t = g.target();
            out.push_back({spec, std::move(g), double(cc), t});
        }
    return out;
}

std::map<std::string, std::string> to_config(const TaskSpec& spec) {
    std::ostringstream seeds;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) seeds << (i ? "," : "") << spec.seeds[i];
    return {{"task", to_string(spec.task)},
            {"model", to_string(spec.model)},
            {"train_k", range_text(spec.train_k)},
            {"train_c", range_text(spec.train_c)},
            {"test_k", range_text(spec.test_k)},
            {"test_c", range_text(spec.test_c)},
            {"hidden_dim", std::to_string(spec.hidden_dim)},
            {"layers", std::to_string(spec.layers)},
            {"seeds", seeds.str()},
            {"both_slots", spec.both_slots ? "true" : "false"}};
}

TaskSpec task_spec_from_config(const std::map<std::string, std::string>& kv) {
    TaskSpec s;
    try {
        s.task = task_from_string(need(kv, "task"));
        s.model = model_from_string(need(kv, "model"));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    s.train_k = parse_range(need(kv, "train_k"));
    s.train_c = parse_range(need(kv, "train_c"));
    s.test_k = parse_range(need(kv, "test_k"));
    s.test_c = parse_range(need(kv, "test_c"));
    s.hidden_dim = to_u64(need(kv, "hidden_dim"), "hidden_dim");
    s.layers = to_u64(need(kv, "layers"), "layers");
    s.seeds.clear();
    std::stringstream ss(need(kv, "seeds"));
    for (std::string item; std::getline(ss, item, ',');) s.seeds.push_back(to_u64(item, "seeds"));
    const std::string& both = need(kv, "both_slots");
    if (both != "true" && both != "false") throw ParseError("both_slots must be true or false");
    s.both_slots = both == "true";
    return s;
}

}  // namespace exprlab
