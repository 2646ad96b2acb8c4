#include "exprlab/experiments/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "exprlab/util/error.hpp"
#include "exprlab/util/parallel.hpp"

namespace exprlab {

double relative_error(double y, double c) {
    if (c == 0.0) throw std::invalid_argument("relative error undefined for c = 0");
    return std::abs(y - c) / std::abs(c);
}

double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::map<std::pair<std::uint64_t, std::uint64_t>, ReAggregate> ReTable::aggregates() const {
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<double>> groups;
    for (const auto& e : entries) groups[{e.k, e.c}].push_back(e.re);
    std::map<std::pair<std::uint64_t, std::uint64_t>, ReAggregate> out;
    for (auto& [key, v] : groups) {
        double s = 0.0;
        for (double x : v) s += x;
        out[key] = {median_of(v), s / double(v.size()), v.size()};
    }
    return out;
}

double ReTable::median() const {
    std::vector<double> v;
    for (const auto& e : entries) v.push_back(e.re);
    return median_of(std::move(v));
}

ReTable evaluate_re(const Gnn& gnn, Task task, IntRange k, IntRange c, const std::string& model_name,
                    std::uint64_t seed) {
    if (k.lo < 1 || k.hi < k.lo || c.lo < 1 || c.hi < c.lo) throw std::invalid_argument("evaluate_re: bad grid");
    std::vector<std::vector<ReEntry>> rows(k.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const std::uint64_t kk = k.lo + i;
        for (std::uint64_t cc = c.lo; cc <= c.hi; ++cc) {
            const double y = target_output(gnn, make_family_quotient({task_family(task), kk, cc})).at(0);
            rows[i].push_back({to_string(task), model_name, seed, kk, cc, relative_error(y, double(cc))});
        }
    });
    ReTable t;
    for (auto& r : rows) t.entries.insert(t.entries.end(), r.begin(), r.end());
    return t;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] != '-') {
            const auto v = std::stoull(s, &used);
            if (used == s.size()) return v;
        }
    } catch (const std::logic_error&) {
    }
    throw ParseError("metrics line " + std::to_string(line) + ": bad integer '" + s + "'");
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::logic_error&) {
    }
    throw ParseError("metrics line " + std::to_string(line) + ": bad number '" + s + "'");
}

const char* kMetricsHeader = "task,model,seed,k,c,re";

}  // namespace

std::string metrics_csv(const std::vector<ReEntry>& entries) {
    std::string out = std::string(kMetricsHeader) + "\n";
    for (const auto& e : entries)
        out += e.task + "," + e.model + "," + std::to_string(e.seed) + "," + std::to_string(e.k) + "," +
               std::to_string(e.c) + "," + fmt(e.re) + "\n";
    return out;
}

std::vector<ReEntry> parse_metrics_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != kMetricsHeader)
        throw ParseError(std::string("metrics file must start with header '") + kMetricsHeader + "'");
    std::vector<ReEntry> out;
    for (std::size_t n = 2; std::getline(ss, line); ++n) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) throw ParseError("metrics line " + std::to_string(n) + ": expected 6 fields");
        ReEntry e{f[0], f[1], parse_u64(f[2], n), parse_u64(f[3], n), parse_u64(f[4], n), parse_double(f[5], n)};
        if (!(e.re >= 0.0)) throw ParseError("metrics line " + std::to_string(n) + ": negative relative error");
        out.push_back(std::move(e));
    }
    return out;
}

std::string history_csv(const std::vector<HistoryRow>& rows) {
    std::string out = "lr0,epoch,lr,train_loss,val_loss\n";
    for (const auto& r : rows)
        out += fmt(r.lr0) + "," + std::to_string(r.epoch) + "," + fmt(r.lr) + "," + fmt(r.train_loss) + "," +
               fmt(r.val_loss) + "\n";
    return out;
}

std::string config_text(const std::map<std::string, std::string>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        if (k.empty() || k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw std::invalid_argument("config entry '" + k + "' cannot be written as key=value");
        out += k + "=" + v + "\n";
    }
    return out;
}

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    for (std::size_t n = 1; std::getline(ss, line); ++n) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("config line " + std::to_string(n) + ": expected key=value");
        if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second)
            throw ParseError("config line " + std::to_string(n) + ": duplicate key '" + line.substr(0, eq) + "'");
    }
    return kv;
}

}  // namespace exprlab
