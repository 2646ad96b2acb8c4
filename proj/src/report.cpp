#include "exprlab/experiments/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include "exprlab/util/error.hpp"
#include "exprlab/util/files.hpp"

namespace exprlab {
namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

// Smallest plotted value; zero errors sit on the axis floor.
constexpr double kFloor = 1e-12;

}  // namespace

std::string summary_csv(const std::vector<ReEntry>& entries) {
    std::map<std::tuple<std::string, std::string, std::uint64_t, std::uint64_t>, std::vector<double>> groups;
    for (const auto& e : entries) groups[{e.task, e.model, e.k, e.c}].push_back(e.re);
    std::string out = "task,model,k,c,median_re,mean_re,runs\n";
    for (const auto& [key, v] : groups) {
        double s = 0.0;
        for (double x : v) s += x;
        out += std::get<0>(key) + "," + std::get<1>(key) + "," + std::to_string(std::get<2>(key)) + "," +
               std::to_string(std::get<3>(key)) + "," + fmt("%.10g", median_of(v)) + "," +
               fmt("%.10g", s / double(v.size())) + "," + std::to_string(v.size()) + "\n";
    }
    return out;
}

std::string re_plot_svg(const std::vector<ReEntry>& entries, const std::string& task, std::uint64_t k) {
    // model -> c -> RE values over seeds
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> series;
    for (const auto& e : entries)
        if (e.task == task && e.k == k) series[e.model][e.c].push_back(e.re);
    if (series.empty()) throw Error("no metrics for task " + task + " at k=" + std::to_string(k));

    std::uint64_t cmin = UINT64_MAX, cmax = 0;
    double lo = INFINITY, hi = -INFINITY;
    std::map<std::string, std::vector<std::pair<std::uint64_t, double>>> pts;
    for (const auto& [model, byc] : series)
        for (const auto& [c, v] : byc) {
            const double y = std::log10(std::max(median_of(v), kFloor));
            pts[model].emplace_back(c, y);
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    const int dlo = int(std::floor(lo)), dhi = std::max(int(std::ceil(hi)), dlo + 1);

    const double W = 640, H = 400, L = 70, R = 140, T = 40, Bm = 50;
    const double pw = W - L - R, ph = H - T - Bm;
    auto xs = [&](double c) { return cmax == cmin ? L + pw / 2 : L + pw * (c - double(cmin)) / double(cmax - cmin); };
    auto ys = [&](double y) { return T + ph * (1.0 - (y - dlo) / double(dhi - dlo)); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt("%.2f", L + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">relative error vs c, task " + escape(task) + ", k=" + std::to_string(k) + "</text>\n";
    s += "<g stroke=\"black\" fill=\"none\"><path d=\"M" + fmt("%.2f", L) + " " + fmt("%.2f", T) + " V" +
         fmt("%.2f", T + ph) + " H" + fmt("%.2f", L + pw) + "\"/></g>\n";
    for (int d = dlo; d <= dhi; ++d) {
        const double y = ys(d);
        s += "<line x1=\"" + fmt("%.2f", L) + "\" x2=\"" + fmt("%.2f", L + pw) + "\" y1=\"" + fmt("%.2f", y) +
             "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + fmt("%.2f", L - 6) + "\" y=\"" + fmt("%.2f", y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" + std::to_string(d) + "</text>\n";
    }
    for (std::uint64_t c : std::set<std::uint64_t>{cmin, (cmin + cmax) / 2, cmax})
        s += "<text x=\"" + fmt("%.2f", xs(double(c))) + "\" y=\"" + fmt("%.2f", T + ph + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(c) + "</text>\n";
    s += "<text x=\"" + fmt("%.2f", L + pw / 2) + "\" y=\"" + fmt("%.2f", H - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">c</text>\n";
    s += "<text x=\"16\" y=\"" + fmt("%.2f", T + ph / 2) + "\" transform=\"rotate(-90 16 " + fmt("%.2f", T + ph / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">median RE (log)</text>\n";

    std::size_t i = 0;
    for (const auto& [model, p] : pts) {
        const char* color = kColors[i % (sizeof kColors / sizeof *kColors)];
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < p.size(); ++j)
            s += (j ? " " : "") + fmt("%.2f", xs(double(p[j].first))) + "," + fmt("%.2f", ys(p[j].second));
        s += "\"/>\n";
        const double ly = T + 14 + 18 * double(i);
        s += "<line x1=\"" + fmt("%.2f", L + pw + 12) + "\" x2=\"" + fmt("%.2f", L + pw + 32) + "\" y1=\"" +
             fmt("%.2f", ly) + "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + fmt("%.2f", L + pw + 38) + "\" y=\"" + fmt("%.2f", ly + 4) +
             "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(model) + "</text>\n";
        ++i;
    }
    s += "</svg>\n";
    return s;
}

ReportFiles write_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir, bool svg,
                         const std::vector<std::uint64_t>& plot_ks) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(runs_dir)) throw Error("run directory not found: " + runs_dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(runs_dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("metrics", 0) == 0 && e.path().extension() == ".csv")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ReEntry> all;
    for (const auto& f : files) {
        try {
            const auto rows = parse_metrics_csv(read_file(f));
            all.insert(all.end(), rows.begin(), rows.end());
        } catch (const ParseError& e) {
            throw ParseError(f.string() + ": " + e.what());
        }
    }
    if (all.empty()) throw Error("no metrics rows found under " + runs_dir.string());

    fs::create_directories(out_dir);
    ReportFiles out;
    out.summary = out_dir / "summary.csv";
    write_file_atomic(out.summary, summary_csv(all));
    if (!svg) return out;
    std::set<std::pair<std::string, std::uint64_t>> keys;
    for (const auto& e : all)
        if (plot_ks.empty() || std::find(plot_ks.begin(), plot_ks.end(), e.k) != plot_ks.end())
            keys.insert({e.task, e.k});
    for (const auto& [task, k] : keys) {
        const fs::path p = out_dir / ("re_" + task + "_k" + std::to_string(k) + ".svg");
        write_file_atomic(p, re_plot_svg(all, task, k));
        out.plots.push_back(p);
    }
    return out;
}

}  // namespace exprlab
