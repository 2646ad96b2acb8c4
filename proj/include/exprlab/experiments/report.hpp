#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "exprlab/experiments/metrics.hpp"

namespace exprlab {

// Columns task,model,k,c,median_re,mean_re,runs, one row per
// (task, model, k, c), sorted.
std::string summary_csv(const std::vector<ReEntry>& entries);

// Line plot of median RE against c for one task and k, one series per
// model, log-scaled y axis. Output depends only on the input rows.
std::string re_plot_svg(const std::vector<ReEntry>& entries, const std::string& task, std::uint64_t k);

struct ReportFiles {
    std::filesystem::path summary;
    std::vector<std::filesystem::path> plots;
};

// Reads every *.csv metrics file directly under runs_dir (sorted by name),
// writes summary.csv and one re_<task>_k<k>.svg per (task, k) to out_dir.
// With plot_ks empty every k present is plotted. Throws Error when no
// metrics are found, ParseError on corrupt files.
ReportFiles write_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir, bool svg,
                         const std::vector<std::uint64_t>& plot_ks = {});

}  // namespace exprlab
