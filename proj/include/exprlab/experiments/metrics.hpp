#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "exprlab/experiments/dataset.hpp"
#include "exprlab/experiments/train.hpp"
#include "exprlab/gnn/gnn.hpp"

namespace exprlab {

// |y - c| / |c|; throws std::invalid_argument for c == 0.
double relative_error(double y, double c);

struct ReEntry {
    std::string task;
    std::string model;
    std::uint64_t seed = 0;
    std::uint64_t k = 0;
    std::uint64_t c = 0;
    double re = 0.0;
};

struct ReAggregate {
    double median = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

struct ReTable {
    std::vector<ReEntry> entries;

    // Per (k, c) over all seeds and models present.
    std::map<std::pair<std::uint64_t, std::uint64_t>, ReAggregate> aggregates() const;
    double median() const;
};

double median_of(std::vector<double> v);

// RE of the target-vertex output over the grid, k-major.
ReTable evaluate_re(const Gnn& gnn, Task task, IntRange k, IntRange c, const std::string& model_name,
                    std::uint64_t seed);

// Columns task,model,seed,k,c,re.
std::string metrics_csv(const std::vector<ReEntry>& entries);
std::vector<ReEntry> parse_metrics_csv(const std::string& text);

// Columns lr0,epoch,lr,train_loss,val_loss.
std::string history_csv(const std::vector<HistoryRow>& rows);

// key=value lines, sorted by key. '#' starts a comment line.
std::string config_text(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> parse_config(const std::string& text);

}  // namespace exprlab
