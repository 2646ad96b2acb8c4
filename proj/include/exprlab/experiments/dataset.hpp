#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "exprlab/graph/families.hpp"

namespace exprlab {

enum class Task { uc, sv };
enum class ModelKind { sum, mean, sum_mean };

const char* to_string(Task t);
const char* to_string(ModelKind m);
Task task_from_string(const std::string& s);
ModelKind model_from_string(const std::string& s);

// uc -> star_uc, sv -> tripartite_sv.
Family task_family(Task t);

struct IntRange {
    std::uint64_t lo = 1;
    std::uint64_t hi = 1;

    std::uint64_t size() const { return hi - lo + 1; }
};

struct TaskSpec {
    Task task = Task::uc;
    IntRange train_k{1, 30};
    IntRange train_c{1, 30};
    IntRange test_k{31, 100};
    IntRange test_c{31, 100};
    ModelKind model = ModelKind::mean;
    std::size_t hidden_dim = 64;
    std::size_t layers = 2;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    // sum_mean only: give every layer both a sum and a mean slot instead of
    // sum in odd layers and mean in even layers.
    bool both_slots = false;
};

// Throws std::invalid_argument on empty or zero-based ranges, zero sizes,
// or sum_mean with fewer than two layers.
void validate(const TaskSpec& spec);

struct DatasetItem {
    FamilySpec spec;
    FeaturedGraph graph;
    double target = 0.0;
    VertexId target_vertex = 0;
};

// One graph per (k, c) in the ranges, k-major. The target is c at the center.
std::vector<DatasetItem> make_dataset(Task task, IntRange k, IntRange c);

// Flat key=value form of a task spec; inverse of task_spec_from_config.
std::map<std::string, std::string> to_config(const TaskSpec& spec);
TaskSpec task_spec_from_config(const std::map<std::string, std::string>& kv);

}  // namespace exprlab
