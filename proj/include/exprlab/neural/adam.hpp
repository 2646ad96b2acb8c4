#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace exprlab {

// Adam with a cosine-annealed learning rate over a fixed number of steps.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step = 0;
    double lr0 = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t total_steps = 1;

    AdamState(std::size_t param_count, double lr0, std::size_t total_steps);

    // lr0 * 0.5 * (1 + cos(pi * step / total_steps))
    double current_lr() const;
};

// Updates params in place and advances state.step. Throws DimensionError on
// shape mismatch and std::logic_error once step reaches total_steps.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

double cosine_lr(double lr0, std::size_t step, std::size_t total_steps);

}  // namespace exprlab
