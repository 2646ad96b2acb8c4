#include "exprlab/neural/adam.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "exprlab/util/error.hpp"

namespace exprlab {

AdamState::AdamState(std::size_t param_count, double lr0_, std::size_t total_steps_)
    : first_moment(param_count, 0.0),
      second_moment(param_count, 0.0),
      lr0(lr0_),
      total_steps(total_steps_) {
    if (!(lr0 > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (total_steps == 0) throw std::invalid_argument("total_steps must be positive");
}

double AdamState::current_lr() const { return cosine_lr(lr0, step, total_steps); }

double cosine_lr(double lr0, std::size_t step, std::size_t total_steps) {
    const double t = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
    if (params.size() != grads.size() || params.size() != s.first_moment.size() ||
        params.size() != s.second_moment.size())
        throw DimensionError("adam: parameter, gradient and moment shapes differ");
    if (s.step >= s.total_steps) throw std::logic_error("adam: schedule exhausted");
    const double lr = s.current_lr();
    const double t = static_cast<double>(s.step + 1);
    const double c1 = 1.0 - std::pow(s.beta1, t);
    const double c2 = 1.0 - std::pow(s.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        s.first_moment[i] = s.beta1 * s.first_moment[i] + (1.0 - s.beta1) * g;
        s.second_moment[i] = s.beta2 * s.second_moment[i] + (1.0 - s.beta2) * g * g;
        const double mhat = s.first_moment[i] / c1;
        const double vhat = s.second_moment[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
    ++s.step;
}

}  // namespace exprlab
