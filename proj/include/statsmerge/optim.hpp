#pragma once

#include <cstddef>
#include <vector>

namespace statsmerge {

// Adam moments plus the StepLR schedule that every training loop shares.
// Effective learning rate at a given epoch:
//   base_lr * decay_factor^floor(epoch / decay_every)
struct OptimizerState {
    std::size_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double base_lr = 1e-3;
    double decay_factor = 0.1;
    std::size_t decay_every = 100;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState for_size(std::size_t n, double base_lr = 1e-3);

    double effective_lr(std::size_t epoch) const;
};

// One Adam update with bias correction, in place. params, grads and the
// moment vectors must share one length.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& state, std::size_t epoch);

} // namespace statsmerge
