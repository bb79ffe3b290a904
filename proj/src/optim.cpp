#include "statsmerge/optim.hpp"

#include <cmath>
#include <string>

#include "statsmerge/error.hpp"

namespace statsmerge {

OptimizerState OptimizerState::for_size(std::size_t n, double base_lr) {
    OptimizerState state;
    state.first_moment.assign(n, 0.0);
    state.second_moment.assign(n, 0.0);
    state.base_lr = base_lr;
    return state;
}

double OptimizerState::effective_lr(std::size_t epoch) const {
    const std::size_t drops = (decay_every == 0) ? 0 : epoch / decay_every;
    return base_lr * std::pow(decay_factor, static_cast<double>(drops));
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& state, std::size_t epoch) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
        throw ShapeError("adam_step: params/grads/moments length mismatch (" +
                         std::to_string(n) + ", " + std::to_string(grads.size()) + ", " +
                         std::to_string(state.first_moment.size()) + ")");
    }
    state.step_count += 1;
    const double lr = state.effective_lr(epoch);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < n; ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
        v = state.beta2 * v + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

} // namespace statsmerge
