#include "cpglab/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace cpglab::ad {

void adam_step(Tensor& param, AdamState& state, const AdamConfig& cfg) {
    size_t n = param.size();
    if (state.m.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    if (state.m.size() != n)
        throw std::invalid_argument("adam_step: state size does not match parameter");
    ++state.step;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < n; ++i) {
        double g = param.grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        param.value[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        param.value[i] -= cfg.learning_rate * cfg.weight_decay * param.value[i];
    }
}

void Adam::step(std::map<std::string, TensorPtr>& params) {
    for (auto& [name, p] : params) adam_step(*p, state_[name], cfg_);
}

}  // namespace cpglab::ad
