#pragma once

#include <map>
#include <string>

#include "cpglab/tensor.hpp"

namespace cpglab::ad {

struct AdamConfig {
    double learning_rate = 1e-4;
    double weight_decay = 1e-3;  // decoupled
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};

// One AdamW update from param->grad. State slots are created on first use.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(std::map<std::string, TensorPtr>& params);
    const AdamConfig& config() const { return cfg_; }
    void reset() { state_.clear(); }

private:
    AdamConfig cfg_;
    std::map<std::string, AdamState> state_;
};

void adam_step(Tensor& param, AdamState& state, const AdamConfig& cfg);

}  // namespace cpglab::ad
