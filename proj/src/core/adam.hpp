#pragma once

#include <cstddef>
#include <vector>

#include "core/tensor.hpp"

namespace opinn {

// Adam with classic L2 weight decay folded into the gradient and bias
// correction. Moment slots are allocated lazily on the first step.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    double weight_decay = 5e-5;
    std::size_t step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
};

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<Tensor>& grads);

}  // namespace opinn
