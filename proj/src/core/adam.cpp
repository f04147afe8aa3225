#include "core/adam.hpp"

#include <cmath>

namespace opinn {

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<Tensor>& grads) {
    if (params.size() != grads.size())
        throw InvalidParameterError("adam_step: parameter/gradient count mismatch");
    if (state.first_moment.empty()) {
        for (const Tensor* p : params) {
            state.first_moment.emplace_back(p->rows, p->cols);
            state.second_moment.emplace_back(p->rows, p->cols);
        }
    }
    if (state.first_moment.size() != params.size())
        throw InvalidParameterError("adam_step: moment slots do not match parameters");

    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = grads[k];
        require_same_shape(p, g, "adam_step");
        Tensor& m = state.first_moment[k];
        Tensor& v = state.second_moment[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            double grad = g.data[i] + state.weight_decay * p.data[i];
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * grad;
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * grad * grad;
            double m_hat = m.data[i] / bc1;
            double v_hat = v.data[i] / bc2;
            p.data[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps_hat);
        }
    }
}

}  // namespace opinn
