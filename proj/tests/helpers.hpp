#pragma once

#include <functional>
#include <random>
#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace testutil {

inline opinn::Tensor random_tensor(std::size_t rows, std::size_t cols,
                                   std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    opinn::Tensor t(rows, cols);
    for (double& v : t.data) v = dist(rng);
    return t;
}

// Builds a scalar loss on the given tape from leaves registered for `params`
// in order.
using LossBuilder =
    std::function<opinn::NodeId(opinn::Tape&, const std::vector<opinn::NodeId>&)>;

inline double eval_loss(const std::vector<opinn::Tensor>& params,
                        const LossBuilder& build) {
    opinn::Tape tape;
    std::vector<opinn::NodeId> leaves;
    leaves.reserve(params.size());
    for (const auto& p : params) leaves.push_back(tape.leaf(p));
    return tape.value(build(tape, leaves)).data[0];
}

// Max relative error between reverse-mode gradients and central finite
// differences over every element of every parameter.
inline double max_grad_rel_error(std::vector<opinn::Tensor> params,
                                 const LossBuilder& build, double h = 1e-5) {
    opinn::Tape tape;
    std::vector<opinn::NodeId> leaves;
    for (const auto& p : params) leaves.push_back(tape.leaf(p));
    tape.backward(build(tape, leaves));

    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const opinn::Tensor& analytic = tape.grad(leaves[k]);
        for (std::size_t i = 0; i < params[k].size(); ++i) {
            double saved = params[k].data[i];
            params[k].data[i] = saved + h;
            double up = eval_loss(params, build);
            params[k].data[i] = saved - h;
            double down = eval_loss(params, build);
            params[k].data[i] = saved;

            double fd = (up - down) / (2.0 * h);
            double g = analytic.data[i];
            double denom = std::max({std::abs(fd), std::abs(g), 1e-6});
            worst = std::max(worst, std::abs(fd - g) / denom);
        }
    }
    return worst;
}

}  // namespace testutil
