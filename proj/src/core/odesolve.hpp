#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace opinn {

enum class SolverMethod { euler, rk4, dopri5 };

SolverMethod solver_method_from_name(const std::string& name);
std::string solver_method_name(SolverMethod m);

struct SolverConfig {
    SolverMethod method = SolverMethod::rk4;
    double step_size = 1.0;   // fixed-step methods
    double rtol = 1e-5;       // dopri5
    double atol = 1e-7;       // dopri5
    std::size_t max_substeps = 10000;
};

// Plain (non-differentiable) vector field on tensors.
using Field = std::function<Tensor(const Tensor&)>;

Tensor euler_step(const Field& f, const Tensor& z, double h);
Tensor rk4_step(const Field& f, const Tensor& z, double h);

// One Dormand-Prince 5(4) trial step; also returns the embedded error
// estimate (max norm of the 5th/4th order difference, scaled by
// rtol*|z| + atol per component).
struct Dopri5Result {
    Tensor z_next;
    double scaled_error;
};
Dopri5Result dopri5_substep(const Field& f, const Tensor& z, double h, double rtol,
                            double atol);

// States at system times 1..n_system_steps starting from z0. Fixed-step
// methods take ceil(1/step_size) substeps per unit; dopri5 adapts within
// each unit interval. Throws NumericError on divergence or when dopri5
// exceeds max_substeps.
std::vector<Tensor> integrate(const Field& f, const Tensor& z0, std::size_t n_system_steps,
                              const SolverConfig& cfg);

// Differentiable unrolled steps over a tape-recorded field. One unit of
// system time per call.
using TapeField = std::function<NodeId(Tape&, NodeId)>;

NodeId euler_step_tape(Tape& tape, const TapeField& f, NodeId z, double h);
NodeId rk4_step_tape(Tape& tape, const TapeField& f, NodeId z, double h);

}  // namespace opinn
