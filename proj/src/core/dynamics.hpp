#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "core/graph.hpp"
#include "core/tape.hpp"

namespace opinn {

enum class ReactionKind { source, linear, nonlinear };
enum class Ablation { full, no_dif, no_con, no_rea };

ReactionKind reaction_from_name(const std::string& name);
std::string reaction_name(ReactionKind k);
Ablation ablation_from_name(const std::string& name);
std::string ablation_name(Ablation a);

// The neural vector field over the latent system state (N x D):
//   diffusion:  relu(A_hat Z W_D), sparse graph propagation
//   convection: row_softmax(V) Z W_C with V_ij = relu((z_i - z_j) W_V), dense
//   reaction:   Z | linear(Z) | two-layer perceptron(Z), per configuration
// blended by gates omega, delta = logistic of the raw parameters. Dropping a
// transport branch (ablation) gives the surviving branch weight 1.
struct DcrField {
    std::size_t dim = 0;
    ReactionKind reaction = ReactionKind::source;
    Ablation ablation = Ablation::full;

    Tensor w_diff;  // D x D
    Tensor w_conv;  // D x D
    Tensor w_vel;   // D x 1
    Tensor w_rea1, b_rea1;  // linear layer (and hidden layer of the perceptron)
    Tensor w_rea2, b_rea2;  // perceptron output layer
    Tensor gate_omega_raw;  // 1 x 1, 0 => omega = 0.5
    Tensor gate_delta_raw;  // 1 x 1

    const NormalizedOperator* op = nullptr;

    static DcrField init(std::size_t dim, ReactionKind reaction, Ablation ablation,
                         const NormalizedOperator* op, std::mt19937_64& rng);

    // Trainable tensors actually used under the configured variant.
    std::vector<std::pair<std::string, Tensor*>> params();

    double omega() const;
    double delta() const;
};

// Leaf ids of the field parameters on a tape; unused branches hold -1.
struct DcrFieldNodes {
    NodeId w_diff = -1, w_conv = -1, w_vel = -1;
    NodeId w_rea1 = -1, b_rea1 = -1, w_rea2 = -1, b_rea2 = -1;
    NodeId gate_omega_raw = -1, gate_delta_raw = -1;
};

DcrFieldNodes register_field(Tape& tape, const DcrField& field);

NodeId diffusion_term(Tape& tape, const DcrField& field, const DcrFieldNodes& nodes,
                      NodeId z);
NodeId convection_term(Tape& tape, const DcrFieldNodes& nodes, NodeId z);
NodeId reaction_term(Tape& tape, const DcrField& field, const DcrFieldNodes& nodes,
                     NodeId z);

// The gated sum of the three branches; dZ/dt as a function of Z.
NodeId field_eval(Tape& tape, const DcrField& field, const DcrFieldNodes& nodes, NodeId z);

}  // namespace opinn
