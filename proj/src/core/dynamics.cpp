#include "core/dynamics.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace opinn {

ReactionKind reaction_from_name(const std::string& name) {
    if (name == "source") return ReactionKind::source;
    if (name == "linear") return ReactionKind::linear;
    if (name == "nonlinear") return ReactionKind::nonlinear;
    throw InvalidParameterError("unknown reaction term '" + name + "'");
}

std::string reaction_name(ReactionKind k) {
    switch (k) {
        case ReactionKind::source: return "source";
        case ReactionKind::linear: return "linear";
        case ReactionKind::nonlinear: return "nonlinear";
    }
    throw InvalidParameterError("unknown reaction enum");
}

Ablation ablation_from_name(const std::string& name) {
    if (name == "full") return Ablation::full;
    if (name == "no_dif") return Ablation::no_dif;
    if (name == "no_con") return Ablation::no_con;
    if (name == "no_rea") return Ablation::no_rea;
    throw InvalidParameterError("unknown ablation variant '" + name + "'");
}

std::string ablation_name(Ablation a) {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::no_dif: return "no_dif";
        case Ablation::no_con: return "no_con";
        case Ablation::no_rea: return "no_rea";
    }
    throw InvalidParameterError("unknown ablation enum");
}

namespace {

Tensor random_weight(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(rows, cols);
    for (double& v : t.data) v = dist(rng);
    return t;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

DcrField DcrField::init(std::size_t dim, ReactionKind reaction, Ablation ablation,
                        const NormalizedOperator* op, std::mt19937_64& rng) {
    DcrField f;
    f.dim = dim;
    f.reaction = reaction;
    f.ablation = ablation;
    f.op = op;
    f.w_diff = random_weight(dim, dim, rng);
    f.w_conv = random_weight(dim, dim, rng);
    f.w_vel = random_weight(dim, 1, rng);
    if (reaction != ReactionKind::source) {
        f.w_rea1 = random_weight(dim, dim, rng);
        f.b_rea1 = Tensor(1, dim);
        if (reaction == ReactionKind::nonlinear) {
            f.w_rea2 = random_weight(dim, dim, rng);
            f.b_rea2 = Tensor(1, dim);
        }
    }
    f.gate_omega_raw = Tensor::scalar(0.0);  // omega = 0.5 at initialization
    f.gate_delta_raw = Tensor::scalar(0.0);
    return f;
}

std::vector<std::pair<std::string, Tensor*>> DcrField::params() {
    std::vector<std::pair<std::string, Tensor*>> out;
    bool has_dif = ablation != Ablation::no_dif;
    bool has_con = ablation != Ablation::no_con;
    bool has_rea = ablation != Ablation::no_rea;
    if (has_dif) out.emplace_back("field.w_diff", &w_diff);
    if (has_con) {
        out.emplace_back("field.w_conv", &w_conv);
        out.emplace_back("field.w_vel", &w_vel);
    }
    if (has_dif && has_con) out.emplace_back("field.gate_omega_raw", &gate_omega_raw);
    if (has_rea) {
        if (reaction != ReactionKind::source) {
            out.emplace_back("field.w_rea1", &w_rea1);
            out.emplace_back("field.b_rea1", &b_rea1);
            if (reaction == ReactionKind::nonlinear) {
                out.emplace_back("field.w_rea2", &w_rea2);
                out.emplace_back("field.b_rea2", &b_rea2);
            }
        }
        out.emplace_back("field.gate_delta_raw", &gate_delta_raw);
    }
    return out;
}

double DcrField::omega() const { return logistic(gate_omega_raw.data[0]); }
double DcrField::delta() const { return logistic(gate_delta_raw.data[0]); }

DcrFieldNodes register_field(Tape& tape, const DcrField& field) {
    DcrFieldNodes n;
    bool has_dif = field.ablation != Ablation::no_dif;
    bool has_con = field.ablation != Ablation::no_con;
    bool has_rea = field.ablation != Ablation::no_rea;
    if (has_dif) n.w_diff = tape.leaf(field.w_diff);
    if (has_con) {
        n.w_conv = tape.leaf(field.w_conv);
        n.w_vel = tape.leaf(field.w_vel);
    }
    if (has_dif && has_con) n.gate_omega_raw = tape.leaf(field.gate_omega_raw);
    if (has_rea) {
        if (field.reaction != ReactionKind::source) {
            n.w_rea1 = tape.leaf(field.w_rea1);
            n.b_rea1 = tape.leaf(field.b_rea1);
            if (field.reaction == ReactionKind::nonlinear) {
                n.w_rea2 = tape.leaf(field.w_rea2);
                n.b_rea2 = tape.leaf(field.b_rea2);
            }
        }
        n.gate_delta_raw = tape.leaf(field.gate_delta_raw);
    }
    return n;
}

NodeId diffusion_term(Tape& tape, const DcrField& field, const DcrFieldNodes& nodes,
                      NodeId z) {
    return tape.relu(tape.matmul(tape.spmm(field.op, z), nodes.w_diff));
}

NodeId convection_term(Tape& tape, const DcrFieldNodes& nodes, NodeId z) {
    NodeId velocity = tape.relu(tape.pairwise_diff(tape.matmul(z, nodes.w_vel)));
    NodeId weights = tape.row_softmax(velocity);
    return tape.matmul(tape.matmul(weights, z), nodes.w_conv);
}

NodeId reaction_term(Tape& tape, const DcrField& field, const DcrFieldNodes& nodes,
                     NodeId z) {
    switch (field.reaction) {
        case ReactionKind::source:
            return z;
        case ReactionKind::linear:
            return tape.add_rowvec(tape.matmul(z, nodes.w_rea1), nodes.b_rea1);
        case ReactionKind::nonlinear: {
            NodeId hidden =
                tape.tanh_(tape.add_rowvec(tape.matmul(z, nodes.w_rea1), nodes.b_rea1));
            return tape.add_rowvec(tape.matmul(hidden, nodes.w_rea2), nodes.b_rea2);
        }
    }
    throw InvalidParameterError("unknown reaction enum");
}

NodeId field_eval(Tape& tape, const DcrField& field, const DcrFieldNodes& nodes, NodeId z) {
    bool has_dif = field.ablation != Ablation::no_dif;
    bool has_con = field.ablation != Ablation::no_con;
    bool has_rea = field.ablation != Ablation::no_rea;

    NodeId transport;
    if (has_dif && has_con) {
        NodeId omega = tape.sigmoid(nodes.gate_omega_raw);
        NodeId one_minus_omega = tape.sub(tape.leaf(Tensor::scalar(1.0)), omega);
        transport = tape.add(tape.scale_by(diffusion_term(tape, field, nodes, z), omega),
                             tape.scale_by(convection_term(tape, nodes, z),
                                           one_minus_omega));
    } else if (has_dif) {
        transport = diffusion_term(tape, field, nodes, z);
    } else {
        transport = convection_term(tape, nodes, z);
    }

    if (!has_rea) return transport;
    NodeId delta = tape.sigmoid(nodes.gate_delta_raw);
    return tape.add(transport, tape.scale_by(reaction_term(tape, field, nodes, z), delta));
}

}  // namespace opinn
