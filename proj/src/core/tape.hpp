#pragma once

#include <array>
#include <memory>
#include <vector>

#include "core/graph.hpp"
#include "core/tensor.hpp"

namespace opinn {

using NodeId = int;

// GRU parameter node ids in the order consumed by Tape::gru_sequence:
// input weights (1xD), hidden weights (DxD), and biases (1xD) for the
// update gate, reset gate, and candidate state.
struct GruParamIds {
    NodeId w_xz, w_hz, b_z;
    NodeId w_xr, w_hr, b_r;
    NodeId w_xh, w_hh, b_h;
};

// Records a dense differentiable computation. Build the forward pass with the
// op methods, call backward() on a scalar node, then read grad() of leaves.
// A tape is single use and single threaded.
class Tape {
public:
    NodeId leaf(Tensor value);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);  // elementwise
    NodeId matmul(NodeId a, NodeId b);
    NodeId add_rowvec(NodeId a, NodeId row);  // broadcast a 1xC row over rows of a
    NodeId relu(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId tanh_(NodeId a);
    NodeId row_softmax(NodeId a);
    NodeId scale(NodeId a, double factor);
    NodeId scale_by(NodeId a, NodeId scalar_node);
    NodeId mse(NodeId pred, NodeId target);
    NodeId mean_of(const std::vector<NodeId>& scalars);
    NodeId transpose(NodeId a);
    NodeId concat_rows(NodeId a, NodeId b);
    NodeId slice_rows(NodeId a, std::size_t first, std::size_t count);

    // y = A_hat x, with the symmetric normalized operator applied row-sparse.
    // The operator must outlive the tape.
    NodeId spmm(const NormalizedOperator* op, NodeId x);

    // u: (n x 1) -> (n x n) with out_ij = u_i - u_j.
    NodeId pairwise_diff(NodeId u);

    // Runs a shared-weight GRU over the columns of `context` (one scalar
    // input per user per step, oldest first) from a zero hidden state and
    // returns the final hidden state (n x d). Fused forward/backward.
    NodeId gru_sequence(const Tensor& context, const GruParamIds& p);

    const Tensor& value(NodeId id) const;
    const Tensor& grad(NodeId id) const;

    // Reverse-mode accumulation from a scalar loss, deterministic order.
    void backward(NodeId loss);

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    enum class Op {
        leaf, add, sub, mul, matmul, add_rowvec, relu, sigmoid, tanh_, row_softmax,
        scale, scale_by, mse, mean_of, transpose, concat_rows, slice_rows, spmm,
        pairwise_diff,
        gru_sequence,
    };

    struct GruCache;

    struct Node {
        Op op;
        Tensor value;
        Tensor grad;
        std::vector<NodeId> parents;
        double factor = 0.0;       // scale
        std::size_t offset = 0;    // slice_rows
        const NormalizedOperator* sparse_op = nullptr;
        std::shared_ptr<GruCache> gru;
    };

    NodeId push(Node n);
    void backprop(NodeId id);
    Tensor& grad_slot(NodeId id);

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

}  // namespace opinn
