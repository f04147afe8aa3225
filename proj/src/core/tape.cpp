#include "core/tape.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Dense>

namespace opinn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

MatMap as_mat(Tensor& t) { return MatMap(t.data.data(), t.rows, t.cols); }
ConstMatMap as_mat(const Tensor& t) { return ConstMatMap(t.data.data(), t.rows, t.cols); }

void check_scalar(const Tensor& t, const char* what) {
    if (t.rows != 1 || t.cols != 1)
        throw InvalidParameterError(std::string(what) + ": expected scalar, got " +
                                    t.shape_str());
}

}  // namespace

struct Tape::GruCache {
    Tensor context;                // n x c
    std::vector<Tensor> hidden;    // c+1 states, hidden[0] = 0
    std::vector<Tensor> update;    // z_t
    std::vector<Tensor> reset;     // r_t
    std::vector<Tensor> candidate; // h~_t
};

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

const Tensor& Tape::value(NodeId id) const { return nodes_.at(id).value; }

const Tensor& Tape::grad(NodeId id) const {
    const auto& g = nodes_.at(id).grad;
    if (g.size() == 0)
        throw InvalidParameterError("tape: gradient not available; run backward first");
    return g;
}

Tensor& Tape::grad_slot(NodeId id) { return nodes_.at(id).grad; }

NodeId Tape::leaf(Tensor value) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "add");
    Node n;
    n.op = Op::add;
    n.parents = {a, b};
    n.value = value(a);
    as_mat(n.value) += as_mat(value(b));
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "sub");
    Node n;
    n.op = Op::sub;
    n.parents = {a, b};
    n.value = value(a);
    as_mat(n.value) -= as_mat(value(b));
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "mul");
    Node n;
    n.op = Op::mul;
    n.parents = {a, b};
    n.value = value(a);
    as_mat(n.value).array() *= as_mat(value(b)).array();
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.cols != vb.rows)
        throw InvalidParameterError("matmul: inner dimensions disagree " + va.shape_str() +
                                    " vs " + vb.shape_str());
    Node n;
    n.op = Op::matmul;
    n.parents = {a, b};
    n.value = Tensor(va.rows, vb.cols);
    as_mat(n.value).noalias() = as_mat(va) * as_mat(vb);
    return push(std::move(n));
}

NodeId Tape::add_rowvec(NodeId a, NodeId row) {
    const Tensor& va = value(a);
    const Tensor& vr = value(row);
    if (vr.rows != 1 || vr.cols != va.cols)
        throw InvalidParameterError("add_rowvec: row " + vr.shape_str() +
                                    " does not broadcast over " + va.shape_str());
    Node n;
    n.op = Op::add_rowvec;
    n.parents = {a, row};
    n.value = va;
    as_mat(n.value).rowwise() += as_mat(vr).row(0);
    return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
    Node n;
    n.op = Op::relu;
    n.parents = {a};
    n.value = value(a);
    for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
    Node n;
    n.op = Op::sigmoid;
    n.parents = {a};
    n.value = value(a);
    for (double& v : n.value.data) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(n));
}

NodeId Tape::tanh_(NodeId a) {
    Node n;
    n.op = Op::tanh_;
    n.parents = {a};
    n.value = value(a);
    for (double& v : n.value.data) v = std::tanh(v);
    return push(std::move(n));
}

NodeId Tape::row_softmax(NodeId a) {
    Node n;
    n.op = Op::row_softmax;
    n.parents = {a};
    n.value = value(a);
    for (std::size_t i = 0; i < n.value.rows; ++i) {
        double* row = n.value.data.data() + i * n.value.cols;
        double mx = row[0];
        for (std::size_t j = 1; j < n.value.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < n.value.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < n.value.cols; ++j) row[j] /= sum;
    }
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
    Node n;
    n.op = Op::scale;
    n.parents = {a};
    n.factor = factor;
    n.value = value(a);
    for (double& v : n.value.data) v *= factor;
    return push(std::move(n));
}

NodeId Tape::scale_by(NodeId a, NodeId scalar_node) {
    check_scalar(value(scalar_node), "scale_by");
    Node n;
    n.op = Op::scale_by;
    n.parents = {a, scalar_node};
    double c = value(scalar_node).data[0];
    n.value = value(a);
    for (double& v : n.value.data) v *= c;
    return push(std::move(n));
}

NodeId Tape::mse(NodeId pred, NodeId target) {
    require_same_shape(value(pred), value(target), "mse");
    Node n;
    n.op = Op::mse;
    n.parents = {pred, target};
    const Tensor& p = value(pred);
    const Tensor& t = value(target);
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double d = p.data[k] - t.data[k];
        acc += d * d;
    }
    n.value = Tensor::scalar(acc / static_cast<double>(p.size()));
    return push(std::move(n));
}

NodeId Tape::mean_of(const std::vector<NodeId>& scalars) {
    if (scalars.empty()) throw InvalidParameterError("mean_of: empty list");
    Node n;
    n.op = Op::mean_of;
    n.parents = scalars;
    double acc = 0.0;
    for (NodeId id : scalars) {
        check_scalar(value(id), "mean_of");
        acc += value(id).data[0];
    }
    n.value = Tensor::scalar(acc / static_cast<double>(scalars.size()));
    return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
    const Tensor& va = value(a);
    Node n;
    n.op = Op::transpose;
    n.parents = {a};
    n.value = Tensor(va.cols, va.rows);
    as_mat(n.value) = as_mat(va).transpose();
    return push(std::move(n));
}

NodeId Tape::concat_rows(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.cols != vb.cols)
        throw InvalidParameterError("concat_rows: column counts disagree " + va.shape_str() +
                                    " vs " + vb.shape_str());
    Node n;
    n.op = Op::concat_rows;
    n.parents = {a, b};
    n.value = Tensor(va.rows + vb.rows, va.cols);
    std::copy(va.data.begin(), va.data.end(), n.value.data.begin());
    std::copy(vb.data.begin(), vb.data.end(), n.value.data.begin() + va.size());
    return push(std::move(n));
}

NodeId Tape::slice_rows(NodeId a, std::size_t first, std::size_t count) {
    const Tensor& va = value(a);
    if (first + count > va.rows)
        throw InvalidParameterError("slice_rows: range exceeds " + va.shape_str());
    Node n;
    n.op = Op::slice_rows;
    n.parents = {a};
    n.offset = first;
    n.value = Tensor(count, va.cols);
    std::copy(va.data.begin() + first * va.cols,
              va.data.begin() + (first + count) * va.cols, n.value.data.begin());
    return push(std::move(n));
}

NodeId Tape::spmm(const NormalizedOperator* op, NodeId x) {
    const Tensor& vx = value(x);
    if (vx.rows != op->num_nodes())
        throw InvalidParameterError("spmm: operator rows " + std::to_string(op->num_nodes()) +
                                    " vs input " + vx.shape_str());
    Node n;
    n.op = Op::spmm;
    n.parents = {x};
    n.sparse_op = op;
    n.value = Tensor(vx.rows, vx.cols);
    op->apply(vx.data.data(), n.value.data.data(), vx.cols);
    return push(std::move(n));
}

NodeId Tape::pairwise_diff(NodeId u) {
    const Tensor& vu = value(u);
    if (vu.cols != 1)
        throw InvalidParameterError("pairwise_diff: expected column vector, got " +
                                    vu.shape_str());
    Node n;
    n.op = Op::pairwise_diff;
    n.parents = {u};
    std::size_t m = vu.rows;
    n.value = Tensor(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            n.value(i, j) = vu.data[i] - vu.data[j];
    return push(std::move(n));
}

NodeId Tape::gru_sequence(const Tensor& context, const GruParamIds& p) {
    std::size_t users = context.rows;
    std::size_t steps = context.cols;
    std::size_t d = value(p.w_xz).cols;
    if (steps == 0) throw InvalidParameterError("gru_sequence: empty context");
    for (NodeId w : {p.w_xz, p.w_xr, p.w_xh})
        if (value(w).rows != 1 || value(w).cols != d)
            throw InvalidParameterError("gru_sequence: input weight shape mismatch");
    for (NodeId w : {p.w_hz, p.w_hr, p.w_hh})
        if (value(w).rows != d || value(w).cols != d)
            throw InvalidParameterError("gru_sequence: hidden weight shape mismatch");
    for (NodeId b : {p.b_z, p.b_r, p.b_h})
        if (value(b).rows != 1 || value(b).cols != d)
            throw InvalidParameterError("gru_sequence: bias shape mismatch");

    auto cache = std::make_shared<GruCache>();
    cache->context = context;
    cache->hidden.reserve(steps + 1);
    cache->hidden.push_back(Tensor(users, d));
    cache->update.reserve(steps);
    cache->reset.reserve(steps);
    cache->candidate.reserve(steps);

    ConstMatMap w_xz = as_mat(value(p.w_xz)), w_hz = as_mat(value(p.w_hz));
    ConstMatMap w_xr = as_mat(value(p.w_xr)), w_hr = as_mat(value(p.w_hr));
    ConstMatMap w_xh = as_mat(value(p.w_xh)), w_hh = as_mat(value(p.w_hh));
    ConstMatMap b_z = as_mat(value(p.b_z)), b_r = as_mat(value(p.b_r));
    ConstMatMap b_h = as_mat(value(p.b_h));

    RowMat x_t(users, 1);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t i = 0; i < users; ++i) x_t(i, 0) = context(i, t);
        ConstMatMap h_prev = as_mat(std::as_const(cache->hidden.back()));

        Tensor zt(users, d), rt(users, d), ct(users, d), ht(users, d);
        MatMap z = as_mat(zt), r = as_mat(rt), c = as_mat(ct), h = as_mat(ht);

        z.noalias() = x_t * w_xz;
        z.noalias() += h_prev * w_hz;
        z.rowwise() += b_z.row(0);
        z = ((-z.array()).exp() + 1.0).inverse();

        r.noalias() = x_t * w_xr;
        r.noalias() += h_prev * w_hr;
        r.rowwise() += b_r.row(0);
        r = ((-r.array()).exp() + 1.0).inverse();

        c.noalias() = x_t * w_xh;
        c.noalias() += (r.array() * h_prev.array()).matrix() * w_hh;
        c.rowwise() += b_h.row(0);
        c = c.array().tanh();

        h = (1.0 - z.array()) * h_prev.array() + z.array() * c.array();

        cache->update.push_back(std::move(zt));
        cache->reset.push_back(std::move(rt));
        cache->candidate.push_back(std::move(ct));
        cache->hidden.push_back(std::move(ht));
    }

    Node n;
    n.op = Op::gru_sequence;
    n.parents = {p.w_xz, p.w_hz, p.b_z, p.w_xr, p.w_hr, p.b_r, p.w_xh, p.w_hh, p.b_h};
    n.value = cache->hidden.back();
    n.gru = std::move(cache);
    return push(std::move(n));
}

void Tape::backward(NodeId loss) {
    check_scalar(value(loss), "backward");
    if (ran_backward_) throw InvalidParameterError("tape: backward already ran");
    ran_backward_ = true;

    for (auto& n : nodes_) n.grad = Tensor(n.value.rows, n.value.cols);
    nodes_.at(loss).grad.data[0] = 1.0;

    for (NodeId id = loss; id >= 0; --id) backprop(id);
}

void Tape::backprop(NodeId id) {
    Node& n = nodes_[id];
    const Tensor& g = n.grad;
    switch (n.op) {
        case Op::leaf:
            break;
        case Op::add: {
            as_mat(grad_slot(n.parents[0])) += as_mat(g);
            as_mat(grad_slot(n.parents[1])) += as_mat(g);
            break;
        }
        case Op::sub: {
            as_mat(grad_slot(n.parents[0])) += as_mat(g);
            as_mat(grad_slot(n.parents[1])) -= as_mat(g);
            break;
        }
        case Op::mul: {
            as_mat(grad_slot(n.parents[0])).array() +=
                as_mat(g).array() * as_mat(value(n.parents[1])).array();
            as_mat(grad_slot(n.parents[1])).array() +=
                as_mat(g).array() * as_mat(value(n.parents[0])).array();
            break;
        }
        case Op::matmul: {
            as_mat(grad_slot(n.parents[0])).noalias() +=
                as_mat(g) * as_mat(value(n.parents[1])).transpose();
            as_mat(grad_slot(n.parents[1])).noalias() +=
                as_mat(value(n.parents[0])).transpose() * as_mat(g);
            break;
        }
        case Op::add_rowvec: {
            as_mat(grad_slot(n.parents[0])) += as_mat(g);
            as_mat(grad_slot(n.parents[1])).row(0) += as_mat(g).colwise().sum();
            break;
        }
        case Op::relu: {
            Tensor& pg = grad_slot(n.parents[0]);
            for (std::size_t k = 0; k < g.size(); ++k)
                if (n.value.data[k] > 0.0) pg.data[k] += g.data[k];
            break;
        }
        case Op::sigmoid: {
            Tensor& pg = grad_slot(n.parents[0]);
            for (std::size_t k = 0; k < g.size(); ++k) {
                double s = n.value.data[k];
                pg.data[k] += g.data[k] * s * (1.0 - s);
            }
            break;
        }
        case Op::tanh_: {
            Tensor& pg = grad_slot(n.parents[0]);
            for (std::size_t k = 0; k < g.size(); ++k) {
                double y = n.value.data[k];
                pg.data[k] += g.data[k] * (1.0 - y * y);
            }
            break;
        }
        case Op::row_softmax: {
            Tensor& pg = grad_slot(n.parents[0]);
            for (std::size_t i = 0; i < g.rows; ++i) {
                const double* s = n.value.data.data() + i * g.cols;
                const double* gr = g.data.data() + i * g.cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols; ++j) dot += s[j] * gr[j];
                double* out = pg.data.data() + i * g.cols;
                for (std::size_t j = 0; j < g.cols; ++j) out[j] += s[j] * (gr[j] - dot);
            }
            break;
        }
        case Op::scale: {
            Tensor& pg = grad_slot(n.parents[0]);
            for (std::size_t k = 0; k < g.size(); ++k) pg.data[k] += n.factor * g.data[k];
            break;
        }
        case Op::scale_by: {
            double c = value(n.parents[1]).data[0];
            Tensor& pg = grad_slot(n.parents[0]);
            const Tensor& a = value(n.parents[0]);
            double acc = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                pg.data[k] += c * g.data[k];
                acc += g.data[k] * a.data[k];
            }
            grad_slot(n.parents[1]).data[0] += acc;
            break;
        }
        case Op::mse: {
            double gl = g.data[0];
            const Tensor& p = value(n.parents[0]);
            const Tensor& t = value(n.parents[1]);
            double scale = 2.0 * gl / static_cast<double>(p.size());
            Tensor& gp = grad_slot(n.parents[0]);
            Tensor& gt = grad_slot(n.parents[1]);
            for (std::size_t k = 0; k < p.size(); ++k) {
                double d = scale * (p.data[k] - t.data[k]);
                gp.data[k] += d;
                gt.data[k] -= d;
            }
            break;
        }
        case Op::mean_of: {
            double share = g.data[0] / static_cast<double>(n.parents.size());
            for (NodeId p : n.parents) grad_slot(p).data[0] += share;
            break;
        }
        case Op::transpose: {
            as_mat(grad_slot(n.parents[0])) += as_mat(g).transpose();
            break;
        }
        case Op::concat_rows: {
            Tensor& ga = grad_slot(n.parents[0]);
            Tensor& gb = grad_slot(n.parents[1]);
            std::size_t split = ga.size();
            for (std::size_t k = 0; k < split; ++k) ga.data[k] += g.data[k];
            for (std::size_t k = 0; k < gb.size(); ++k) gb.data[k] += g.data[split + k];
            break;
        }
        case Op::slice_rows: {
            Tensor& pg = grad_slot(n.parents[0]);
            std::size_t base = n.offset * g.cols;
            for (std::size_t k = 0; k < g.size(); ++k) pg.data[base + k] += g.data[k];
            break;
        }
        case Op::spmm: {
            // symmetric operator: adjoint equals the operator itself
            Tensor tmp(g.rows, g.cols);
            n.sparse_op->apply(g.data.data(), tmp.data.data(), g.cols);
            as_mat(grad_slot(n.parents[0])) += as_mat(tmp);
            break;
        }
        case Op::pairwise_diff: {
            Tensor& pg = grad_slot(n.parents[0]);
            std::size_t m = g.rows;
            for (std::size_t i = 0; i < m; ++i) {
                double row_sum = 0.0;
                for (std::size_t j = 0; j < m; ++j) row_sum += g(i, j);
                pg.data[i] += row_sum;
            }
            for (std::size_t j = 0; j < m; ++j) {
                double col_sum = 0.0;
                for (std::size_t i = 0; i < m; ++i) col_sum += g(i, j);
                pg.data[j] -= col_sum;
            }
            break;
        }
        case Op::gru_sequence: {
            const GruCache& cache = *n.gru;
            std::size_t users = cache.context.rows;
            std::size_t steps = cache.context.cols;
            std::size_t d = n.value.cols;

            ConstMatMap w_hz = as_mat(value(n.parents[1]));
            ConstMatMap w_hr = as_mat(value(n.parents[4]));
            ConstMatMap w_hh = as_mat(value(n.parents[7]));

            MatMap g_wxz = as_mat(grad_slot(n.parents[0]));
            MatMap g_whz = as_mat(grad_slot(n.parents[1]));
            MatMap g_bz = as_mat(grad_slot(n.parents[2]));
            MatMap g_wxr = as_mat(grad_slot(n.parents[3]));
            MatMap g_whr = as_mat(grad_slot(n.parents[4]));
            MatMap g_br = as_mat(grad_slot(n.parents[5]));
            MatMap g_wxh = as_mat(grad_slot(n.parents[6]));
            MatMap g_whh = as_mat(grad_slot(n.parents[7]));
            MatMap g_bh = as_mat(grad_slot(n.parents[8]));

            RowMat gh = as_mat(g);  // dL/dH_t flowing backwards
            RowMat x_t(users, 1);
            RowMat ga_z(users, d), ga_r(users, d), ga_h(users, d), grh(users, d);
            for (std::size_t t = steps; t-- > 0;) {
                ConstMatMap h_prev = as_mat(cache.hidden[t]);
                ConstMatMap z = as_mat(cache.update[t]);
                ConstMatMap r = as_mat(cache.reset[t]);
                ConstMatMap c = as_mat(cache.candidate[t]);
                for (std::size_t i = 0; i < users; ++i) x_t(i, 0) = cache.context(i, t);

                // H_t = (1-z) h_prev + z c
                RowMat gz = (gh.array() * (c.array() - h_prev.array())).matrix();
                RowMat gc = (gh.array() * z.array()).matrix();
                RowMat gh_prev = (gh.array() * (1.0 - z.array())).matrix();

                ga_h = (gc.array() * (1.0 - c.array().square())).matrix();
                g_wxh.noalias() += x_t.transpose() * ga_h;
                g_bh.row(0) += ga_h.colwise().sum();
                g_whh.noalias() +=
                    (r.array() * h_prev.array()).matrix().transpose() * ga_h;
                grh.noalias() = ga_h * w_hh.transpose();
                RowMat gr = (grh.array() * h_prev.array()).matrix();
                gh_prev.array() += grh.array() * r.array();

                ga_z = (gz.array() * z.array() * (1.0 - z.array())).matrix();
                g_wxz.noalias() += x_t.transpose() * ga_z;
                g_whz.noalias() += h_prev.transpose() * ga_z;
                g_bz.row(0) += ga_z.colwise().sum();
                gh_prev.noalias() += ga_z * w_hz.transpose();

                ga_r = (gr.array() * r.array() * (1.0 - r.array())).matrix();
                g_wxr.noalias() += x_t.transpose() * ga_r;
                g_whr.noalias() += h_prev.transpose() * ga_r;
                g_br.row(0) += ga_r.colwise().sum();
                gh_prev.noalias() += ga_r * w_hr.transpose();

                gh = std::move(gh_prev);
            }
            break;
        }
    }
}

}  // namespace opinn
