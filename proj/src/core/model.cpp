#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace opinn {

using nlohmann::json;

EncoderKind encoder_from_name(const std::string& name) {
    if (name == "gru") return EncoderKind::gru;
    if (name == "linear") return EncoderKind::linear;
    if (name == "mlp") return EncoderKind::mlp;
    if (name == "transformer_block") return EncoderKind::transformer_block;
    throw InvalidParameterError("unknown encoder '" + name + "'");
}

std::string encoder_name(EncoderKind k) {
    switch (k) {
        case EncoderKind::gru: return "gru";
        case EncoderKind::linear: return "linear";
        case EncoderKind::mlp: return "mlp";
        case EncoderKind::transformer_block: return "transformer_block";
    }
    throw InvalidParameterError("unknown encoder enum");
}

void SplitSpec::validate() const {
    if (train <= 0.0 || val < 0.0 || test <= 0.0)
        throw InvalidParameterError("split: ratios must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw InvalidParameterError("split: ratios must sum to 1");
}

std::pair<std::size_t, std::size_t> SplitSpec::boundaries(std::size_t total_cols) const {
    validate();
    auto t1 = static_cast<std::size_t>(std::llround(train * static_cast<double>(total_cols)));
    auto t2 = static_cast<std::size_t>(
        std::llround((train + val) * static_cast<double>(total_cols)));
    return {t1, t2};
}

std::string OpinnConfig::to_json() const {
    json j;
    j["hidden_dim"] = hidden_dim;
    j["context_len"] = context_len;
    j["block_len"] = block_len;
    j["encoder"] = encoder_name(encoder);
    j["reaction"] = reaction_name(reaction);
    j["ablation"] = ablation_name(ablation);
    j["solver"] = {{"method", solver_method_name(solver.method)},
                   {"step_size", solver.step_size},
                   {"rtol", solver.rtol},
                   {"atol", solver.atol},
                   {"max_substeps", solver.max_substeps}};
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["train_horizon_steps"] = train_horizon_steps;
    j["weight_decay"] = weight_decay;
    j["seed"] = seed;
    return j.dump(2);
}

OpinnConfig OpinnConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    OpinnConfig cfg;
    try {
        cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
        cfg.context_len = j.value("context_len", cfg.context_len);
        cfg.block_len = j.value("block_len", cfg.block_len);
        if (j.contains("encoder")) cfg.encoder = encoder_from_name(j["encoder"]);
        if (j.contains("reaction")) cfg.reaction = reaction_from_name(j["reaction"]);
        if (j.contains("ablation")) cfg.ablation = ablation_from_name(j["ablation"]);
        if (j.contains("solver")) {
            const auto& s = j["solver"];
            if (s.contains("method"))
                cfg.solver.method = solver_method_from_name(s["method"]);
            cfg.solver.step_size = s.value("step_size", cfg.solver.step_size);
            cfg.solver.rtol = s.value("rtol", cfg.solver.rtol);
            cfg.solver.atol = s.value("atol", cfg.solver.atol);
            cfg.solver.max_substeps = s.value("max_substeps", cfg.solver.max_substeps);
        }
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.epochs = j.value("epochs", cfg.epochs);
        cfg.train_horizon_steps = j.value("train_horizon_steps", cfg.train_horizon_steps);
        cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    if (cfg.hidden_dim == 0 || cfg.context_len == 0 || cfg.block_len == 0 ||
        cfg.batch_size == 0)
        throw InvalidParameterError("config: dimensions and batch size must be positive");
    return cfg;
}

std::string TrainReport::to_json() const {
    json j;
    j["train_loss"] = train_loss;
    j["val_rmse"] = val_rmse;
    j["best_epoch"] = best_epoch;
    j["best_val_rmse"] = best_val_rmse;
    return j.dump(2);
}

namespace {

Tensor random_weight(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(rows, cols);
    for (double& v : t.data) v = dist(rng);
    return t;
}

}  // namespace

OpinnModel::OpinnModel(const OpinnConfig& cfg, const NormalizedOperator* op)
    : cfg_(cfg) {
    auto rng = make_stream(cfg.seed, "weights");
    std::size_t d = cfg.hidden_dim;
    std::size_t c = cfg.context_len;

    switch (cfg.encoder) {
        case EncoderKind::gru:
            gru_w_xz_ = random_weight(1, d, rng);
            gru_w_hz_ = random_weight(d, d, rng);
            gru_b_z_ = Tensor(1, d);
            gru_w_xr_ = random_weight(1, d, rng);
            gru_w_hr_ = random_weight(d, d, rng);
            gru_b_r_ = Tensor(1, d);
            gru_w_xh_ = random_weight(1, d, rng);
            gru_w_hh_ = random_weight(d, d, rng);
            gru_b_h_ = Tensor(1, d);
            break;
        case EncoderKind::linear:
            enc_w1_ = random_weight(c, d, rng);
            enc_b1_ = Tensor(1, d);
            break;
        case EncoderKind::mlp:
            enc_w1_ = random_weight(c, d, rng);
            enc_b1_ = Tensor(1, d);
            enc_w2_ = random_weight(d, d, rng);
            enc_b2_ = Tensor(1, d);
            break;
        case EncoderKind::transformer_block:
            enc_w1_ = random_weight(1, d, rng);  // token embedding of the scalar input
            enc_pos_ = random_weight(c, d, rng);
            enc_wq_ = random_weight(d, d, rng);
            enc_wk_ = random_weight(d, d, rng);
            enc_wv_ = random_weight(d, d, rng);
            break;
    }

    field_ = DcrField::init(d, cfg.reaction, cfg.ablation, op, rng);

    dec_w1_ = random_weight(d, d, rng);
    dec_b1_ = Tensor(1, d);
    dec_w2_ = random_weight(d, cfg.block_len, rng);
    dec_b2_ = Tensor(1, cfg.block_len);

    adam_.learning_rate = cfg.learning_rate;
    adam_.weight_decay = cfg.weight_decay;
}

std::vector<std::pair<std::string, Tensor*>> OpinnModel::params() {
    std::vector<std::pair<std::string, Tensor*>> out;
    switch (cfg_.encoder) {
        case EncoderKind::gru:
            out.emplace_back("enc.gru.w_xz", &gru_w_xz_);
            out.emplace_back("enc.gru.w_hz", &gru_w_hz_);
            out.emplace_back("enc.gru.b_z", &gru_b_z_);
            out.emplace_back("enc.gru.w_xr", &gru_w_xr_);
            out.emplace_back("enc.gru.w_hr", &gru_w_hr_);
            out.emplace_back("enc.gru.b_r", &gru_b_r_);
            out.emplace_back("enc.gru.w_xh", &gru_w_xh_);
            out.emplace_back("enc.gru.w_hh", &gru_w_hh_);
            out.emplace_back("enc.gru.b_h", &gru_b_h_);
            break;
        case EncoderKind::linear:
            out.emplace_back("enc.w1", &enc_w1_);
            out.emplace_back("enc.b1", &enc_b1_);
            break;
        case EncoderKind::mlp:
            out.emplace_back("enc.w1", &enc_w1_);
            out.emplace_back("enc.b1", &enc_b1_);
            out.emplace_back("enc.w2", &enc_w2_);
            out.emplace_back("enc.b2", &enc_b2_);
            break;
        case EncoderKind::transformer_block:
            out.emplace_back("enc.w_emb", &enc_w1_);
            out.emplace_back("enc.pos", &enc_pos_);
            out.emplace_back("enc.w_q", &enc_wq_);
            out.emplace_back("enc.w_k", &enc_wk_);
            out.emplace_back("enc.w_v", &enc_wv_);
            break;
    }
    for (auto& [name, tensor] : field_.params()) out.emplace_back(name, tensor);
    out.emplace_back("dec.w1", &dec_w1_);
    out.emplace_back("dec.b1", &dec_b1_);
    out.emplace_back("dec.w2", &dec_w2_);
    out.emplace_back("dec.b2", &dec_b2_);
    return out;
}

OpinnModel::ParamNodes OpinnModel::register_params(Tape& tape) {
    ParamNodes n;
    switch (cfg_.encoder) {
        case EncoderKind::gru:
            n.gru.w_xz = tape.leaf(gru_w_xz_);
            n.gru.w_hz = tape.leaf(gru_w_hz_);
            n.gru.b_z = tape.leaf(gru_b_z_);
            n.gru.w_xr = tape.leaf(gru_w_xr_);
            n.gru.w_hr = tape.leaf(gru_w_hr_);
            n.gru.b_r = tape.leaf(gru_b_r_);
            n.gru.w_xh = tape.leaf(gru_w_xh_);
            n.gru.w_hh = tape.leaf(gru_w_hh_);
            n.gru.b_h = tape.leaf(gru_b_h_);
            break;
        case EncoderKind::linear:
            n.enc_w1 = tape.leaf(enc_w1_);
            n.enc_b1 = tape.leaf(enc_b1_);
            break;
        case EncoderKind::mlp:
            n.enc_w1 = tape.leaf(enc_w1_);
            n.enc_b1 = tape.leaf(enc_b1_);
            n.enc_w2 = tape.leaf(enc_w2_);
            n.enc_b2 = tape.leaf(enc_b2_);
            break;
        case EncoderKind::transformer_block:
            n.enc_w1 = tape.leaf(enc_w1_);
            n.enc_pos = tape.leaf(enc_pos_);
            n.enc_wq = tape.leaf(enc_wq_);
            n.enc_wk = tape.leaf(enc_wk_);
            n.enc_wv = tape.leaf(enc_wv_);
            break;
    }
    n.field = register_field(tape, field_);
    n.dec_w1 = tape.leaf(dec_w1_);
    n.dec_b1 = tape.leaf(dec_b1_);
    n.dec_w2 = tape.leaf(dec_w2_);
    n.dec_b2 = tape.leaf(dec_b2_);
    return n;
}

std::vector<Tensor> OpinnModel::param_grads(const Tape& tape, const ParamNodes& n) {
    std::vector<NodeId> ids;
    switch (cfg_.encoder) {
        case EncoderKind::gru:
            ids = {n.gru.w_xz, n.gru.w_hz, n.gru.b_z, n.gru.w_xr, n.gru.w_hr,
                   n.gru.b_r,  n.gru.w_xh, n.gru.w_hh, n.gru.b_h};
            break;
        case EncoderKind::linear:
            ids = {n.enc_w1, n.enc_b1};
            break;
        case EncoderKind::mlp:
            ids = {n.enc_w1, n.enc_b1, n.enc_w2, n.enc_b2};
            break;
        case EncoderKind::transformer_block:
            ids = {n.enc_w1, n.enc_pos, n.enc_wq, n.enc_wk, n.enc_wv};
            break;
    }
    const auto& f = n.field;
    bool has_dif = cfg_.ablation != Ablation::no_dif;
    bool has_con = cfg_.ablation != Ablation::no_con;
    bool has_rea = cfg_.ablation != Ablation::no_rea;
    if (has_dif) ids.push_back(f.w_diff);
    if (has_con) {
        ids.push_back(f.w_conv);
        ids.push_back(f.w_vel);
    }
    if (has_dif && has_con) ids.push_back(f.gate_omega_raw);
    if (has_rea) {
        if (cfg_.reaction != ReactionKind::source) {
            ids.push_back(f.w_rea1);
            ids.push_back(f.b_rea1);
            if (cfg_.reaction == ReactionKind::nonlinear) {
                ids.push_back(f.w_rea2);
                ids.push_back(f.b_rea2);
            }
        }
        ids.push_back(f.gate_delta_raw);
    }
    ids.insert(ids.end(), {n.dec_w1, n.dec_b1, n.dec_w2, n.dec_b2});

    std::vector<Tensor> grads;
    grads.reserve(ids.size());
    for (NodeId id : ids) grads.push_back(tape.grad(id));
    return grads;
}

NodeId OpinnModel::encode_on_tape(Tape& tape, const Tensor& context,
                                  const ParamNodes& nodes) {
    if (context.cols != cfg_.context_len)
        throw InvalidParameterError("encode: context has " + std::to_string(context.cols) +
                                    " columns, expected " +
                                    std::to_string(cfg_.context_len));
    switch (cfg_.encoder) {
        case EncoderKind::gru:
            return tape.gru_sequence(context, nodes.gru);
        case EncoderKind::linear:
            return tape.add_rowvec(tape.matmul(tape.leaf(context), nodes.enc_w1),
                                   nodes.enc_b1);
        case EncoderKind::mlp: {
            NodeId hidden = tape.relu(tape.add_rowvec(
                tape.matmul(tape.leaf(context), nodes.enc_w1), nodes.enc_b1));
            return tape.add_rowvec(tape.matmul(hidden, nodes.enc_w2), nodes.enc_b2);
        }
        case EncoderKind::transformer_block: {
            // one self-attention block over the context positions of each
            // user, mean-pooled over positions
            std::size_t c = cfg_.context_len;
            double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_dim));
            Tensor pool(1, c);
            for (double& v : pool.data) v = 1.0 / static_cast<double>(c);
            NodeId pool_id = tape.leaf(pool);

            NodeId out = -1;
            for (std::size_t i = 0; i < context.rows; ++i) {
                Tensor col(c, 1);
                for (std::size_t t = 0; t < c; ++t) col(t, 0) = context(i, t);
                NodeId tokens = tape.add(tape.matmul(tape.leaf(col), nodes.enc_w1),
                                         nodes.enc_pos);
                NodeId q = tape.matmul(tokens, nodes.enc_wq);
                NodeId k = tape.matmul(tokens, nodes.enc_wk);
                NodeId v = tape.matmul(tokens, nodes.enc_wv);
                NodeId scores = tape.row_softmax(
                    tape.scale(tape.matmul(q, tape.transpose(k)), inv_sqrt_d));
                NodeId attended = tape.matmul(scores, v);
                NodeId pooled = tape.matmul(pool_id, attended);  // 1 x D
                out = (out < 0) ? pooled : tape.concat_rows(out, pooled);
            }
            return out;
        }
    }
    throw InvalidParameterError("unknown encoder enum");
}

NodeId OpinnModel::decode_on_tape(Tape& tape, NodeId z, const ParamNodes& nodes) {
    NodeId hidden =
        tape.relu(tape.add_rowvec(tape.matmul(z, nodes.dec_w1), nodes.dec_b1));
    return tape.tanh_(tape.add_rowvec(tape.matmul(hidden, nodes.dec_w2), nodes.dec_b2));
}

NodeId OpinnModel::forecast_on_tape(Tape& tape, const Tensor& context,
                                    std::size_t horizon_steps, const ParamNodes& nodes,
                                    std::vector<NodeId>* blocks) {
    if (horizon_steps < 1)
        throw InvalidParameterError("forecast: horizon_steps must be >= 1");
    if (cfg_.solver.method == SolverMethod::dopri5)
        throw InvalidParameterError(
            "forecast_on_tape: dopri5 is inference-only; use fixed-step methods");

    NodeId z = encode_on_tape(tape, context, nodes);
    TapeField f = [this, &nodes](Tape& t, NodeId state) {
        return field_eval(t, field_, nodes.field, state);
    };
    auto n_sub = static_cast<std::size_t>(
        std::ceil(1.0 / cfg_.solver.step_size - 1e-12));
    n_sub = std::max<std::size_t>(n_sub, 1);
    double h = 1.0 / static_cast<double>(n_sub);

    NodeId last = -1;
    for (std::size_t step = 0; step < horizon_steps; ++step) {
        for (std::size_t s = 0; s < n_sub; ++s)
            z = cfg_.solver.method == SolverMethod::euler
                    ? euler_step_tape(tape, f, z, h)
                    : rk4_step_tape(tape, f, z, h);
        NodeId block = decode_on_tape(tape, z, nodes);
        if (blocks) blocks->push_back(block);
        last = block;
    }
    return last;
}

Tensor OpinnModel::encode(const Tensor& context) {
    Tape tape;
    ParamNodes nodes = register_params(tape);
    return tape.value(encode_on_tape(tape, context, nodes));
}

Tensor OpinnModel::forecast(const Tensor& context, std::size_t horizon_steps) {
    std::vector<Tensor> block_values;
    if (cfg_.solver.method == SolverMethod::dopri5) {
        Tensor z0 = encode(context);
        Field f = [this](const Tensor& z) {
            Tape t;
            DcrFieldNodes nodes = register_field(t, field_);
            return t.value(field_eval(t, field_, nodes, t.leaf(z)));
        };
        auto states = integrate(f, z0, horizon_steps, cfg_.solver);
        for (const Tensor& z : states) {
            Tape t;
            ParamNodes nodes = register_params(t);
            block_values.push_back(t.value(decode_on_tape(t, t.leaf(z), nodes)));
        }
    } else {
        Tape tape;
        ParamNodes nodes = register_params(tape);
        std::vector<NodeId> blocks;
        forecast_on_tape(tape, context, horizon_steps, nodes, &blocks);
        for (NodeId b : blocks) block_values.push_back(tape.value(b));
    }

    Tensor out(context.rows, horizon_steps * cfg_.block_len);
    for (std::size_t s = 0; s < block_values.size(); ++s)
        for (std::size_t i = 0; i < out.rows; ++i)
            for (std::size_t k = 0; k < cfg_.block_len; ++k)
                out(i, s * cfg_.block_len + k) = block_values[s](i, k);
    return out;
}

std::vector<std::size_t> window_starts(std::size_t lo, std::size_t hi,
                                       std::size_t context_len, std::size_t target_len) {
    std::vector<std::size_t> starts;
    std::size_t extent = context_len + target_len;
    if (hi < lo || hi - lo < extent) return starts;
    for (std::size_t s = lo; s + extent <= hi; ++s) starts.push_back(s);
    return starts;
}

Tensor series_window(const OpinionSeries& s, std::size_t start, std::size_t width) {
    if (start + width > s.num_steps())
        throw InvalidParameterError("series_window: range out of bounds");
    Tensor t(s.num_users(), width);
    for (std::size_t i = 0; i < s.num_users(); ++i)
        for (std::size_t k = 0; k < width; ++k) t(i, k) = s.at(i, start + k);
    return t;
}

TrainReport OpinnModel::train(const Dataset& dataset, const SplitSpec& split) {
    const OpinionSeries& series = dataset.opinions;
    std::size_t c = cfg_.context_len;
    std::size_t target_len = cfg_.train_horizon_steps * cfg_.block_len;
    if (series.num_steps() < c + target_len)
        throw InvalidParameterError("train: dataset has " +
                                    std::to_string(series.num_steps()) +
                                    " columns, need at least " +
                                    std::to_string(c + target_len));

    auto [t1, t2] = split.boundaries(series.num_steps());
    auto train_windows = window_starts(0, t1, c, target_len);
    auto val_windows = window_starts(t1, t2, c, target_len);
    if (train_windows.empty())
        throw InvalidParameterError("train: training span too short for one window");

    auto batch_rng = make_stream(cfg_.seed, "batching");
    auto param_ptrs = params();
    std::vector<Tensor*> tensors;
    for (auto& [name, t] : param_ptrs) tensors.push_back(t);

    TrainReport report;
    std::vector<Tensor> best_params;
    double best_score = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        std::shuffle(train_windows.begin(), train_windows.end(), batch_rng);
        double epoch_loss = 0.0;
        std::size_t windows_done = 0;

        for (std::size_t b0 = 0; b0 < train_windows.size(); b0 += cfg_.batch_size) {
            std::size_t b1 = std::min(b0 + cfg_.batch_size, train_windows.size());
            std::vector<Tensor> grad_sum;
            double batch_loss = 0.0;

            for (std::size_t w = b0; w < b1; ++w) {
                std::size_t start = train_windows[w];
                Tensor context = series_window(series, start, c);

                Tape tape;
                ParamNodes nodes = register_params(tape);
                std::vector<NodeId> blocks;
                forecast_on_tape(tape, context, cfg_.train_horizon_steps, nodes, &blocks);

                std::vector<NodeId> losses;
                for (std::size_t s = 0; s < blocks.size(); ++s) {
                    Tensor target = series_window(series, start + c + s * cfg_.block_len,
                                                  cfg_.block_len);
                    losses.push_back(tape.mse(blocks[s], tape.leaf(target)));
                }
                NodeId loss = tape.mean_of(losses);
                tape.backward(loss);
                batch_loss += tape.value(loss).data[0];

                auto grads = param_grads(tape, nodes);
                if (grad_sum.empty()) {
                    grad_sum = std::move(grads);
                } else {
                    for (std::size_t k = 0; k < grads.size(); ++k)
                        for (std::size_t i = 0; i < grads[k].size(); ++i)
                            grad_sum[k].data[i] += grads[k].data[i];
                }
            }

            if (!std::isfinite(batch_loss))
                throw NumericError("train: loss diverged (non-finite)");
            double inv = 1.0 / static_cast<double>(b1 - b0);
            for (auto& g : grad_sum)
                for (double& v : g.data) v *= inv;
            adam_step(adam_, tensors, grad_sum);

            epoch_loss += batch_loss;
            windows_done += b1 - b0;
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(windows_done));

        double score;
        if (!val_windows.empty()) {
            double sq = 0.0;
            std::size_t count = 0;
            for (std::size_t start : val_windows) {
                Tensor context = series_window(series, start, c);
                Tensor pred = forecast(context, cfg_.train_horizon_steps);
                Tensor truth = series_window(series, start + c, target_len);
                for (std::size_t k = 0; k < pred.size(); ++k) {
                    double d = pred.data[k] - truth.data[k];
                    sq += d * d;
                }
                count += pred.size();
            }
            score = std::sqrt(sq / static_cast<double>(count));
            report.val_rmse.push_back(score);
        } else {
            score = report.train_loss.back();
            report.val_rmse.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        if (!std::isfinite(score)) throw NumericError("train: validation diverged");

        if (score < best_score) {
            best_score = score;
            report.best_epoch = epoch;
            best_params.clear();
            for (Tensor* t : tensors) best_params.push_back(*t);
        }
    }

    for (std::size_t k = 0; k < tensors.size(); ++k) *tensors[k] = best_params[k];
    report.best_val_rmse = best_score;
    return report;
}

void OpinnModel::save(const std::filesystem::path& path) const {
    json j;
    j["config"] = json::parse(cfg_.to_json());
    json params_json = json::object();
    auto param_ptrs = const_cast<OpinnModel*>(this)->params();
    for (auto& [name, t] : param_ptrs)
        params_json[name] = {{"shape", {t->rows, t->cols}}, {"data", t->data}};
    j["params"] = params_json;

    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump() << '\n';
}

OpinnModel OpinnModel::load(const std::filesystem::path& path,
                            const NormalizedOperator* op) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    OpinnConfig cfg = OpinnConfig::from_json(j.at("config").dump());
    OpinnModel model(cfg, op);
    auto param_ptrs = model.params();
    for (auto& [name, t] : param_ptrs) {
        if (!j.at("params").contains(name))
            throw DataError(path.string() + ": missing parameter '" + name + "'");
        const auto& entry = j["params"][name];
        auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 2 || shape[0] != t->rows || shape[1] != t->cols)
            throw DataError(path.string() + ": shape mismatch for '" + name + "'");
        auto data = entry.at("data").get<Tensor::Vec>();
        if (data.size() != t->size())
            throw DataError(path.string() + ": data length mismatch for '" + name + "'");
        t->data = std::move(data);
    }
    return model;
}

std::string GridSearchResult::to_json() const {
    json entries_json = json::array();
    for (const auto& e : entries) {
        json ej = {{"learning_rate", e.learning_rate},
                   {"hidden_dim", e.hidden_dim},
                   {"batch_size", e.batch_size}};
        if (std::isfinite(e.val_rmse))
            ej["val_rmse"] = e.val_rmse;
        else
            ej["val_rmse"] = nullptr;
        entries_json.push_back(ej);
    }
    json j;
    j["best"] = json::parse(best.to_json());
    j["entries"] = entries_json;
    return j.dump(2);
}

GridSearchResult grid_search(const Dataset& dataset, const GridSearchSpace& space,
                             const OpinnConfig& base, const SplitSpec& split,
                             const NormalizedOperator* op) {
    if (space.learning_rates.empty() || space.hidden_dims.empty() ||
        space.batch_sizes.empty())
        throw InvalidParameterError("grid_search: empty search space");

    GridSearchResult result;
    result.best = base;
    bool found = false;
    double best_rmse = std::numeric_limits<double>::infinity();
    std::size_t best_dim = 0, best_batch = 0;

    for (double lr : space.learning_rates) {
        for (std::size_t dim : space.hidden_dims) {
            for (std::size_t batch : space.batch_sizes) {
                OpinnConfig cfg = base;
                cfg.learning_rate = lr;
                cfg.hidden_dim = dim;
                cfg.batch_size = batch;

                double rmse = std::numeric_limits<double>::quiet_NaN();
                try {
                    OpinnModel model(cfg, op);
                    TrainReport report = model.train(dataset, split);
                    rmse = report.best_val_rmse;
                } catch (const NumericError&) {
                    // diverged combination: recorded as null, not fatal
                }
                result.entries.push_back({lr, dim, batch, rmse});

                if (std::isfinite(rmse)) {
                    bool better = !found || rmse < best_rmse ||
                                  (rmse == best_rmse &&
                                   (dim < best_dim ||
                                    (dim == best_dim && batch < best_batch)));
                    if (better) {
                        found = true;
                        best_rmse = rmse;
                        best_dim = dim;
                        best_batch = batch;
                        result.best = cfg;
                    }
                }
            }
        }
    }
    if (!found) throw NumericError("grid_search: every combination diverged");
    return result;
}

}  // namespace opinn
