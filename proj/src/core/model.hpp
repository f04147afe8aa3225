#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/adam.hpp"
#include "core/dynamics.hpp"
#include "core/odesolve.hpp"
#include "core/synthgen.hpp"
#include "core/tape.hpp"

namespace opinn {

enum class EncoderKind { gru, linear, mlp, transformer_block };

EncoderKind encoder_from_name(const std::string& name);
std::string encoder_name(EncoderKind k);

struct SplitSpec {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;

    static SplitSpec standard() { return {0.6, 0.2, 0.2}; }
    static SplitSpec fewshot() { return {0.3, 0.1, 0.6}; }
    void validate() const;

    // Chronological column boundaries: train [0, t1), val [t1, t2), test [t2, total).
    std::pair<std::size_t, std::size_t> boundaries(std::size_t total_cols) const;
};

struct OpinnConfig {
    std::size_t hidden_dim = 32;
    std::size_t context_len = 30;
    std::size_t block_len = 30;  // observed steps per system step
    EncoderKind encoder = EncoderKind::gru;
    ReactionKind reaction = ReactionKind::nonlinear;
    Ablation ablation = Ablation::full;
    SolverConfig solver;  // rk4, unit step by default
    double learning_rate = 0.005;
    std::size_t batch_size = 16;
    std::size_t epochs = 200;
    std::size_t train_horizon_steps = 1;
    double weight_decay = 5e-5;
    std::uint64_t seed = 0;

    std::string to_json() const;
    static OpinnConfig from_json(const std::string& text);
};

struct TrainReport {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_rmse;    // per epoch
    std::size_t best_epoch = 0;
    double best_val_rmse = 0.0;

    std::string to_json() const;
};

// Encoder -> neural DCR field -> decoder, with Adam training state.
class OpinnModel {
public:
    OpinnModel(const OpinnConfig& cfg, const NormalizedOperator* op);

    const OpinnConfig& config() const { return cfg_; }

    // Latent system state (N x D) from an (N x context_len) opinion context.
    Tensor encode(const Tensor& context);

    // Rolls the latent state forward and decodes one opinion block per system
    // step; output is N x (horizon_steps * block_len), values in (-1, 1).
    Tensor forecast(const Tensor& context, std::size_t horizon_steps);

    TrainReport train(const Dataset& dataset, const SplitSpec& split);

    double omega() const { return field_.omega(); }
    double delta() const { return field_.delta(); }

    std::vector<std::pair<std::string, Tensor*>> params();

    void save(const std::filesystem::path& path) const;
    static OpinnModel load(const std::filesystem::path& path, const NormalizedOperator* op);

private:
    struct ParamNodes {
        GruParamIds gru{};
        NodeId enc_w1 = -1, enc_b1 = -1, enc_w2 = -1, enc_b2 = -1;
        NodeId enc_pos = -1, enc_wq = -1, enc_wk = -1, enc_wv = -1;
        DcrFieldNodes field;
        NodeId dec_w1 = -1, dec_b1 = -1, dec_w2 = -1, dec_b2 = -1;
    };

    ParamNodes register_params(Tape& tape);
    NodeId encode_on_tape(Tape& tape, const Tensor& context, const ParamNodes& nodes);
    NodeId decode_on_tape(Tape& tape, NodeId z, const ParamNodes& nodes);
    NodeId forecast_on_tape(Tape& tape, const Tensor& context, std::size_t horizon_steps,
                            const ParamNodes& nodes, std::vector<NodeId>* blocks);
    std::vector<Tensor> param_grads(const Tape& tape, const ParamNodes& nodes);

    OpinnConfig cfg_;
    DcrField field_;

    // encoder parameters (population by kind)
    Tensor gru_w_xz_, gru_w_hz_, gru_b_z_;
    Tensor gru_w_xr_, gru_w_hr_, gru_b_r_;
    Tensor gru_w_xh_, gru_w_hh_, gru_b_h_;
    Tensor enc_w1_, enc_b1_, enc_w2_, enc_b2_;       // linear / mlp
    Tensor enc_pos_, enc_wq_, enc_wk_, enc_wv_;      // transformer_block

    Tensor dec_w1_, dec_b1_;  // D x D
    Tensor dec_w2_, dec_b2_;  // D x block_len

    AdamState adam_;
};

struct GridSearchSpace {
    std::vector<double> learning_rates;
    std::vector<std::size_t> hidden_dims;
    std::vector<std::size_t> batch_sizes;
};

struct GridSearchEntry {
    double learning_rate;
    std::size_t hidden_dim;
    std::size_t batch_size;
    double val_rmse;  // NaN when training diverged
};

struct GridSearchResult {
    OpinnConfig best;
    std::vector<GridSearchEntry> entries;

    std::string to_json() const;
};

// Trains every combination (argmin validation RMSE; ties broken by smaller
// hidden dim, then smaller batch). Diverged combinations are skipped.
GridSearchResult grid_search(const Dataset& dataset, const GridSearchSpace& space,
                             const OpinnConfig& base, const SplitSpec& split,
                             const NormalizedOperator* op);

// Sliding-window sample start columns for windows fully inside [lo, hi).
std::vector<std::size_t> window_starts(std::size_t lo, std::size_t hi,
                                       std::size_t context_len, std::size_t target_len);

// N x width tensor copied from series columns [start, start+width).
Tensor series_window(const OpinionSeries& s, std::size_t start, std::size_t width);

}  // namespace opinn
