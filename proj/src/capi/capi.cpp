#include "opinn/opinn.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "core/classical.hpp"
#include "core/errors.hpp"
#include "core/eval.hpp"
#include "core/model.hpp"
#include "core/synthgen.hpp"

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

template <typename F>
opinn_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return OPINN_OK;
    } catch (const opinn::NumericError& e) {
        g_last_error = e.what();
        return OPINN_ERR_NUMERIC;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return OPINN_ERR_INVALID_ARGUMENT;
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return OPINN_ERR_DATA;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return OPINN_ERR_DATA;
    }
}

void require_arg(const void* p, const char* name) {
    if (p == nullptr)
        throw opinn::InvalidParameterError(std::string(name) + " must not be null");
}

json parse_json(const char* text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw opinn::DataError(std::string(what) + ": " + e.what());
    }
}

opinn::SplitSpec split_from_json(const json& j) {
    opinn::SplitSpec s;
    s.train = j.value("train", s.train);
    s.val = j.value("val", s.val);
    s.test = j.value("test", s.test);
    s.validate();
    return s;
}

opinn::SplitSpec resolve_split(const json* maybe, const opinn::Dataset& d) {
    if (maybe != nullptr && !maybe->is_null()) return split_from_json(*maybe);
    opinn::SplitSpec s{d.split_train, d.split_val, d.split_test};
    s.validate();
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw opinn::DataError("cannot open " + path.string() + " for writing");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

opinn::ClassicalConfig classical_from_json(const json& j) {
    opinn::ClassicalConfig cfg;
    if (j.contains("model"))
        cfg.model = opinn::classical_model_from_name(j["model"].get<std::string>());
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

// Wraps a trained model as a per-column forecaster; the horizon must cover
// whole decoder blocks.
opinn::Forecaster model_forecaster(opinn::OpinnModel& model) {
    return [&model](const opinn::Tensor& context, std::size_t horizon_cols) {
        std::size_t block = model.config().block_len;
        if (horizon_cols == 0 || horizon_cols % block != 0)
            throw opinn::InvalidParameterError(
                "forecast horizon " + std::to_string(horizon_cols) +
                " is not a multiple of the block length " + std::to_string(block));
        return model.forecast(context, horizon_cols / block);
    };
}

void write_reports(const opinn::EvalReport& report, const char* json_path,
                   const char* csv_path) {
    if (json_path != nullptr) write_text(json_path, report.to_json());
    if (csv_path != nullptr) write_text(csv_path, report.to_csv());
}

}  // namespace

extern "C" {

const char* opinn_last_error(void) { return g_last_error.c_str(); }

void opinn_set_max_threads(int n) {
    if (n >= 1) Eigen::setNbThreads(n);
}

opinn_status opinn_generate_dataset(const char* config_json, const char* out_dir) {
    return guarded([&] {
        require_arg(config_json, "config_json");
        require_arg(out_dir, "out_dir");
        json j = parse_json(config_json, "generate config");

        auto pattern = opinn::synth_pattern_from_name(
            j.value("pattern", std::string("consensus")));
        auto n = j.value("nodes", std::size_t{10000});
        auto seed = j.value("seed", std::uint64_t{0});
        opinn::SynthConfig cfg = opinn::default_synth_config(pattern, n, seed);
        cfg.m_ba = j.value("ba_m", cfg.m_ba);
        cfg.lambda = j.value("lambda", cfg.lambda);
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        cfg.eta = j.value("eta", cfg.eta);
        cfg.raw_steps = j.value("raw_steps", cfg.raw_steps);
        cfg.target_steps = j.value("target_steps", cfg.target_steps);

        opinn::Dataset d = opinn::generate(cfg);
        opinn::save_dataset(d, out_dir);
    });
}

opinn_status opinn_simulate(const char* dataset_dir, const char* config_json,
                            const char* out_dir) {
    return guarded([&] {
        require_arg(dataset_dir, "dataset_dir");
        require_arg(config_json, "config_json");
        require_arg(out_dir, "out_dir");
        json j = parse_json(config_json, "simulate config");

        opinn::Dataset d = opinn::load_dataset(dataset_dir);
        opinn::ClassicalConfig cfg = classical_from_json(j);
        auto steps = j.value("steps", std::size_t{0});
        if (steps == 0)
            throw opinn::InvalidParameterError("simulate: steps must be >= 1");

        opinn::OpinionSeries traj =
            opinn::simulate(d.graph, d.opinions.column(0), cfg, steps);

        std::filesystem::create_directories(out_dir);
        opinn::save_series_csv(traj, std::filesystem::path(out_dir) / "opinions.csv");
        json meta = {{"model", opinn::classical_model_name(cfg.model)},
                     {"steps", steps},
                     {"alpha", cfg.alpha},
                     {"epsilon", cfg.epsilon},
                     {"delta", cfg.delta},
                     {"seed", cfg.seed},
                     {"source_dataset", dataset_dir}};
        write_text(std::filesystem::path(out_dir) / "meta.json", meta.dump(2));
    });
}

opinn_status opinn_train(const char* dataset_dir, const char* config_json,
                         const char* split_json, const char* checkpoint_path,
                         const char* report_path) {
    return guarded([&] {
        require_arg(dataset_dir, "dataset_dir");
        require_arg(config_json, "config_json");
        require_arg(checkpoint_path, "checkpoint_path");

        opinn::Dataset d = opinn::load_dataset(dataset_dir);
        opinn::NormalizedOperator op(d.graph);
        opinn::OpinnConfig cfg = opinn::OpinnConfig::from_json(config_json);
        opinn::SplitSpec split;
        if (split_json != nullptr) {
            json sj = parse_json(split_json, "split");
            split = resolve_split(&sj, d);
        } else {
            split = resolve_split(nullptr, d);
        }

        opinn::OpinnModel model(cfg, &op);
        opinn::TrainReport report = model.train(d, split);
        std::filesystem::path ckpt(checkpoint_path);
        if (ckpt.has_parent_path()) std::filesystem::create_directories(ckpt.parent_path());
        model.save(ckpt);
        if (report_path != nullptr) write_text(report_path, report.to_json());
    });
}

opinn_status opinn_evaluate(const char* dataset_dir, const char* eval_json,
                            const char* report_json_path, const char* report_csv_path) {
    return guarded([&] {
        require_arg(dataset_dir, "dataset_dir");
        require_arg(eval_json, "eval_json");
        json j = parse_json(eval_json, "evaluate config");

        opinn::Dataset d = opinn::load_dataset(dataset_dir);
        opinn::NormalizedOperator op(d.graph);
        const json* sj = j.contains("split") ? &j["split"] : nullptr;
        opinn::SplitSpec split = resolve_split(sj, d);
        auto context_len = j.value("context_len", std::size_t{30});

        auto horizons = j.value("horizons", std::vector<std::size_t>{});
        if (horizons.empty())
            throw opinn::InvalidParameterError("evaluate: horizons must be non-empty");
        if (!j.contains("models") || !j["models"].is_array() || j["models"].empty())
            throw opinn::InvalidParameterError("evaluate: models must be non-empty");

        opinn::EvalReport report;
        for (const auto& mj : j["models"]) {
            std::string name = mj.value("name", std::string());
            auto seeds = mj.value("seeds", std::vector<std::uint64_t>{});

            for (std::size_t horizon : horizons) {
                std::vector<std::pair<std::uint64_t, opinn::MetricPair>> runs;

                if (mj.contains("checkpoints")) {
                    auto paths = mj["checkpoints"].get<std::vector<std::string>>();
                    if (!seeds.empty() && seeds.size() != paths.size())
                        throw opinn::InvalidParameterError(
                            "evaluate: seeds and checkpoints lengths differ");
                    for (std::size_t k = 0; k < paths.size(); ++k) {
                        opinn::OpinnModel model = opinn::OpinnModel::load(paths[k], &op);
                        if (name.empty()) name = "model";
                        std::uint64_t seed =
                            seeds.empty() ? model.config().seed : seeds[k];
                        auto metrics = opinn::evaluate_forecaster(
                            d.opinions, split, model_forecaster(model), context_len,
                            horizon);
                        runs.emplace_back(seed, metrics);
                    }
                } else if (mj.contains("baseline")) {
                    opinn::ClassicalConfig cfg = classical_from_json(mj);
                    cfg.model = opinn::classical_model_from_name(
                        mj["baseline"].get<std::string>());
                    if (name.empty()) name = opinn::classical_model_name(cfg.model);
                    if (seeds.empty()) seeds = {cfg.seed};
                    for (std::uint64_t seed : seeds) {
                        cfg.seed = seed;
                        auto metrics = opinn::evaluate_forecaster(
                            d.opinions, split,
                            opinn::make_baseline_forecaster(d.graph, cfg), context_len,
                            horizon);
                        runs.emplace_back(seed, metrics);
                    }
                } else {
                    throw opinn::InvalidParameterError(
                        "evaluate: each model needs 'checkpoints' or 'baseline'");
                }
                report.entries.push_back(opinn::aggregate_runs(name, horizon, runs));
            }
        }
        write_reports(report, report_json_path, report_csv_path);
    });
}

opinn_status opinn_ablate(const char* dataset_dir, const char* ablate_json,
                          const char* report_json_path, const char* report_csv_path) {
    return guarded([&] {
        require_arg(dataset_dir, "dataset_dir");
        require_arg(ablate_json, "ablate_json");
        json j = parse_json(ablate_json, "ablate config");

        opinn::Dataset d = opinn::load_dataset(dataset_dir);
        opinn::NormalizedOperator op(d.graph);
        opinn::OpinnConfig base = opinn::OpinnConfig::from_json(
            j.contains("train") ? j["train"].dump() : std::string("{}"));
        const json* sj = j.contains("split") ? &j["split"] : nullptr;
        opinn::SplitSpec split = resolve_split(sj, d);
        auto seeds = j.value("seeds", std::vector<std::uint64_t>{base.seed});
        auto horizons = j.value("horizons", std::vector<std::size_t>{base.block_len});
        auto context_len = j.value("context_len", base.context_len);

        opinn::EvalReport report;
        for (opinn::Ablation variant :
             {opinn::Ablation::full, opinn::Ablation::no_dif, opinn::Ablation::no_con,
              opinn::Ablation::no_rea}) {
            std::vector<std::vector<std::pair<std::uint64_t, opinn::MetricPair>>>
                runs_by_horizon(horizons.size());
            for (std::uint64_t seed : seeds) {
                opinn::OpinnConfig cfg = base;
                cfg.ablation = variant;
                cfg.seed = seed;
                opinn::OpinnModel model(cfg, &op);
                model.train(d, split);
                for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
                    auto metrics = opinn::evaluate_forecaster(
                        d.opinions, split, model_forecaster(model), context_len,
                        horizons[hi]);
                    runs_by_horizon[hi].emplace_back(seed, metrics);
                }
            }
            for (std::size_t hi = 0; hi < horizons.size(); ++hi)
                report.entries.push_back(opinn::aggregate_runs(
                    opinn::ablation_name(variant), horizons[hi], runs_by_horizon[hi]));
        }
        write_reports(report, report_json_path, report_csv_path);
    });
}

opinn_status opinn_grid_search(const char* dataset_dir, const char* config_json,
                               const char* space_json, const char* split_json,
                               const char* result_path) {
    return guarded([&] {
        require_arg(dataset_dir, "dataset_dir");
        require_arg(config_json, "config_json");
        require_arg(space_json, "space_json");
        require_arg(result_path, "result_path");

        opinn::Dataset d = opinn::load_dataset(dataset_dir);
        opinn::NormalizedOperator op(d.graph);
        opinn::OpinnConfig base = opinn::OpinnConfig::from_json(config_json);
        json spj = parse_json(space_json, "search space");
        opinn::GridSearchSpace space;
        space.learning_rates = spj.value("learning_rates", std::vector<double>{});
        space.hidden_dims = spj.value("hidden_dims", std::vector<std::size_t>{});
        space.batch_sizes = spj.value("batch_sizes", std::vector<std::size_t>{});

        opinn::SplitSpec split;
        if (split_json != nullptr) {
            json sj = parse_json(split_json, "split");
            split = resolve_split(&sj, d);
        } else {
            split = resolve_split(nullptr, d);
        }

        opinn::GridSearchResult result =
            opinn::grid_search(d, space, base, split, &op);
        write_text(result_path, result.to_json());
    });
}

}  // extern "C"

struct opinn_model {
    opinn::Graph graph;
    std::unique_ptr<opinn::NormalizedOperator> op;
    std::unique_ptr<opinn::OpinnModel> model;
};

extern "C" {

opinn_model* opinn_model_load(const char* checkpoint_path, const char* dataset_dir) {
    opinn_model* handle = nullptr;
    opinn_status st = guarded([&] {
        require_arg(checkpoint_path, "checkpoint_path");
        require_arg(dataset_dir, "dataset_dir");
        opinn::Dataset d = opinn::load_dataset(dataset_dir);
        auto out = std::make_unique<opinn_model>(
            opinn_model{std::move(d.graph), nullptr, nullptr});
        out->op = std::make_unique<opinn::NormalizedOperator>(out->graph);
        out->model = std::make_unique<opinn::OpinnModel>(
            opinn::OpinnModel::load(checkpoint_path, out->op.get()));
        handle = out.release();
    });
    return st == OPINN_OK ? handle : nullptr;
}

void opinn_model_free(opinn_model* model) { delete model; }

opinn_status opinn_model_forecast(opinn_model* model, const double* context, size_t n,
                                  size_t context_len, size_t horizon_cols, double* out) {
    return guarded([&] {
        require_arg(model, "model");
        require_arg(context, "context");
        require_arg(out, "out");
        opinn::Tensor ctx(n, context_len);
        std::memcpy(ctx.data.data(), context, n * context_len * sizeof(double));
        opinn::Tensor pred = model_forecaster(*model->model)(ctx, horizon_cols);
        std::memcpy(out, pred.data.data(), pred.size() * sizeof(double));
    });
}

opinn_status opinn_model_gates(const opinn_model* model, double* omega, double* delta) {
    return guarded([&] {
        require_arg(model, "model");
        require_arg(omega, "omega");
        require_arg(delta, "delta");
        *omega = model->model->omega();
        *delta = model->model->delta();
    });
}

}  // extern "C"
