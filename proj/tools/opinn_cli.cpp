// Command-line front end; all pipeline work goes through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opinn/opinn.h"

namespace {

using nlohmann::json;

int finish(opinn_status st) {
    if (st != OPINN_OK) std::fprintf(stderr, "error: %s\n", opinn_last_error());
    return static_cast<int>(st);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", path + ": " + e.what());
    }
    return j;
}

struct SplitOpts {
    std::string kind = "standard";
    std::vector<double> ratios;

    void attach(CLI::App* cmd) {
        cmd->add_option("--split", kind, "Chronological split: standard or fewshot")
            ->check(CLI::IsMember({"standard", "fewshot"}));
        cmd->add_option("--split-ratios", ratios,
                        "Custom train,val,test ratios (overrides --split)")
            ->expected(3);
    }

    std::string to_json() const {
        json j;
        if (ratios.size() == 3) {
            j = {{"train", ratios[0]}, {"val", ratios[1]}, {"test", ratios[2]}};
        } else if (kind == "fewshot") {
            j = {{"train", 0.3}, {"val", 0.1}, {"test", 0.6}};
        } else {
            j = {{"train", 0.6}, {"val", 0.2}, {"test", 0.2}};
        }
        return j.dump();
    }
};

}  // namespace

int main(int argc, char** argv) {
    if (const char* cap = std::getenv("OPINN_MAX_THREADS"))
        opinn_set_max_threads(std::atoi(cap));

    CLI::App app{"Opinion-dynamics pipeline: synthetic data, mechanical models, "
                 "and a physics-informed neural forecaster"};
    app.require_subcommand(1);

    // gen-synthetic -----------------------------------------------------------
    auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic dataset");
    std::string gen_config, gen_pattern, gen_out;
    std::size_t gen_nodes = 10000, gen_ba_m = 0, gen_raw = 0, gen_target = 0;
    std::uint64_t gen_seed = 0;
    double gen_lambda = 0, gen_eps = 0, gen_eta = 0;
    gen->add_option("--config", gen_config, "JSON config file (flags win)");
    gen->add_option("--pattern", gen_pattern, "consensus, polarization, or clustering");
    gen->add_option("--nodes", gen_nodes, "Number of users");
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--ba-m", gen_ba_m, "Edges per new node in the attachment graph");
    gen->add_option("--lambda", gen_lambda, "Stubbornness weight");
    gen->add_option("--epsilon", gen_eps, "Confidence bound");
    gen->add_option("--eta", gen_eta, "Noise scale");
    gen->add_option("--raw-steps", gen_raw, "Simulated steps before resampling");
    gen->add_option("--target-steps", gen_target, "Columns after resampling");
    gen->add_option("--out", gen_out, "Output directory")->required();

    // simulate ----------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Roll a mechanical model forward");
    std::string sim_model, sim_in, sim_out;
    std::size_t sim_steps = 0;
    double sim_alpha = 0.5, sim_eps = 0.5, sim_delta = 0.5;
    std::uint64_t sim_seed = 0;
    sim->add_option("--model", sim_model, "voter, degroot, fj, or hk")->required();
    sim->add_option("--steps", sim_steps, "Steps to simulate")->required();
    sim->add_option("--alpha", sim_alpha, "FJ susceptibility");
    sim->add_option("--epsilon", sim_eps, "Confidence bound");
    sim->add_option("--delta", sim_delta, "Reaction weight");
    sim->add_option("--seed", sim_seed, "Seed for stochastic models");
    sim->add_option("--in", sim_in, "Input dataset directory")->required();
    sim->add_option("--out", sim_out, "Output directory")->required();

    // train -------------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train the neural forecaster");
    std::string tr_data, tr_config, tr_ckpt, tr_report;
    std::string tr_solver, tr_ablation, tr_encoder, tr_reaction;
    std::size_t tr_dim = 0, tr_batch = 0, tr_epochs = 0;
    double tr_lr = 0;
    std::uint64_t tr_seed = 0;
    SplitOpts tr_split;
    train->add_option("--data", tr_data, "Dataset directory")->required();
    train->add_option("--config", tr_config, "JSON config file (flags win)");
    train->add_option("--hidden-dim", tr_dim, "Latent dimension");
    train->add_option("--lr", tr_lr, "Learning rate");
    train->add_option("--batch", tr_batch, "Windows per batch");
    train->add_option("--epochs", tr_epochs, "Training epochs");
    train->add_option("--seed", tr_seed, "Master seed");
    train->add_option("--solver", tr_solver, "euler, rk4, or dopri5");
    train->add_option("--ablation", tr_ablation, "full, no_dif, no_con, or no_rea");
    train->add_option("--encoder", tr_encoder,
                      "gru, linear, mlp, or transformer_block");
    train->add_option("--reaction", tr_reaction, "source, linear, or nonlinear");
    tr_split.attach(train);
    train->add_option("--checkpoint", tr_ckpt, "Checkpoint output path")->required();
    train->add_option("--report", tr_report, "Training report output path");

    // evaluate ----------------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "Score models on the test span");
    std::string ev_data, ev_spec, ev_json, ev_csv;
    std::vector<std::string> ev_ckpts, ev_baselines;
    std::vector<std::size_t> ev_horizons;
    std::size_t ev_context = 30;
    SplitOpts ev_split;
    ev->add_option("--data", ev_data, "Dataset directory")->required();
    ev->add_option("--spec", ev_spec, "Full evaluation spec JSON file");
    ev->add_option("--checkpoint", ev_ckpts, "Trained checkpoint path (repeatable)");
    ev->add_option("--baseline", ev_baselines,
                   "Mechanical baseline: voter, degroot, fj, or hk (repeatable)");
    ev->add_option("--horizons", ev_horizons, "Forecast horizons in observed steps");
    ev->add_option("--context-len", ev_context, "Context columns fed to each model");
    ev_split.attach(ev);
    ev->add_option("--out-json", ev_json, "Report JSON output path");
    ev->add_option("--out-csv", ev_csv, "Report CSV output path");

    // ablate ------------------------------------------------------------------
    auto* ab = app.add_subcommand(
        "ablate", "Train the full model and the branch-removal variants");
    std::string ab_data, ab_config, ab_json, ab_csv;
    std::vector<std::uint64_t> ab_seeds;
    std::vector<std::size_t> ab_horizons;
    SplitOpts ab_split;
    ab->add_option("--data", ab_data, "Dataset directory")->required();
    ab->add_option("--config", ab_config, "Training config JSON file");
    ab->add_option("--seeds", ab_seeds, "Seeds to run per variant");
    ab->add_option("--horizons", ab_horizons, "Forecast horizons in observed steps");
    ab_split.attach(ab);
    ab->add_option("--out-json", ab_json, "Report JSON output path");
    ab->add_option("--out-csv", ab_csv, "Report CSV output path");

    // grid-search -------------------------------------------------------------
    auto* gs = app.add_subcommand("grid-search", "Exhaustive hyperparameter search");
    std::string gs_data, gs_config, gs_out;
    std::vector<double> gs_lrs;
    std::vector<std::size_t> gs_dims, gs_batches;
    SplitOpts gs_split;
    gs->add_option("--data", gs_data, "Dataset directory")->required();
    gs->add_option("--config", gs_config, "Base training config JSON file");
    gs->add_option("--lrs", gs_lrs, "Learning rates to try")->required();
    gs->add_option("--dims", gs_dims, "Latent dimensions to try")->required();
    gs->add_option("--batches", gs_batches, "Batch sizes to try")->required();
    gs_split.attach(gs);
    gs->add_option("--out", gs_out, "Result JSON output path")->required();

    // inspect-gates -----------------------------------------------------------
    auto* ig = app.add_subcommand("inspect-gates", "Print the gate values");
    std::string ig_ckpt, ig_data;
    ig->add_option("--checkpoint", ig_ckpt, "Checkpoint path")->required();
    ig->add_option("--data", ig_data, "Dataset directory (for the graph)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(OPINN_ERR_INVALID_ARGUMENT);
    }

    try {
        if (gen->parsed()) {
            json cfg = gen_config.empty() ? json::object() : load_json_file(gen_config);
            if (gen->count("--pattern")) cfg["pattern"] = gen_pattern;
            if (gen->count("--nodes")) cfg["nodes"] = gen_nodes;
            if (gen->count("--seed")) cfg["seed"] = gen_seed;
            if (gen->count("--ba-m")) cfg["ba_m"] = gen_ba_m;
            if (gen->count("--lambda")) cfg["lambda"] = gen_lambda;
            if (gen->count("--epsilon")) cfg["epsilon"] = gen_eps;
            if (gen->count("--eta")) cfg["eta"] = gen_eta;
            if (gen->count("--raw-steps")) cfg["raw_steps"] = gen_raw;
            if (gen->count("--target-steps")) cfg["target_steps"] = gen_target;
            return finish(opinn_generate_dataset(cfg.dump().c_str(), gen_out.c_str()));
        }

        if (sim->parsed()) {
            json cfg = {{"model", sim_model}, {"steps", sim_steps},
                        {"alpha", sim_alpha}, {"epsilon", sim_eps},
                        {"delta", sim_delta}, {"seed", sim_seed}};
            return finish(
                opinn_simulate(sim_in.c_str(), cfg.dump().c_str(), sim_out.c_str()));
        }

        if (train->parsed()) {
            json cfg = tr_config.empty() ? json::object() : load_json_file(tr_config);
            if (train->count("--hidden-dim")) cfg["hidden_dim"] = tr_dim;
            if (train->count("--lr")) cfg["learning_rate"] = tr_lr;
            if (train->count("--batch")) cfg["batch_size"] = tr_batch;
            if (train->count("--epochs")) cfg["epochs"] = tr_epochs;
            if (train->count("--seed")) cfg["seed"] = tr_seed;
            if (train->count("--solver")) cfg["solver"] = {{"method", tr_solver}};
            if (train->count("--ablation")) cfg["ablation"] = tr_ablation;
            if (train->count("--encoder")) cfg["encoder"] = tr_encoder;
            if (train->count("--reaction")) cfg["reaction"] = tr_reaction;
            std::string split = tr_split.to_json();
            return finish(opinn_train(tr_data.c_str(), cfg.dump().c_str(), split.c_str(),
                                      tr_ckpt.c_str(),
                                      tr_report.empty() ? nullptr : tr_report.c_str()));
        }

        if (ev->parsed()) {
            json spec = ev_spec.empty() ? json::object() : load_json_file(ev_spec);
            if (ev->count("--horizons") || !spec.contains("horizons"))
                spec["horizons"] = ev_horizons;
            if (ev->count("--context-len") || !spec.contains("context_len"))
                spec["context_len"] = ev_context;
            if (!spec.contains("split")) spec["split"] = json::parse(ev_split.to_json());
            if (!spec.contains("models")) spec["models"] = json::array();
            if (!ev_ckpts.empty())
                spec["models"].push_back({{"name", "opinn"}, {"checkpoints", ev_ckpts}});
            for (const auto& b : ev_baselines)
                spec["models"].push_back({{"name", b}, {"baseline", b}});
            return finish(opinn_evaluate(ev_data.c_str(), spec.dump().c_str(),
                                         ev_json.empty() ? nullptr : ev_json.c_str(),
                                         ev_csv.empty() ? nullptr : ev_csv.c_str()));
        }

        if (ab->parsed()) {
            json spec = json::object();
            spec["train"] =
                ab_config.empty() ? json::object() : load_json_file(ab_config);
            if (!ab_seeds.empty()) spec["seeds"] = ab_seeds;
            if (!ab_horizons.empty()) spec["horizons"] = ab_horizons;
            spec["split"] = json::parse(ab_split.to_json());
            return finish(opinn_ablate(ab_data.c_str(), spec.dump().c_str(),
                                       ab_json.empty() ? nullptr : ab_json.c_str(),
                                       ab_csv.empty() ? nullptr : ab_csv.c_str()));
        }

        if (gs->parsed()) {
            json cfg = gs_config.empty() ? json::object() : load_json_file(gs_config);
            json space = {{"learning_rates", gs_lrs},
                          {"hidden_dims", gs_dims},
                          {"batch_sizes", gs_batches}};
            std::string split = gs_split.to_json();
            return finish(opinn_grid_search(gs_data.c_str(), cfg.dump().c_str(),
                                            space.dump().c_str(), split.c_str(),
                                            gs_out.c_str()));
        }

        if (ig->parsed()) {
            opinn_model* model = opinn_model_load(ig_ckpt.c_str(), ig_data.c_str());
            if (model == nullptr) return finish(OPINN_ERR_DATA);
            double omega = 0, delta = 0;
            opinn_status st = opinn_model_gates(model, &omega, &delta);
            opinn_model_free(model);
            if (st != OPINN_OK) return finish(st);
            std::printf("gate        value\n");
            std::printf("omega       %.6f\n", omega);
            std::printf("1 - omega   %.6f\n", 1.0 - omega);
            std::printf("delta       %.6f\n", delta);
            return 0;
        }
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(OPINN_ERR_INVALID_ARGUMENT);
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(OPINN_ERR_DATA);
    }
    return static_cast<int>(OPINN_ERR_INVALID_ARGUMENT);
}
