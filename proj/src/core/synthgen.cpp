#include "core/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace opinn {

SynthPattern synth_pattern_from_name(const std::string& name) {
    if (name == "consensus") return SynthPattern::consensus;
    if (name == "polarization") return SynthPattern::polarization;
    if (name == "clustering") return SynthPattern::clustering;
    throw InvalidParameterError("unknown pattern '" + name + "'");
}

std::string synth_pattern_name(SynthPattern p) {
    switch (p) {
        case SynthPattern::consensus: return "consensus";
        case SynthPattern::polarization: return "polarization";
        case SynthPattern::clustering: return "clustering";
    }
    throw InvalidParameterError("unknown pattern enum");
}

void SynthConfig::validate() const {
    if (n <= m_ba || m_ba < 1)
        throw InvalidParameterError("synth config: requires n > m_ba >= 1");
    if (lambda < 0.0 || lambda > 1.0)
        throw InvalidParameterError("synth config: lambda must lie in [0,1]");
    if (epsilon < 0.0) throw InvalidParameterError("synth config: epsilon must be >= 0");
    if (eta < 0.0) throw InvalidParameterError("synth config: eta must be >= 0");
    if (raw_steps < 1) throw InvalidParameterError("synth config: raw_steps must be >= 1");
    if (target_steps < raw_steps + 1)
        throw InvalidParameterError("synth config: target_steps below raw column count");
}

SynthConfig default_synth_config(SynthPattern pattern, std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.pattern = pattern;
    cfg.n = n;
    cfg.seed = seed;
    switch (pattern) {
        case SynthPattern::consensus:
            cfg.lambda = 0.2;
            cfg.epsilon = 0.5;
            break;
        case SynthPattern::polarization:
            cfg.lambda = 0.1;
            cfg.epsilon = 0.3;
            break;
        case SynthPattern::clustering:
            cfg.lambda = 0.15;
            cfg.epsilon = 0.2;
            break;
    }
    cfg.eta = 0.015;
    return cfg;
}

Dataset generate(const SynthConfig& cfg) {
    cfg.validate();

    Graph g = generate_ba_graph(cfg.n, cfg.m_ba, cfg.seed);

    auto init_rng = make_stream(cfg.seed, "init-opinions");
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::vector<double> x0(cfg.n);
    for (double& v : x0) v = uniform(init_rng);

    auto noise_rng = make_stream(cfg.seed, "noise");
    std::normal_distribution<double> gauss(0.0, 1.0);

    OpinionSeries raw(cfg.n, cfg.raw_steps + 1);
    raw.set_column(0, x0);
    std::vector<double> x = x0;
    std::vector<double> next(cfg.n);
    for (std::size_t t = 1; t <= cfg.raw_steps; ++t) {
        for (std::size_t i = 0; i < cfg.n; ++i) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t j : g.neighbors(i)) {
                if (std::abs(x[i] - x[j]) <= cfg.epsilon) {
                    sum += x[j];
                    ++count;
                }
            }
            double social = count ? sum / static_cast<double>(count) : x[i];
            double v = cfg.lambda * x0[i] + (1.0 - cfg.lambda) * social +
                       cfg.eta * gauss(noise_rng);
            next[i] = std::clamp(v, -1.0, 1.0);
        }
        x = next;
        raw.set_column(t, x);
    }

    Dataset d{g, interpolate_linear(raw, cfg.target_steps), cfg,
              synth_pattern_name(cfg.pattern)};
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_graph_csv(d.graph, dir / "graph.csv");
    save_series_csv(d.opinions, dir / "opinions.csv");

    nlohmann::json meta;
    meta["pattern"] = d.pattern_name;
    meta["config"] = {
        {"n", d.config.n},           {"m_ba", d.config.m_ba},
        {"lambda", d.config.lambda}, {"epsilon", d.config.epsilon},
        {"eta", d.config.eta},       {"raw_steps", d.config.raw_steps},
        {"target_steps", d.config.target_steps},
    };
    meta["seed"] = d.config.seed;
    meta["split"] = {{"train", d.split_train}, {"val", d.split_val}, {"test", d.split_test}};

    std::ofstream out(dir / "meta.json");
    if (!out) throw DataError("cannot open " + (dir / "meta.json").string() + " for writing");
    out << meta.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
    auto meta_path = dir / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw DataError("cannot open " + meta_path.string());
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": " + e.what());
    }

    if (!std::filesystem::exists(dir / "graph.csv"))
        throw DataError("missing " + (dir / "graph.csv").string());
    if (!std::filesystem::exists(dir / "opinions.csv"))
        throw DataError("missing " + (dir / "opinions.csv").string());

    Graph g = load_graph_csv(dir / "graph.csv");
    OpinionSeries opinions = load_series_csv(dir / "opinions.csv");
    if (opinions.num_users() != g.num_nodes())
        throw DataError(dir.string() + ": opinions.csv rows (" +
                        std::to_string(opinions.num_users()) +
                        ") disagree with graph node count (" +
                        std::to_string(g.num_nodes()) + ")");

    SynthConfig cfg;
    try {
        cfg.pattern = synth_pattern_from_name(meta.at("pattern").get<std::string>());
        const auto& c = meta.at("config");
        cfg.n = c.at("n").get<std::size_t>();
        cfg.m_ba = c.at("m_ba").get<std::size_t>();
        cfg.lambda = c.at("lambda").get<double>();
        cfg.epsilon = c.at("epsilon").get<double>();
        cfg.eta = c.at("eta").get<double>();
        cfg.raw_steps = c.at("raw_steps").get<std::size_t>();
        cfg.target_steps = c.at("target_steps").get<std::size_t>();
        cfg.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path.string() + ": " + e.what());
    }

    Dataset d{std::move(g), std::move(opinions), cfg, synth_pattern_name(cfg.pattern)};
    if (meta.contains("split")) {
        d.split_train = meta["split"].value("train", 0.6);
        d.split_val = meta["split"].value("val", 0.2);
        d.split_test = meta["split"].value("test", 0.2);
    }
    return d;
}

}  // namespace opinn
