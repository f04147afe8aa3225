#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "core/graph.hpp"
#include "core/series.hpp"

namespace opinn {

enum class SynthPattern { consensus, polarization, clustering };

SynthPattern synth_pattern_from_name(const std::string& name);
std::string synth_pattern_name(SynthPattern p);

// Generation recipe: x_i(t+1) = lambda*x_i(0)
//   + (1-lambda) * mean over graph neighbors j with |x_i(t)-x_j(t)| <= epsilon
//   + eta * xi,  xi ~ N(0,1), clamped to [-1,1] each step.
// The raw trajectory (raw_steps+1 columns) is linearly resampled to
// target_steps columns.
struct SynthConfig {
    SynthPattern pattern = SynthPattern::consensus;
    std::size_t n = 10000;
    std::size_t m_ba = 10;
    double lambda = 0.2;
    double epsilon = 0.5;
    double eta = 0.015;
    std::size_t raw_steps = 50;
    std::size_t target_steps = 400;
    std::uint64_t seed = 0;

    void validate() const;
};

// Fills lambda/epsilon/eta with the per-pattern defaults.
SynthConfig default_synth_config(SynthPattern pattern, std::size_t n, std::uint64_t seed);

struct Dataset {
    Graph graph;
    OpinionSeries opinions;
    SynthConfig config;
    std::string pattern_name;
    double split_train = 0.6;
    double split_val = 0.2;
    double split_test = 0.2;
};

Dataset generate(const SynthConfig& cfg);

// Directory layout: graph.csv, opinions.csv, meta.json.
void save_dataset(const Dataset& d, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace opinn
