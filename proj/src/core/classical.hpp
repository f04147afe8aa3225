#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/series.hpp"

namespace opinn {

// Mechanical opinion-dynamics update rules. All updates are synchronous:
// every node samples the previous state. Opinions live in [-1, 1].

enum class ClassicalModel {
    voter,
    degroot,
    fj,
    hk,
    dcr_diffusion,
    dcr_convection,
    dcr_reaction_diffusion,
};

ClassicalModel classical_model_from_name(const std::string& name);
std::string classical_model_name(ClassicalModel m);

struct ClassicalConfig {
    ClassicalModel model = ClassicalModel::degroot;
    double alpha = 0.5;    // FJ susceptibility, in [0,1]
    double epsilon = 0.5;  // HK confidence bound, >= 0
    double delta = 0.5;    // reaction weight for dcr_reaction_diffusion
    std::uint64_t seed = 0;
};

// x_i' = (x_i + sum of neighbor values) / (deg(i) + 1)
std::vector<double> step_degroot(const Graph& g, const std::vector<double>& x);

// Bounded confidence over the whole population: mean over peers j != i with
// |x_i - x_j| <= epsilon; empty set keeps the own opinion.
std::vector<double> step_hk(const std::vector<double>& x, double epsilon);

// x_i' = alpha * x0_i + mean of neighbor values, then clamped to [-1,1].
// The pre-clamp values are exposed for equivalence checks.
std::vector<double> step_fj_preclamp(const Graph& g, const std::vector<double>& x,
                                     const std::vector<double>& x0, double alpha);
std::vector<double> step_fj(const Graph& g, const std::vector<double>& x,
                            const std::vector<double>& x0, double alpha);

// Each non-isolated node copies one uniformly chosen neighbor's old value.
std::vector<double> step_voter(const Graph& g, const std::vector<double>& x,
                               std::mt19937_64& rng);

// Discrete diffusion step x_i' = (1 - sum_j w_ij) x_i + sum_j w_ij x_j with
// directed transport velocities; weights[i][k] pairs with g.neighbors(i)[k].
// Each node's weight sum must not exceed 1.
std::vector<double> step_dcr_diffusion(const Graph& g, const std::vector<double>& x,
                                       const std::vector<std::vector<double>>& weights);

// Global convection with uniform velocities and epsilon filtering; reduces to
// the HK update.
std::vector<double> step_dcr_convection(const std::vector<double>& x, double epsilon);

// Reaction-diffusion with uniform weights 1/deg(i); pre-clamp this equals the
// FJ update with alpha = delta.
std::vector<double> step_dcr_reaction_diffusion_preclamp(const Graph& g,
                                                         const std::vector<double>& x,
                                                         const std::vector<double>& x0,
                                                         double delta);
std::vector<double> step_dcr_reaction_diffusion(const Graph& g, const std::vector<double>& x,
                                                const std::vector<double>& x0, double delta);

// Rolls the configured step function forward; output has steps+1 columns with
// column 0 = x0. Deterministic for a fixed cfg.seed.
OpinionSeries simulate(const Graph& g, const std::vector<double>& x0,
                       const ClassicalConfig& cfg, std::size_t steps);

}  // namespace opinn
