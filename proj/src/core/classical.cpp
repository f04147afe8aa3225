#include "core/classical.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace opinn {

namespace {

double clamp_opinion(double v) { return std::clamp(v, -1.0, 1.0); }

void check_dims(const Graph& g, const std::vector<double>& x, const char* what) {
    if (x.size() != g.num_nodes())
        throw InvalidParameterError(std::string(what) + ": opinion vector size " +
                                    std::to_string(x.size()) + " does not match node count " +
                                    std::to_string(g.num_nodes()));
}

}  // namespace

ClassicalModel classical_model_from_name(const std::string& name) {
    if (name == "voter") return ClassicalModel::voter;
    if (name == "degroot") return ClassicalModel::degroot;
    if (name == "fj") return ClassicalModel::fj;
    if (name == "hk") return ClassicalModel::hk;
    if (name == "dcr_diffusion") return ClassicalModel::dcr_diffusion;
    if (name == "dcr_convection") return ClassicalModel::dcr_convection;
    if (name == "dcr_reaction_diffusion") return ClassicalModel::dcr_reaction_diffusion;
    throw InvalidParameterError("unknown classical model '" + name + "'");
}

std::string classical_model_name(ClassicalModel m) {
    switch (m) {
        case ClassicalModel::voter: return "voter";
        case ClassicalModel::degroot: return "degroot";
        case ClassicalModel::fj: return "fj";
        case ClassicalModel::hk: return "hk";
        case ClassicalModel::dcr_diffusion: return "dcr_diffusion";
        case ClassicalModel::dcr_convection: return "dcr_convection";
        case ClassicalModel::dcr_reaction_diffusion: return "dcr_reaction_diffusion";
    }
    throw InvalidParameterError("unknown classical model enum");
}

std::vector<double> step_degroot(const Graph& g, const std::vector<double>& x) {
    check_dims(g, x, "step_degroot");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double sum = x[i];
        for (std::size_t j : g.neighbors(i)) sum += x[j];
        out[i] = sum / static_cast<double>(g.degree(i) + 1);
    }
    return out;
}

std::vector<double> step_hk(const std::vector<double>& x, double epsilon) {
    if (epsilon < 0) throw InvalidParameterError("step_hk: epsilon must be >= 0");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j == i) continue;
            if (std::abs(x[i] - x[j]) <= epsilon) {
                sum += x[j];
                ++count;
            }
        }
        out[i] = count ? sum / static_cast<double>(count) : x[i];
    }
    return out;
}

std::vector<double> step_fj_preclamp(const Graph& g, const std::vector<double>& x,
                                     const std::vector<double>& x0, double alpha) {
    check_dims(g, x, "step_fj");
    check_dims(g, x0, "step_fj");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t deg = g.degree(i);
        if (deg == 0)
            throw InvalidParameterError("step_fj: node " + std::to_string(i) +
                                        " is isolated; the update is undefined");
        double sum = 0.0;
        for (std::size_t j : g.neighbors(i)) sum += x[j];
        out[i] = alpha * x0[i] + sum / static_cast<double>(deg);
    }
    return out;
}

std::vector<double> step_fj(const Graph& g, const std::vector<double>& x,
                            const std::vector<double>& x0, double alpha) {
    auto out = step_fj_preclamp(g, x, x0, alpha);
    for (double& v : out) v = clamp_opinion(v);
    return out;
}

std::vector<double> step_voter(const Graph& g, const std::vector<double>& x,
                               std::mt19937_64& rng) {
    check_dims(g, x, "step_voter");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& nbrs = g.neighbors(i);
        if (nbrs.empty()) {
            out[i] = x[i];
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
        out[i] = x[nbrs[pick(rng)]];
    }
    return out;
}

std::vector<double> step_dcr_diffusion(const Graph& g, const std::vector<double>& x,
                                       const std::vector<std::vector<double>>& weights) {
    check_dims(g, x, "step_dcr_diffusion");
    if (weights.size() != g.num_nodes())
        throw InvalidParameterError("step_dcr_diffusion: one weight list per node required");

    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& nbrs = g.neighbors(i);
        if (weights[i].size() != nbrs.size())
            throw InvalidParameterError(
                "step_dcr_diffusion: weight count does not match degree at node " +
                std::to_string(i));
        double weight_sum = 0.0;
        double flow = 0.0;
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            weight_sum += weights[i][k];
            flow += weights[i][k] * x[nbrs[k]];
        }
        if (weight_sum > 1.0 + 1e-12)
            throw InvalidParameterError("step_dcr_diffusion: weight sum exceeds 1 at node " +
                                        std::to_string(i));
        out[i] = (1.0 - weight_sum) * x[i] + flow;
    }
    return out;
}

std::vector<double> step_dcr_convection(const std::vector<double>& x, double epsilon) {
    // Uniform velocities over the epsilon-filtered population; identical to HK.
    return step_hk(x, epsilon);
}

std::vector<double> step_dcr_reaction_diffusion_preclamp(const Graph& g,
                                                         const std::vector<double>& x,
                                                         const std::vector<double>& x0,
                                                         double delta) {
    check_dims(g, x, "step_dcr_reaction_diffusion");
    check_dims(g, x0, "step_dcr_reaction_diffusion");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t deg = g.degree(i);
        if (deg == 0)
            throw InvalidParameterError("step_dcr_reaction_diffusion: node " +
                                        std::to_string(i) + " is isolated");
        double w = 1.0 / static_cast<double>(deg);
        double diffused = (1.0 - static_cast<double>(deg) * w) * x[i];
        for (std::size_t j : g.neighbors(i)) diffused += w * x[j];
        out[i] = diffused + delta * x0[i];
    }
    return out;
}

std::vector<double> step_dcr_reaction_diffusion(const Graph& g, const std::vector<double>& x,
                                                const std::vector<double>& x0, double delta) {
    auto out = step_dcr_reaction_diffusion_preclamp(g, x, x0, delta);
    for (double& v : out) v = clamp_opinion(v);
    return out;
}

OpinionSeries simulate(const Graph& g, const std::vector<double>& x0,
                       const ClassicalConfig& cfg, std::size_t steps) {
    check_dims(g, x0, "simulate");
    if (steps < 1) throw InvalidParameterError("simulate: steps must be >= 1");

    OpinionSeries series(g.num_nodes(), steps + 1);
    series.set_column(0, x0);

    auto rng = make_stream(cfg.seed, "voter");
    std::vector<double> x = x0;
    for (std::size_t t = 1; t <= steps; ++t) {
        switch (cfg.model) {
            case ClassicalModel::voter: x = step_voter(g, x, rng); break;
            case ClassicalModel::degroot: x = step_degroot(g, x); break;
            case ClassicalModel::fj: x = step_fj(g, x, x0, cfg.alpha); break;
            case ClassicalModel::hk: x = step_hk(x, cfg.epsilon); break;
            case ClassicalModel::dcr_convection:
                x = step_dcr_convection(x, cfg.epsilon);
                break;
            case ClassicalModel::dcr_reaction_diffusion:
                x = step_dcr_reaction_diffusion(g, x, x0, cfg.delta);
                break;
            case ClassicalModel::dcr_diffusion: {
                // uniform velocities 1/(deg+1), the DeGroot-equivalent choice
                std::vector<std::vector<double>> w(g.num_nodes());
                for (std::size_t i = 0; i < g.num_nodes(); ++i)
                    w[i].assign(g.degree(i),
                                1.0 / static_cast<double>(g.degree(i) + 1));
                x = step_dcr_diffusion(g, x, w);
                break;
            }
        }
        series.set_column(t, x);
    }
    return series;
}

}  // namespace opinn
