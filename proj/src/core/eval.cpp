#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace opinn {

using nlohmann::json;

double rmse(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "rmse");
    double acc = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        double d = pred.data[k] - truth.data[k];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "mae");
    double acc = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k)
        acc += std::abs(pred.data[k] - truth.data[k]);
    return acc / static_cast<double>(pred.size());
}

MetricPair evaluate_forecaster(const OpinionSeries& series, const SplitSpec& split,
                               const Forecaster& forecast, std::size_t context_len,
                               std::size_t horizon_cols) {
    if (context_len == 0 || horizon_cols == 0)
        throw InvalidParameterError("evaluate: context and horizon must be positive");
    auto [t1, t2] = split.boundaries(series.num_steps());
    (void)t1;
    auto starts = window_starts(t2, series.num_steps(), context_len, horizon_cols);
    if (starts.empty())
        throw InvalidParameterError("evaluate: test span too short for one window");

    double sq = 0.0, ab = 0.0;
    std::size_t cells = 0;
    for (std::size_t start : starts) {
        Tensor context = series_window(series, start, context_len);
        Tensor pred = forecast(context, horizon_cols);
        Tensor truth = series_window(series, start + context_len, horizon_cols);
        require_same_shape(pred, truth, "evaluate");
        for (std::size_t k = 0; k < pred.size(); ++k) {
            double d = pred.data[k] - truth.data[k];
            sq += d * d;
            ab += std::abs(d);
        }
        cells += pred.size();
    }
    return {std::sqrt(sq / static_cast<double>(cells)),
            ab / static_cast<double>(cells)};
}

Forecaster make_baseline_forecaster(const Graph& graph, const ClassicalConfig& cfg) {
    return [&graph, cfg](const Tensor& context, std::size_t horizon_cols) {
        if (context.rows != graph.num_nodes())
            throw InvalidParameterError("baseline: context rows do not match the graph");
        if (context.cols == 0)
            throw InvalidParameterError("baseline: empty context");

        std::size_t n = context.rows;
        std::vector<double> state(n), anchor(n);
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = context(i, context.cols - 1);
            anchor[i] = context(i, 0);
        }

        auto rng = make_stream(cfg.seed, "voter");
        Tensor out(n, horizon_cols);
        for (std::size_t t = 0; t < horizon_cols; ++t) {
            switch (cfg.model) {
                case ClassicalModel::voter:
                    state = step_voter(graph, state, rng);
                    break;
                case ClassicalModel::degroot:
                    state = step_degroot(graph, state);
                    break;
                case ClassicalModel::fj:
                    state = step_fj(graph, state, anchor, cfg.alpha);
                    break;
                case ClassicalModel::hk:
                    state = step_hk(state, cfg.epsilon);
                    break;
                default:
                    throw InvalidParameterError(
                        "baseline: unsupported model '" +
                        classical_model_name(cfg.model) + "'");
            }
            for (std::size_t i = 0; i < n; ++i) out(i, t) = state[i];
        }
        return out;
    };
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

constexpr double kDisplayScale = 100.0;  // metrics reported in units of 1e-2

}  // namespace

ModelEval aggregate_runs(const std::string& model_name, std::size_t horizon,
                         std::vector<std::pair<std::uint64_t, MetricPair>> runs) {
    if (runs.empty()) throw InvalidParameterError("aggregate_runs: no runs");
    std::sort(runs.begin(), runs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ModelEval e;
    e.model_name = model_name;
    e.horizon = horizon;
    for (const auto& [seed, m] : runs) {
        e.seeds.push_back(seed);
        e.rmse_runs.push_back(m.rmse);
        e.mae_runs.push_back(m.mae);
    }
    std::tie(e.rmse_mean, e.rmse_std) = mean_std(e.rmse_runs);
    std::tie(e.mae_mean, e.mae_std) = mean_std(e.mae_runs);
    return e;
}

std::string EvalReport::to_json() const {
    json j;
    j["scale"] = "1e-2";
    json arr = json::array();
    for (const auto& e : entries) {
        json ej;
        ej["model"] = e.model_name;
        ej["horizon"] = e.horizon;
        ej["seeds"] = e.seeds;
        json rmse_runs = json::array(), mae_runs = json::array();
        for (double v : e.rmse_runs) rmse_runs.push_back(v * kDisplayScale);
        for (double v : e.mae_runs) mae_runs.push_back(v * kDisplayScale);
        ej["rmse_runs"] = rmse_runs;
        ej["mae_runs"] = mae_runs;
        ej["rmse_mean"] = e.rmse_mean * kDisplayScale;
        ej["rmse_std"] = e.rmse_std * kDisplayScale;
        ej["mae_mean"] = e.mae_mean * kDisplayScale;
        ej["mae_std"] = e.mae_std * kDisplayScale;
        arr.push_back(ej);
    }
    j["entries"] = arr;
    return j.dump(2);
}

std::string EvalReport::to_csv() const {
    std::vector<std::size_t> horizons;
    std::vector<std::string> models;
    for (const auto& e : entries) {
        if (std::find(horizons.begin(), horizons.end(), e.horizon) == horizons.end())
            horizons.push_back(e.horizon);
        if (std::find(models.begin(), models.end(), e.model_name) == models.end())
            models.push_back(e.model_name);
    }
    std::sort(horizons.begin(), horizons.end());

    std::ostringstream out;
    out << "model";
    for (std::size_t h : horizons)
        out << ",rmse_mean@" << h << ",rmse_std@" << h << ",mae_mean@" << h
            << ",mae_std@" << h;
    out << '\n';

    for (const auto& name : models) {
        out << name;
        for (std::size_t h : horizons) {
            auto it = std::find_if(entries.begin(), entries.end(), [&](const ModelEval& e) {
                return e.model_name == name && e.horizon == h;
            });
            if (it == entries.end()) {
                out << ",,,,";
                continue;
            }
            out << ',' << it->rmse_mean * kDisplayScale << ',' << it->rmse_std * kDisplayScale
                << ',' << it->mae_mean * kDisplayScale << ',' << it->mae_std * kDisplayScale;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace opinn
