#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/classical.hpp"
#include "core/model.hpp"
#include "core/tensor.hpp"

namespace opinn {

// Elementwise metrics over all (user, time) cells.
double rmse(const Tensor& pred, const Tensor& truth);
double mae(const Tensor& pred, const Tensor& truth);

// Maps an (N x context_len) context to an (N x horizon_cols) forecast.
using Forecaster = std::function<Tensor(const Tensor& context, std::size_t horizon_cols)>;

struct MetricPair {
    double rmse = 0.0;
    double mae = 0.0;
};

// Scores a forecaster on every stride-1 window lying fully inside the test
// span; errors are pooled over all cells of all windows.
MetricPair evaluate_forecaster(const OpinionSeries& series, const SplitSpec& split,
                               const Forecaster& forecast, std::size_t context_len,
                               std::size_t horizon_cols);

// Mechanical baseline stepped per observed column from the last context
// column; the FJ anchor is the first context column.
Forecaster make_baseline_forecaster(const Graph& graph, const ClassicalConfig& cfg);

struct ModelEval {
    std::string model_name;
    std::size_t horizon = 0;  // observed columns
    std::vector<std::uint64_t> seeds;
    std::vector<double> rmse_runs;  // aligned with seeds, sorted by seed
    std::vector<double> mae_runs;
    double rmse_mean = 0.0, rmse_std = 0.0;
    double mae_mean = 0.0, mae_std = 0.0;
};

// Sorts runs by seed and fills the mean/std fields.
ModelEval aggregate_runs(const std::string& model_name, std::size_t horizon,
                         std::vector<std::pair<std::uint64_t, MetricPair>> runs);

struct EvalReport {
    std::vector<ModelEval> entries;

    // Serialized values are displayed x100 (table convention of reporting
    // metrics in units of 1e-2); in-memory values are unscaled.
    std::string to_json() const;
    std::string to_csv() const;
};

}  // namespace opinn
