#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "core/classical.hpp"
#include "core/errors.hpp"
#include "core/eval.hpp"
#include "core/rng.hpp"
#include "helpers.hpp"

using namespace opinn;
using testutil::random_tensor;

TEST_CASE("metric values on hand-checked inputs") {
    Tensor pred(1, 2), truth(1, 2);
    pred.data = {1.0, -1.0};
    CHECK(rmse(pred, truth) == 1.0);
    CHECK(mae(pred, truth) == 1.0);

    Tensor a(2, 2);
    CHECK(rmse(a, a) == 0.0);
    CHECK(mae(a, a) == 0.0);

    Tensor wrong(2, 3);
    CHECK_THROWS_AS(rmse(pred, wrong), InvalidParameterError);
    CHECK_THROWS_AS(mae(pred, wrong), InvalidParameterError);
}

TEST_CASE("metrics agree with a scalar loop") {
    auto rng = make_stream(1, "test");
    Tensor pred = random_tensor(3, 4, rng);
    Tensor truth = random_tensor(3, 4, rng);
    double sq = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double d = pred(i, j) - truth(i, j);
            sq += d * d;
            ab += std::abs(d);
        }
    CHECK(std::abs(rmse(pred, truth) - std::sqrt(sq / 12.0)) <= 1e-12);
    CHECK(std::abs(mae(pred, truth) - ab / 12.0) <= 1e-12);
}

TEST_CASE("metrics are invariant under cell permutation") {
    auto rng = make_stream(2, "test");
    Tensor pred = random_tensor(4, 5, rng);
    Tensor truth = random_tensor(4, 5, rng);
    Tensor pred_r(5, 4), truth_r(5, 4);
    for (std::size_t k = 0; k < 20; ++k) {
        pred_r.data[19 - k] = pred.data[k];
        truth_r.data[19 - k] = truth.data[k];
    }
    CHECK(rmse(pred, truth) == doctest::Approx(rmse(pred_r, truth_r)).epsilon(1e-15));
    CHECK(mae(pred, truth) == doctest::Approx(mae(pred_r, truth_r)).epsilon(1e-15));
}

TEST_CASE("a perfect extrapolating oracle scores zero") {
    // every user follows x(t) = 0.001 t, so the oracle extends the last column
    OpinionSeries s(3, 40);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < 40; ++t) s.at(i, t) = 0.001 * static_cast<double>(t);

    Forecaster oracle = [](const Tensor& context, std::size_t horizon) {
        Tensor out(context.rows, horizon);
        for (std::size_t i = 0; i < context.rows; ++i)
            for (std::size_t k = 0; k < horizon; ++k)
                out(i, k) = context(i, context.cols - 1) +
                            0.001 * static_cast<double>(k + 1);
        return out;
    };
    MetricPair m = evaluate_forecaster(s, SplitSpec::standard(), oracle, 3, 2);
    CHECK(m.rmse <= 1e-15);
    CHECK(m.mae <= 1e-15);
}

TEST_CASE("evaluation windows stay inside the test span") {
    OpinionSeries s(2, 20);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t t = 0; t < 20; ++t) s.at(i, t) = static_cast<double>(t);

    std::vector<double> seen_starts;
    Forecaster probe = [&seen_starts](const Tensor& context, std::size_t horizon) {
        seen_starts.push_back(context(0, 0));
        Tensor out(context.rows, horizon);
        return out;
    };
    evaluate_forecaster(s, SplitSpec::standard(), probe, 2, 2);
    REQUIRE(!seen_starts.empty());
    // standard split of 20 columns puts the test span at [16, 20)
    double lo = *std::min_element(seen_starts.begin(), seen_starts.end());
    double hi = *std::max_element(seen_starts.begin(), seen_starts.end());
    CHECK(lo == 16.0);
    CHECK(hi + 2.0 + 2.0 <= 20.0);

    CHECK_THROWS_AS(evaluate_forecaster(s, SplitSpec::standard(), probe, 3, 5),
                    InvalidParameterError);
    CHECK_THROWS_AS(evaluate_forecaster(s, SplitSpec::standard(), probe, 0, 2),
                    InvalidParameterError);
}

TEST_CASE("memoryless baselines reproduce their own dynamics exactly") {
    // simulate a degroot trajectory, then score the degroot baseline on it:
    // stepping from any column replays the same arithmetic, so the error is 0
    Graph g = generate_ba_graph(15, 2, 4);
    auto rng = make_stream(4, "test");
    std::vector<double> x0(15);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double& v : x0) v = unif(rng);

    ClassicalConfig cfg;
    cfg.model = ClassicalModel::degroot;
    OpinionSeries s = simulate(g, x0, cfg, 39);

    MetricPair m =
        evaluate_forecaster(s, SplitSpec::standard(), make_baseline_forecaster(g, cfg), 4, 3);
    CHECK(m.rmse == 0.0);
    CHECK(m.mae == 0.0);

    cfg.model = ClassicalModel::hk;
    cfg.epsilon = 0.4;
    OpinionSeries sh = simulate(g, x0, cfg, 39);
    MetricPair mh =
        evaluate_forecaster(sh, SplitSpec::standard(), make_baseline_forecaster(g, cfg), 4, 3);
    CHECK(mh.rmse == 0.0);
}

TEST_CASE("baseline forecaster shapes, anchoring, and failure modes") {
    Graph g = generate_ba_graph(10, 2, 5);
    ClassicalConfig cfg;
    cfg.model = ClassicalModel::fj;
    cfg.alpha = 1.0;
    Forecaster fj = make_baseline_forecaster(g, cfg);

    // alpha = 1 with a constant context pins every step at clamp(x0 + mean)
    Tensor context(10, 3);
    for (double& v : context.data) v = 0.8;
    Tensor out = fj(context, 4);
    CHECK(out.rows == 10);
    CHECK(out.cols == 4);
    for (double v : out.data) CHECK(v == 1.0);

    Tensor wrong(7, 3);
    CHECK_THROWS_AS(fj(wrong, 2), InvalidParameterError);

    ClassicalConfig bad = cfg;
    bad.model = ClassicalModel::dcr_diffusion;
    CHECK_THROWS_AS(make_baseline_forecaster(g, bad)(context, 2), InvalidParameterError);

    // the stochastic baseline is deterministic per seed
    ClassicalConfig vt;
    vt.model = ClassicalModel::voter;
    vt.seed = 9;
    auto rng = make_stream(5, "test");
    Tensor mixed = random_tensor(10, 3, rng);
    CHECK(make_baseline_forecaster(g, vt)(mixed, 5).data ==
          make_baseline_forecaster(g, vt)(mixed, 5).data);
}

TEST_CASE("run aggregation sorts by seed and computes population stats") {
    std::vector<std::pair<std::uint64_t, MetricPair>> runs = {
        {2, {0.03, 0.02}}, {0, {0.01, 0.01}}, {1, {0.02, 0.03}}};
    ModelEval e = aggregate_runs("demo", 30, runs);
    CHECK(e.seeds == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(e.rmse_runs == std::vector<double>{0.01, 0.02, 0.03});
    CHECK(e.rmse_mean == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(e.rmse_std ==
          doctest::Approx(std::sqrt(2.0 / 3.0) * 0.01).epsilon(1e-12));
    CHECK(e.mae_mean == doctest::Approx(0.02).epsilon(1e-15));
    CHECK_THROWS_AS(aggregate_runs("demo", 30, {}), InvalidParameterError);
}

TEST_CASE("report serialization applies the 1e-2 display convention") {
    ModelEval e = aggregate_runs("opinn", 30, {{0, {0.015, 0.012}}});
    EvalReport report;
    report.entries.push_back(e);

    auto j = nlohmann::json::parse(report.to_json());
    CHECK(j["scale"] == "1e-2");
    REQUIRE(j["entries"].size() == 1);
    CHECK(j["entries"][0]["model"] == "opinn");
    CHECK(j["entries"][0]["rmse_mean"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(j["entries"][0]["mae_mean"].get<double>() == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(j["entries"][0]["rmse_std"].get<double>() == 0.0);
}

TEST_CASE("csv report pivots models by horizon with gaps left empty") {
    EvalReport report;
    report.entries.push_back(aggregate_runs("a", 60, {{0, {0.02, 0.01}}}));
    report.entries.push_back(aggregate_runs("a", 30, {{0, {0.01, 0.01}}}));
    report.entries.push_back(aggregate_runs("b", 30, {{0, {0.03, 0.02}}}));

    std::string csv = report.to_csv();
    CHECK(csv.find("model,rmse_mean@30,rmse_std@30,mae_mean@30,mae_std@30,"
                   "rmse_mean@60,rmse_std@60,mae_mean@60,mae_std@60") == 0);
    CHECK(csv.find("\na,1,0,1,0,2,0,1,0\n") != std::string::npos);
    CHECK(csv.find("\nb,3,0,2,0,,,,\n") != std::string::npos);
}
