#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "core/classical.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

using namespace opinn;

namespace {

std::vector<double> random_opinions(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

double column_variance(const OpinionSeries& s, std::size_t t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < s.num_users(); ++i) mean += s.at(i, t);
    mean /= static_cast<double>(s.num_users());
    double var = 0.0;
    for (std::size_t i = 0; i < s.num_users(); ++i) {
        double d = s.at(i, t) - mean;
        var += d * d;
    }
    return var / static_cast<double>(s.num_users());
}

}  // namespace

TEST_CASE("averaging step on hand-checked cases") {
    Graph edge(2, {{0, 1}});
    CHECK(step_degroot(edge, {0.0, 1.0}) == std::vector<double>{0.5, 0.5});

    Graph path(3, {{0, 1}, {1, 2}});
    auto out = step_degroot(path, {1.0, 0.0, -1.0});
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(-0.5).epsilon(1e-15));

    std::vector<double> constant(3, 0.3);
    CHECK(max_abs_diff(step_degroot(path, constant), constant) == 0.0);
}

TEST_CASE("bounded confidence step on hand-checked cases") {
    auto out = step_hk({0.0, 0.1, 1.0}, 0.2);
    CHECK(out[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-15));

    // full-range bound: every user moves to the mean of the others
    std::vector<double> x{-1.0, 0.0, 1.0};
    auto wide = step_hk(x, 2.0);
    CHECK(wide[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(wide[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(wide[2] == doctest::Approx(-0.5).epsilon(1e-15));

    // zero bound with distinct values: nobody moves
    CHECK(step_hk(x, 0.0) == x);
    CHECK_THROWS_AS(step_hk(x, -0.1), InvalidParameterError);
}

TEST_CASE("anchored step on hand-checked cases") {
    Graph edge(2, {{0, 1}});
    auto pre = step_fj_preclamp(edge, {1.0, -1.0}, {1.0, -1.0}, 0.5);
    CHECK(pre[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(pre[1] == doctest::Approx(0.5).epsilon(1e-15));

    auto clamped = step_fj(edge, {1.0, 1.0}, {1.0, 1.0}, 1.0);
    auto pre2 = step_fj_preclamp(edge, {1.0, 1.0}, {1.0, 1.0}, 1.0);
    CHECK(pre2 == std::vector<double>{2.0, 2.0});
    CHECK(clamped == std::vector<double>{1.0, 1.0});

    Graph path(3, {{0, 1}, {1, 2}});
    std::vector<double> constant(3, 0.4);
    CHECK(max_abs_diff(step_fj(path, constant, constant, 0.0), constant) < 1e-15);

    Graph with_isolated(3, {{0, 1}});
    CHECK_THROWS_AS(step_fj(with_isolated, {0, 0, 0}, {0, 0, 0}, 0.5),
                    InvalidParameterError);
}

TEST_CASE("copy step forced choices and support preservation") {
    auto rng = make_stream(0, "voter");
    Graph edge(2, {{0, 1}});
    CHECK(step_voter(edge, {0.2, -0.7}, rng) == std::vector<double>{-0.7, 0.2});

    std::vector<double> constant(2, 0.5);
    CHECK(step_voter(edge, constant, rng) == constant);

    Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    std::vector<double> x{0.9, 0.1, 0.2, 0.3, 0.4};
    auto out = step_voter(star, x, rng);
    for (std::size_t leaf = 1; leaf < 5; ++leaf) CHECK(out[leaf] == 0.9);
    // center copied some leaf's old value
    CHECK(std::find(x.begin() + 1, x.end(), out[0]) != x.end());

    // every output value existed in the input
    auto sample = make_stream(1, "test");
    Graph g = generate_ba_graph(20, 2, 5);
    auto xs = random_opinions(20, sample);
    auto ys = step_voter(g, xs, rng);
    for (double v : ys) CHECK(std::find(xs.begin(), xs.end(), v) != xs.end());
}

TEST_CASE("diffusion recurrence on hand-checked cases") {
    Graph path(3, {{0, 1}, {1, 2}});
    std::vector<std::vector<double>> quarter{{0.25}, {0.25, 0.25}, {0.25}};
    auto out = step_dcr_diffusion(path, {1.0, 0.0, -1.0}, quarter);
    CHECK(out[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(-0.75).epsilon(1e-15));

    std::vector<std::vector<double>> zeros{{0.0}, {0.0, 0.0}, {0.0}};
    std::vector<double> x{0.3, -0.2, 0.8};
    CHECK(step_dcr_diffusion(path, x, zeros) == x);

    std::vector<std::vector<double>> too_big{{0.6}, {0.6, 0.6}, {0.6}};
    CHECK_THROWS_AS(step_dcr_diffusion(path, x, too_big), InvalidParameterError);
}

TEST_CASE("reaction-diffusion recurrence hand-checked cases") {
    Graph edge(2, {{0, 1}});
    auto pre = step_dcr_reaction_diffusion_preclamp(edge, {1.0, -1.0}, {1.0, -1.0}, 0.0);
    CHECK(pre == std::vector<double>{-1.0, 1.0});

    std::vector<double> constant(2, 0.6);
    CHECK(max_abs_diff(
              step_dcr_reaction_diffusion_preclamp(edge, constant, constant, 0.0),
              constant) < 1e-15);
}

TEST_CASE("recurrence equivalence oracles over 100 random instances") {
    auto meta = make_stream(42, "test");
    double worst_diffusion = 0.0, worst_convection = 0.0, worst_reaction = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::size_t> size_dist(3, 50);
        std::size_t n = size_dist(meta);
        std::uniform_int_distribution<std::size_t> m_dist(1, std::min<std::size_t>(4, n - 1));
        std::size_t m = m_dist(meta);
        Graph g = generate_ba_graph(n, m, meta());

        auto x = random_opinions(n, meta);
        auto x0 = random_opinions(n, meta);
        std::uniform_real_distribution<double> eps_dist(0.0, 2.0);
        std::uniform_real_distribution<double> delta_dist(0.0, 1.0);
        double eps = eps_dist(meta);
        double delta = delta_dist(meta);

        // uniform 1/(deg+1) velocities reproduce the averaging model
        std::vector<std::vector<double>> w(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i].assign(g.degree(i), 1.0 / static_cast<double>(g.degree(i) + 1));
        worst_diffusion = std::max(
            worst_diffusion,
            max_abs_diff(step_dcr_diffusion(g, x, w), step_degroot(g, x)));

        worst_convection = std::max(
            worst_convection,
            max_abs_diff(step_dcr_convection(x, eps), step_hk(x, eps)));

        worst_reaction = std::max(
            worst_reaction,
            max_abs_diff(step_dcr_reaction_diffusion_preclamp(g, x, x0, delta),
                         step_fj_preclamp(g, x, x0, delta)));
    }
    CHECK(worst_diffusion <= 1e-12);
    CHECK(worst_convection <= 1e-12);
    CHECK(worst_reaction <= 1e-12);
}

TEST_CASE("averaging and bounded-confidence steps stay inside the range") {
    auto rng = make_stream(9, "test");
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = generate_ba_graph(30, 2, rng());
        auto x = random_opinions(30, rng);
        for (double v : step_degroot(g, x)) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
        for (double v : step_hk(x, 0.7)) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("simulation rolls forward deterministically") {
    auto rng = make_stream(2, "test");
    Graph g = generate_ba_graph(40, 2, 1);
    auto x0 = random_opinions(40, rng);

    ClassicalConfig degroot{ClassicalModel::degroot, 0.5, 0.5, 0.5, 0};
    OpinionSeries one = simulate(g, x0, degroot, 1);
    CHECK(one.num_steps() == 2);

    OpinionSeries traj = simulate(g, x0, degroot, 500);
    for (std::size_t t = 1; t <= 500; ++t)
        CHECK(column_variance(traj, t) <= column_variance(traj, t - 1) + 1e-15);

    ClassicalConfig voter{ClassicalModel::voter, 0.5, 0.5, 0.5, 77};
    CHECK(simulate(g, x0, voter, 50) == simulate(g, x0, voter, 50));

    CHECK_THROWS_AS(simulate(g, x0, degroot, 0), InvalidParameterError);
}
