#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "core/errors.hpp"
#include "core/synthgen.hpp"

using namespace opinn;

namespace {

double column_std(const OpinionSeries& s, std::size_t t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < s.num_users(); ++i) mean += s.at(i, t);
    mean /= static_cast<double>(s.num_users());
    double var = 0.0;
    for (std::size_t i = 0; i < s.num_users(); ++i) {
        double d = s.at(i, t) - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(s.num_users()));
}

}  // namespace

TEST_CASE("pattern defaults match the published parameter table") {
    auto c = default_synth_config(SynthPattern::consensus, 100, 0);
    CHECK(c.lambda == 0.2);
    CHECK(c.epsilon == 0.5);
    auto p = default_synth_config(SynthPattern::polarization, 100, 0);
    CHECK(p.lambda == 0.1);
    CHECK(p.epsilon == 0.3);
    auto k = default_synth_config(SynthPattern::clustering, 100, 0);
    CHECK(k.lambda == 0.15);
    CHECK(k.epsilon == 0.2);
    for (const auto& cfg : {c, p, k}) {
        CHECK(cfg.eta == 0.015);
        CHECK(cfg.raw_steps == 50);
        CHECK(cfg.target_steps == 400);
        CHECK(cfg.m_ba == 10);
    }
}

TEST_CASE("linear resampling on hand-checked cases") {
    OpinionSeries two(1, 2);
    two.at(0, 0) = 0.0;
    two.at(0, 1) = 1.0;
    auto three = interpolate_linear(two, 3);
    REQUIRE(three.num_steps() == 3);
    CHECK(three.at(0, 0) == 0.0);
    CHECK(three.at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(three.at(0, 2) == 1.0);

    CHECK(interpolate_linear(two, 2) == two);
    CHECK_THROWS_AS(interpolate_linear(two, 1), InvalidParameterError);
}

TEST_CASE("resampling 51 columns to 400 matches the segment oracle") {
    SynthConfig cfg = default_synth_config(SynthPattern::consensus, 50, 3);
    cfg.m_ba = 3;
    cfg.target_steps = 400;
    Dataset d = generate(cfg);
    REQUIRE(d.opinions.num_steps() == 400);

    // regenerate the raw trajectory by asking for no resampling
    SynthConfig raw_cfg = cfg;
    raw_cfg.target_steps = 51;
    Dataset raw = generate(raw_cfg);
    REQUIRE(raw.opinions.num_steps() == 51);

    double worst = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t t = 0; t < 400; ++t) {
            double pos = static_cast<double>(t) * 50.0 / 399.0;
            auto lo = static_cast<std::size_t>(pos);
            std::size_t hi = std::min<std::size_t>(lo + 1, 50);
            double frac = pos - static_cast<double>(lo);
            double expect =
                (1.0 - frac) * raw.opinions.at(i, lo) + frac * raw.opinions.at(i, hi);
            worst = std::max(worst, std::abs(d.opinions.at(i, t) - expect));
        }
    }
    CHECK(worst < 1e-12);
    // endpoints preserved exactly
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(d.opinions.at(i, 0) == raw.opinions.at(i, 0));
        CHECK(d.opinions.at(i, 399) == raw.opinions.at(i, 50));
    }
}

TEST_CASE("full stubbornness with no noise freezes the trajectory") {
    SynthConfig cfg = default_synth_config(SynthPattern::consensus, 30, 1);
    cfg.m_ba = 2;
    cfg.lambda = 1.0;
    cfg.eta = 0.0;
    Dataset d = generate(cfg);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t t = 0; t < d.opinions.num_steps(); ++t)
            CHECK(d.opinions.at(i, t) == d.opinions.at(i, 0));
}

TEST_CASE("generation is deterministic and stays in range") {
    SynthConfig cfg = default_synth_config(SynthPattern::polarization, 80, 12);
    cfg.m_ba = 3;
    Dataset a = generate(cfg);
    Dataset b = generate(cfg);
    CHECK(a.opinions == b.opinions);
    CHECK(a.graph.edges() == b.graph.edges());
    for (double v : a.opinions.data()) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("consensus defaults shrink the opinion spread") {
    // needs the full population density; small graphs stall in local clusters
    SynthConfig cfg = default_synth_config(SynthPattern::consensus, 2000, 5);
    Dataset d = generate(cfg);
    CHECK(column_std(d.opinions, d.opinions.num_steps() - 1) <
          0.5 * column_std(d.opinions, 0));
}

TEST_CASE("config validation rejects bad parameters") {
    SynthConfig cfg = default_synth_config(SynthPattern::consensus, 30, 0);
    cfg.m_ba = 2;
    SynthConfig bad = cfg;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(generate(bad), InvalidParameterError);
    bad = cfg;
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(generate(bad), InvalidParameterError);
    bad = cfg;
    bad.n = 1;
    CHECK_THROWS_AS(generate(bad), InvalidParameterError);
}

TEST_CASE("dataset round trips bitwise and reports parse errors") {
    auto dir = std::filesystem::temp_directory_path() / "opinn_synth_test";
    std::filesystem::remove_all(dir);

    SynthConfig cfg = default_synth_config(SynthPattern::clustering, 40, 8);
    cfg.m_ba = 2;
    Dataset d = generate(cfg);
    save_dataset(d, dir);
    Dataset back = load_dataset(dir);
    CHECK(back.opinions == d.opinions);
    CHECK(back.graph.edges() == d.graph.edges());
    CHECK(back.pattern_name == d.pattern_name);
    CHECK(back.config.seed == d.config.seed);

    std::filesystem::remove(dir / "graph.csv");
    CHECK_THROWS_AS(load_dataset(dir), DataError);

    save_dataset(d, dir);
    {
        std::ofstream bad(dir / "opinions.csv");
        bad << "bogus header\n0.5\n";
    }
    CHECK_THROWS_AS(load_dataset(dir), DataError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("series csv preserves doubles bitwise") {
    auto dir = std::filesystem::temp_directory_path() / "opinn_series_test";
    std::filesystem::create_directories(dir);
    OpinionSeries s(2, 3);
    s.at(0, 0) = 0.1;
    s.at(0, 1) = -1.0 / 3.0;
    s.at(0, 2) = 1e-17;
    s.at(1, 0) = -0.9999999999999999;
    s.at(1, 1) = 0.0;
    s.at(1, 2) = 0.7071067811865476;
    save_series_csv(s, dir / "s.csv");
    CHECK(load_series_csv(dir / "s.csv") == s);
    std::filesystem::remove_all(dir);
}
