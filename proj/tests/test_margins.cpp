#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "imp3d/error.hpp"
#include "imp3d/margins.hpp"

using namespace imp3d;

namespace {

MemristorSpec window(double lo, double hi) {
  MemristorSpec s;
  s.v_set_min = lo;
  s.v_set_max = hi;
  return s;
}

}  // namespace

TEST_CASE("v_star") {
  CHECK(v_star(window(1.1, 1.9)) == doctest::Approx(1.5));
  CHECK(v_star(window(0.7, 1.6)) == doctest::Approx(1.15));
  CHECK(v_star(window(1.3, 1.3)) == 1.3);
}

TEST_CASE("zero-variation margin") {
  CHECK(delta_ideal_parallel(0.0, 10.0, 1.0, 1.0) == doctest::Approx(9.0 / 31.0).epsilon(1e-14));
  CHECK(delta_ideal_parallel(0.0, 1.0, 1.0, 1.0) == 0.0);
  const double big = delta_ideal_parallel(0.0, 1e4, 1.0, 1.0);
  CHECK(std::abs(big - 1.0 / 3.0) <= 0.01 / 3.0);
}

TEST_CASE("optimal bias") {
  CHECK(optimal_i_l(10e-6, 1.5) == doctest::Approx(-30e-6).epsilon(1e-14));
  CHECK(optimal_bias(1e-5, 1e-5, 1e-5, 1.0).v_p == 0.0);
  const MemristorSpec s = window(1.0, 1.0);
  CHECK(analyze_parallel(s, 0.0).optimal_i_l == doctest::Approx(-2.0 * s.g_off));
}

TEST_CASE("optimal resistive bias balances the three binding drops") {
  const double g_on = 100e-6, g_off = 10e-6, v = 1.0;
  const double g_l = std::sqrt(g_on * g_off);
  const double d = delta_ideal_parallel(g_l, g_on, g_off, v);
  const BiasPoint b = optimal_bias(g_l, g_on, g_off, v);
  const auto drops = parallel_binding_drops(b.v_p, g_l * b.v_l, g_l, g_on, g_off);
  CHECK(std::abs(drops.q_both_off - (v + d)) <= 1e-12 * v);
  CHECK(std::abs(drops.q_p_on - (v - d)) <= 1e-12 * v);
  CHECK(std::abs(drops.p_both_off - (v - d)) <= 1e-12 * v);
}

TEST_CASE("property: optimal bias is self-consistent") {
  RngStream rng(8, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const double g_off = gen::log_uniform(rng, 1e-6, 1e-4);
    const double g_on = g_off * gen::log_uniform(rng, 1.5, 1e4);
    const double v = gen::uniform(rng, 0.5, 2.5);
    const bool current_source = trial % 2 == 0;
    const double g_l = current_source ? 0.0 : g_on * gen::log_uniform(rng, 1e-3, 10.0);
    const double d = delta_ideal_parallel(g_l, g_on, g_off, v);
    double v_p = -2.0 * d;
    double injected = optimal_i_l(g_off, v);
    if (!current_source) {
      const BiasPoint b = optimal_bias(g_l, g_on, g_off, v);
      v_p = b.v_p;
      injected = g_l * b.v_l;
    }
    const auto drops = parallel_binding_drops(v_p, injected, g_l, g_on, g_off);
    REQUIRE(std::abs(drops.q_both_off - (v + d)) <= 1e-12 * v);
    REQUIRE(std::abs(drops.q_p_on - (v - d)) <= 1e-12 * v);
    REQUIRE(std::abs(drops.p_both_off - (v - d)) <= 1e-12 * v);
  }
}

TEST_CASE("actual margin subtracts the set half-width") {
  MemristorSpec b = window(1.1, 1.9);
  b.g_on = 115e-6;
  b.g_off = 10e-6;
  const double ideal = delta_ideal_parallel(0.0, b.g_on, b.g_off, b.v_star());
  CHECK(ideal == doctest::Approx(1.5 * 105.0 / 355.0).epsilon(1e-14));
  CHECK(delta_actual(ideal, b) == doctest::Approx(1.5 * 105.0 / 355.0 - 0.4).epsilon(1e-12));
  CHECK(delta_actual(ideal, without_set_variation(b)) == ideal);
  CHECK(delta_actual(0.1, window(1.0, 1.4)) < 0.0);
  const auto report = analyze_parallel(b, 0.0);
  CHECK(report.delta_actual == doctest::Approx(0.04366197).epsilon(1e-6));
  CHECK(report.delta_actual_normalized() == doctest::Approx(report.delta_actual / 1.5));
}

TEST_CASE("general margin for mixed polarities") {
  RngStream rng(3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const MemristorSpec s = gen::linear_spec(rng);
    const double reduced =
        delta_actual(delta_ideal_parallel(0.0, s.g_on, s.g_off, s.v_star()), s);
    CHECK(std::abs(delta_general(s, s, Polarity::parallel, s.g_on, s.g_off) - reduced) <=
          1e-12 * s.v_star());
  }
  MemristorSpec s = window(1.1, 1.9);
  s.v_reset_min = -1.5;
  CHECK(delta_general(s, s, Polarity::parallel, s.g_on, s.g_off) <
        delta_general(s, s, Polarity::anti_parallel, s.g_on, s.g_off));
  MemristorSpec z = window(1.2, 1.2);
  z.v_reset_min = -1.2;
  z.v_reset_max = -2.0;
  CHECK(delta_general(z, z, Polarity::anti_parallel, z.g_on, z.g_off) ==
        doctest::Approx(delta_ideal_parallel(0.0, z.g_on, z.g_off, 1.2)).epsilon(1e-14));
}

TEST_CASE("memory margin and legacy load") {
  CHECK(delta_memory(1.2) == doctest::Approx(0.6));
  CHECK(legacy_load(100e-6, 1e-6) == doctest::Approx(10e-6).epsilon(1e-14));
  for (double ratio : {1.0, 2.0, 10.0, 1e3, 1e9})
    CHECK(delta_memory(1.0) > delta_ideal_parallel(0.0, ratio, 1.0, 1.0));
}

TEST_CASE("current source beats the legacy load by more than 20% at ratio 10") {
  const double at_zero = delta_ideal_parallel(0.0, 10.0, 1.0, 1.0);
  const double at_legacy = delta_ideal_parallel(legacy_load(10.0, 1.0), 10.0, 1.0, 1.0);
  CHECK(at_zero / at_legacy >= 1.20);
  CHECK(at_zero / at_legacy == doctest::Approx(1.204).epsilon(1e-3));
}

TEST_CASE("property: margin decreases with load and is bounded by v*/3") {
  RngStream rng(4, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const double g_off = gen::log_uniform(rng, 1e-7, 1e-4);
    const double g_on = g_off * gen::log_uniform(rng, 1.0001, 1e6);
    const double v = gen::uniform(rng, 0.2, 3.0);
    const double a = g_on * gen::uniform(rng, 0.0, 5.0);
    const double b = a + g_on * gen::uniform(rng, 1e-6, 5.0);
    REQUIRE(delta_ideal_parallel(b, g_on, g_off, v) < delta_ideal_parallel(a, g_on, g_off, v));
    const double at_zero = delta_ideal_parallel(0.0, g_on, g_off, v);
    REQUIRE(at_zero >= 0.0);
    REQUIRE(at_zero < v / 3.0);
  }
}

TEST_CASE("sweep table") {
  const std::vector<double> ratios{1.0, 3.0, 10.0, 100.0};
  const auto rows = margin_sweep(0.0, 2.0, 100, ratios);
  CHECK(rows.size() == ratios.size() * 101);
  for (double ratio : ratios) {
    std::vector<SweepRow> curve;
    for (const auto& r : rows)
      if (r.ratio == ratio && r.marker == 0) curve.push_back(r);
    REQUIRE(curve.size() == 100);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      if (ratio == 1.0)
        CHECK(curve[i].delta_over_v_star == 0.0);
      else
        CHECK(curve[i].delta_over_v_star < curve[i - 1].delta_over_v_star);
    }
  }
  for (const auto& r : rows) {
    if (r.ratio == 10.0 && r.marker == 1) {
      CHECK(r.g_l_over_g_on == doctest::Approx(std::sqrt(0.1)));
      CHECK(r.delta_over_v_star == doctest::Approx(0.2412).epsilon(1e-3));
    }
    if (r.ratio == 10.0 && r.marker == 0 && r.g_l_over_g_on == 0.0)
      CHECK(r.delta_over_v_star == doctest::Approx(0.2903).epsilon(1e-3));
  }
  CHECK_THROWS_AS(margin_sweep(1.0, 0.0, 5, ratios), ConfigError);
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(margin_sweep(0.0, 1.0, 5, bad), ConfigError);
}
