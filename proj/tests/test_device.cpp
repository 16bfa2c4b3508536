#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "imp3d/error.hpp"
#include "imp3d/topology.hpp"

using namespace imp3d;

TEST_CASE("linear current at the read voltage") {
  MemristorSpec s;
  s.g_on = 115e-6;
  s.g_off = 10e-6;
  CHECK(current(s, DeviceState::on(), 0.1) == doctest::Approx(11.5e-6).epsilon(1e-12));
  CHECK(current(s, DeviceState::off(), 0.1) == doctest::Approx(1.0e-6).epsilon(1e-12));
  CHECK(current(s, DeviceState::on(), 0.0) == 0.0);
}

TEST_CASE("sinh current near zero follows the small-signal slope") {
  MemristorSpec s;
  s.g_on = 100e-6;
  s.g_off = 10e-6;
  s.iv_model = SinhIV{1e-4, 1.0, 10e-6 / 1.5, 1.5};
  const double direct = (10e-6 / 1.5) * std::sinh(1.5 * 0.01);
  CHECK(current(s, DeviceState::off(), 0.01) == doctest::Approx(0.1e-6).epsilon(0.01));
  CHECK(current(s, DeviceState::off(), 0.01) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(current(s, DeviceState::off(), 0.0) == 0.0);
}

TEST_CASE("fit_sinh reproduces the read conductance") {
  const SinhIV m = fit_sinh(125e-6, 5e-6, 2.0, 1.0);
  MemristorSpec s;
  s.g_on = 125e-6;
  s.g_off = 5e-6;
  s.iv_model = m;
  s.validate();
  CHECK(read_conductance(s, DeviceState::on()) == doctest::Approx(125e-6).epsilon(1e-12));
  CHECK(read_conductance(s, DeviceState::off()) == doctest::Approx(5e-6).epsilon(1e-12));
}

TEST_CASE("spec validation") {
  MemristorSpec s;
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.v_set_min = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.v_set_max = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.v_reset_min = 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.v_reset_max = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.g_off = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.g_off = 2.0 * bad.g_on;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.partial_reset_factor = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.iv_model = SinhIV{1e-4, 10.0, 1e-5, 1.0};  // slope 1e-3 S, far from g_on
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("threshold sampling") {
  MemristorSpec s;
  s.v_set_min = s.v_set_max = 1.5;
  RngStream rng(7, 0);
  for (int i = 0; i < 100; ++i) CHECK(sample_thresholds(s, rng).v_set == 1.5);

  s.v_set_min = 1.1;
  s.v_set_max = 1.9;
  RngStream a(42, 3);
  for (int i = 0; i < 10000; ++i) {
    const auto t = sample_thresholds(s, a);
    REQUIRE(t.v_set >= 1.1);
    REQUIRE(t.v_set <= 1.9);
    REQUIRE(t.v_reset_full >= s.v_reset_max);
    REQUIRE(t.v_reset_full <= t.v_reset_onset);
    REQUIRE(t.v_reset_onset <= s.v_reset_min);
  }
  CHECK(a.position() == 30000);

  RngStream x(9, 1), y(9, 1);
  x.seek(300);
  for (int i = 0; i < 100; ++i) sample_thresholds(s, y);
  const auto tx = sample_thresholds(s, x);
  const auto ty = sample_thresholds(s, y);
  CHECK(tx.v_set == ty.v_set);
  CHECK(tx.v_reset_onset == ty.v_reset_onset);
  CHECK(tx.v_reset_full == ty.v_reset_full);
}

TEST_CASE("nominal thresholds") {
  MemristorSpec s;
  s.v_set_min = 0.7;
  s.v_set_max = 1.6;
  const auto t = nominal_thresholds(s);
  CHECK(t.v_set == doctest::Approx(1.15));
  CHECK(t.v_reset_onset == s.v_reset_min);
  CHECK(t.v_reset_full == s.v_reset_max);
  CHECK(without_set_variation(s).set_half_width() == 0.0);
}

TEST_CASE("read decoding") {
  MemristorSpec s;
  s.g_on = 100e-6;
  s.g_off = 1e-6;
  CHECK(decode_bit(s, DeviceState::on()));
  CHECK_FALSE(decode_bit(s, DeviceState::off()));
  CHECK(decode_bit(s, {Logic::on, 0.2}));
  CHECK_FALSE(decode_bit(s, {Logic::on, 0.05}));
}

TEST_CASE("measured conductances give an ON/OFF read ratio above ten") {
  for (const auto& [id, spec] : measured_device_specs()) {
    CAPTURE(id);
    CHECK(current(spec, DeviceState::on(), kReadVoltage) /
              current(spec, DeviceState::off(), kReadVoltage) >
          10.0);
  }
}

TEST_CASE("property: current is odd, monotone and separates states") {
  RngStream rng(1234, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const MemristorSpec s = trial % 2 ? gen::sinh_spec(rng) : gen::linear_spec(rng);
    REQUIRE_NOTHROW(s.validate());
    for (Logic logic : {Logic::off, Logic::on}) {
      const DeviceState st{logic, 1.0};
      CHECK(current(s, st, 0.0) == 0.0);
      const double slope = differential_conductance(s, st, 0.0);
      CHECK(slope == doctest::Approx(state_conductance(s, logic)).epsilon(0.01));
      double prev = current(s, st, -3.0);
      for (int k = 1; k <= 60; ++k) {
        const double v = -3.0 + 0.1 * k;
        const double i = current(s, st, v);
        REQUIRE(i > prev);
        REQUIRE(current(s, st, -v) == doctest::Approx(-i).epsilon(1e-12));
        prev = i;
      }
    }
    for (int k = 1; k <= 20; ++k) {
      const double v = s.v_set_min * k / 20.0;
      REQUIRE(current(s, DeviceState::on(), v) > current(s, DeviceState::off(), v));
    }
  }
}

TEST_CASE("property: conductance_scale scales linear current") {
  RngStream rng(99, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const MemristorSpec s = gen::linear_spec(rng);
    const double scale = gen::uniform(rng, 0.1, 1.0);
    const double v = gen::uniform(rng, -3.0, 3.0);
    CHECK(current(s, {Logic::on, scale}, v) ==
          doctest::Approx(scale * current(s, DeviceState::on(), v)).epsilon(1e-14));
  }
}
