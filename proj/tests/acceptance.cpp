// Acceptance runner: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "generators.hpp"
#include "imp3d/adder.hpp"
#include "imp3d/margins.hpp"
#include "imp3d/montecarlo.hpp"
#include "imp3d/optimizer.hpp"
#include "oracles.hpp"

using namespace imp3d;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome margin_improvement() {
  const auto start = Clock::now();
  const double at_zero = delta_ideal_parallel(0.0, 10.0, 1.0, 1.0);
  const double at_legacy = delta_ideal_parallel(legacy_load(10.0, 1.0), 10.0, 1.0, 1.0);
  const double ratio = at_zero / at_legacy;
  const double ms = seconds_since(start) * 1e3;
  return {ratio >= 1.20 && ms < 1.0, fmt("ratio %.4f, %.4f ms", ratio, ms)};
}

Outcome asymptote() {
  const double limit = delta_ideal_parallel(0.0, 1e4, 1.0, 1.0);
  const double rel = std::abs(limit - 1.0 / 3.0) / (1.0 / 3.0);
  bool memory_wins = true;
  for (double ratio = 1.0; ratio <= 1e12; ratio *= 1.5)
    memory_wins = memory_wins && delta_memory(1.0) > delta_ideal_parallel(0.0, ratio, 1.0, 1.0);
  return {rel <= 0.01 && memory_wins,
          fmt("delta(1e4)/v* = %.6f (%.3f%% from 1/3), memory margin above at every ratio: ", limit,
              100.0 * rel) +
              (memory_wins ? "yes" : "no")};
}

Outcome analytic_equivalence() {
  const auto start = Clock::now();
  const auto t = build_default_stack();
  RngStream rng(2025, 0);
  OptimizerOptions opts;
  opts.require_feasible = false;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    MemristorSpec s = gen::linear_spec(rng);
    s.v_reset_min = -gen::uniform(rng, 2.0, 3.0) * s.v_set_max;
    s.v_reset_max = s.v_reset_min - 0.5;
    const SpecTable specs{{"B1", s}, {"B2", s}, {"T1", s}, {"T2", s}};
    const auto r = optimize(t, {{"B1", "B2"}}, specs, LoadSpec::current_source(), opts);
    const double ideal = delta_ideal_parallel(0.0, s.g_on, s.g_off, s.v_star());
    const double margin = delta_actual(ideal, s);
    const double i_l = optimal_i_l(s.g_off, s.v_star());
    worst = std::max({worst, std::abs(r.margin - margin) / std::abs(margin),
                      std::abs(r.best_config.v_p + 2.0 * ideal) / (2.0 * ideal),
                      std::abs(std::get<CurrentSourceLoad>(r.best_config.load).i_l - i_l) /
                          std::abs(i_l)});
  }
  SolverOptions iterative;
  iterative.force_iterative = true;
  double worst_v = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const MemristorSpec p = gen::linear_spec(rng);
    const MemristorSpec q = gen::linear_spec(rng);
    const auto c = gen::circuit(rng, p, q);
    worst_v = std::max(worst_v, std::abs(solve_circuit(c).v_c - solve_circuit(c, iterative).v_c));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-3 && worst_v <= 1e-12 && secs < 10.0,
          fmt("optimizer worst rel. error %.2e over 100 specs, solver worst %.2e V over 1000 "
              "circuits, %.2f s",
              worst, worst_v, secs)};
}

Outcome sweep_monotone() {
  const std::vector<double> ratios{3.0, 10.0, 100.0};
  const auto rows = margin_sweep(0.0, 2.0, 100, ratios);
  bool ok = true;
  int points = 0;
  for (double ratio : ratios) {
    double prev = INFINITY;
    for (const auto& r : rows) {
      if (r.ratio != ratio || r.marker != 0) continue;
      ok = ok && r.delta_over_v_star < prev;
      prev = r.delta_over_v_star;
      ++points;
    }
  }
  ok = ok && points == 300;
  return {ok, fmt("%.0f points, strictly decreasing per ratio", points)};
}

Outcome logic_exhaustion() {
  const auto start = Clock::now();
  const auto t = build_default_stack();
  const auto specs = measured_device_specs();
  const std::vector<PairRef> pairs{{"B1", "B2"}, {"T1", "T2"}, {"T1", "B2"}, {"B1", "T2"}};
  const auto configs =
      derive_class_configs(t, specs, pairs, LoadSpec::current_source(), DeriveMode::nominal)
          .configs;
  int imp_ok = 0;
  for (const auto& pr : pairs) {
    for (int row = 0; row < 4; ++row) {
      const bool p = row & 1, q = row & 2;
      const auto trace = execute(imp_program(pr.p, pr.q), t, specs, configs, Variation::off(),
                                 {{"p", p}, {"q", q}});
      imp_ok += trace.outputs.at("q") == (!p || q);
    }
  }
  int nand_ok = 0;
  for (int row = 0; row < 4; ++row) {
    const bool a = row & 1, b = row & 2;
    const auto trace = execute(nand_macro("B1", "B2", "T2"), t, specs, configs, Variation::off(),
                               {{"a", a}, {"b", b}});
    nand_ok += trace.outputs.at("out") == !(a && b);
  }

  const RippleAdder adder = RippleAdder::standard(8);
  const auto fa_census = census(adder.full_adder());
  int fa_ok = 0;
  for (int row = 0; row < 8; ++row) {
    const int a = row & 1, b = (row >> 1) & 1, c = row >> 2;
    const auto trace = execute(adder.full_adder(), adder.stack(), adder.specs(), adder.configs(),
                               Variation::off(), {{"a", a}, {"b", b}, {"c_in", c}});
    fa_ok += trace.outputs.at("s") == (((a + b + c) & 1) == 1) &&
             trace.outputs.at("c_out") == (a + b + c >= 2);
  }

  long ripple_ok = 0;
  long ripple_total = 0;
  StepCensus ripple_census;
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; ++b) {
      for (unsigned c = 0; c < 2; ++c) {
        const auto r = adder.add(a, b, c == 1);
        const unsigned want = a + b + c;
        ripple_ok += r.sum == (want & 0xffu) && r.carry == (want > 0xffu);
        ++ripple_total;
        ripple_census = r.census;
      }
    }
  }
  const double secs = seconds_since(start);
  const bool pass = imp_ok == 16 && nand_ok == 4 && fa_ok == 8 && fa_census.resets == 13 &&
                    fa_census.imps == 22 && ripple_ok == ripple_total &&
                    ripple_census.resets == 104 && ripple_census.imps == 176 && secs < 300.0;
  return {pass, "IMP " + std::to_string(imp_ok) + "/16, NAND " + std::to_string(nand_ok) +
                    "/4, full adder " + std::to_string(fa_ok) + "/8, census " +
                    std::to_string(fa_census.resets) + " resets + " +
                    std::to_string(fa_census.imps) + " IMPs, ripple " +
                    std::to_string(ripple_ok) + "/" + std::to_string(ripple_total) +
                    fmt(" exhaustive, %.1f s", secs)};
}

Outcome yield_properties() {
  const auto t = build_default_stack();
  const auto nand = nand_macro("B1", "B2", "T2");
  const std::vector<PairRef> pairs{{"B1", "T2"}, {"B2", "T2"}};
  auto oracle = [](const BitMap& in) { return BitMap{{"out", !(in.at("a") && in.at("b"))}}; };
  YieldOptions opts;
  opts.trials = 10000;
  opts.seed = 2024;

  // (a) no variation anywhere
  SpecTable flat = measured_device_specs();
  for (auto& [id, s] : flat) {
    s = without_set_variation(s);
    s.v_reset_max = s.v_reset_min;
  }
  const auto flat_cfg =
      derive_class_configs(t, flat, pairs, LoadSpec::current_source(), DeriveMode::nominal);
  const double ya = estimate_yield(nand, t, flat, flat_cfg.configs, oracle, opts).yield;

  // (b) measured windows, configs whose worst-case margin is positive
  const SpecTable specs = measured_device_specs();
  const auto worst =
      derive_class_configs(t, specs, pairs, LoadSpec::current_source(), DeriveMode::worst_case);
  bool positive = true;
  for (const auto& [name, m] : worst.margins) positive = positive && m > 0.0;
  const double yb = estimate_yield(nand, t, specs, worst.configs, oracle, opts).yield;

  // (c) set window pushed above the must-set drop
  const auto nominal =
      derive_class_configs(t, specs, pairs, LoadSpec::current_source(), DeriveMode::nominal);
  const auto& cfg = nominal.configs.at("anti-top");
  std::vector<DeviceState> off(t.size(), DeviceState::off());
  SpecTable wide = specs;
  wide.at("T2").v_set_max = solve_node(t, specs, off, cfg, "B1", "T2").drop_q + 0.3;
  const auto& qs = wide.at("T2");
  const auto direct = settle_pair(resolve_pair(t, "B1", "T2"), wide.at("B1"), DeviceState::off(),
                                  nominal_thresholds(wide.at("B1")), qs, DeviceState::off(),
                                  {qs.v_set_max, qs.v_reset_min, qs.v_reset_max}, cfg);
  const bool violated = direct.q == DeviceState::off();
  const double yc = estimate_yield(nand, t, wide, nominal.configs, oracle, opts).yield;

  // (d) byte-exact determinism, including across thread counts
  const auto r1 = estimate_yield(nand, t, specs, nominal.configs, oracle, opts);
  auto threaded = opts;
  threaded.threads = 3;
  const auto r2 = estimate_yield(nand, t, specs, nominal.configs, oracle, threaded);
  const bool same = r1 == r2;

  const bool pass = ya == 1.0 && positive && yb == 1.0 && violated && yc < 1.0 && same;
  return {pass, fmt("(a) %.4f (b) %.4f (c) %.4f", ya, yb, yc) +
                    (violated ? " [direct solve confirms no set]" : " [direct solve disagrees]") +
                    " (d) " + (same ? "identical" : "different")};
}

Outcome nonlinear_solver() {
  RngStream rng(31337, 0);
  double worst_dv = 0.0;
  double worst_i = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const MemristorSpec p = gen::sinh_spec(rng);
    const MemristorSpec q = gen::sinh_spec(rng);
    const auto c = gen::circuit(rng, p, q);
    const auto sol = solve_circuit(c);
    worst_dv = std::max(worst_dv, std::abs(sol.v_c - oracle::bisect_node(c)));
    worst_i = std::max(worst_i, std::abs(oracle::kcl_current(c, sol.v_c)));
  }
  return {worst_dv <= 1e-9 && worst_i <= 1e-12,
          fmt("worst |dV| %.2e V, worst residual %.2e A over 1000 circuits", worst_dv, worst_i)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"margin improvement over the legacy load", margin_improvement},
      {"asymptotic margin and memory comparison", asymptote},
      {"analytic/numeric equivalence", analytic_equivalence},
      {"margin sweep monotonicity", sweep_monotone},
      {"logic exhaustion", logic_exhaustion},
      {"yield properties", yield_properties},
      {"nonlinear solver vs bisection", nonlinear_solver},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
