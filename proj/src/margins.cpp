#include "imp3d/margins.hpp"

#include <cmath>

#include "imp3d/error.hpp"
#include "imp3d/kernels.hpp"

namespace imp3d {

double v_star(const MemristorSpec& spec) noexcept { return spec.v_star(); }

double delta_ideal_parallel(double g_l, double g_on, double g_off, double v_star) noexcept {
  return v_star * (g_on - g_off) / (2.0 * g_l + 3.0 * g_on + g_off);
}

BiasPoint optimal_bias(double g_l, double g_on, double g_off, double v_star) noexcept {
  BiasPoint b;
  b.v_p = -2.0 * delta_ideal_parallel(g_l, g_on, g_off, v_star);
  const double num = g_l * g_l + 2.0 * g_l * (g_on + g_off) + g_off * (3.0 * g_on + g_off);
  const double den = g_l * (2.0 * g_l + 3.0 * g_on + g_off);
  b.v_l = -2.0 * v_star * num / den;
  return b;
}

double optimal_i_l(double g_off, double v_star) noexcept { return -2.0 * v_star * g_off; }

double delta_actual(double delta_ideal, const MemristorSpec& spec) noexcept {
  return delta_ideal - 0.5 * (spec.v_set_max - spec.v_set_min);
}

double delta_general(const MemristorSpec& p_spec, const MemristorSpec& q_spec, Polarity polarity,
                     double g_on, double g_off) noexcept {
  const double q_window = (g_on + g_off) * (q_spec.v_set_min - q_spec.v_set_max);
  const double p_term = polarity == Polarity::parallel ? (g_on - g_off) * p_spec.v_set_min
                                                       : -(g_on - g_off) * p_spec.v_reset_min;
  return (q_window + p_term) / (3.0 * g_on + g_off);
}

double delta_memory(double v_star) noexcept { return 0.5 * v_star; }

double legacy_load(double g_on, double g_off) noexcept { return std::sqrt(g_on * g_off); }

ParallelDrops parallel_binding_drops(double v_p, double injected, double g_l, double g_on,
                                     double g_off) noexcept {
  ParallelDrops d;
  d.q_both_off = (-v_p * g_off - injected) / (2.0 * g_off + g_l);
  d.q_p_on = (-v_p * g_on - injected) / (g_off + g_on + g_l);
  d.p_both_off = (v_p * (g_off + g_l) - injected) / (2.0 * g_off + g_l);
  return d;
}

MarginReport analyze_parallel(const MemristorSpec& spec, double g_l) {
  if (!(g_l >= 0.0)) throw ConfigError("analyze_parallel: g_l must be >= 0");
  MarginReport r;
  r.v_star = spec.v_star();
  r.g_l = g_l;
  r.configuration = Polarity::parallel;
  r.delta_ideal = delta_ideal_parallel(g_l, spec.g_on, spec.g_off, r.v_star);
  r.delta_actual = delta_actual(r.delta_ideal, spec);
  r.optimal_v_p = -2.0 * r.delta_ideal;
  if (g_l > 0.0)
    r.optimal_v_l = optimal_bias(g_l, spec.g_on, spec.g_off, r.v_star).v_l;
  else
    r.optimal_i_l = optimal_i_l(spec.g_off, r.v_star);
  return r;
}

std::vector<SweepRow> margin_sweep(double gl_min, double gl_max, int steps,
                                   std::span<const double> ratios) {
  if (steps < 1) throw ConfigError("margin sweep: steps must be >= 1");
  if (!(gl_min >= 0.0) || !(gl_max >= gl_min))
    throw ConfigError("margin sweep: need 0 <= gl_min <= gl_max");
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] =
        steps == 1 ? gl_min : gl_min + (gl_max - gl_min) * i / (steps - 1);
  }
  std::vector<double> values(grid.size());
  std::vector<SweepRow> rows;
  rows.reserve(ratios.size() * (grid.size() + 1));
  for (double ratio : ratios) {
    if (!(ratio >= 1.0) || !std::isfinite(ratio))
      throw ConfigError("margin sweep: ON/OFF ratios must be finite and >= 1");
    kernels::delta_sweep(ratio, grid, values);
    for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back({grid[i], ratio, values[i], 0});
    const double legacy = legacy_load(1.0, 1.0 / ratio);
    rows.push_back({legacy, ratio, delta_ideal_parallel(legacy, 1.0, 1.0 / ratio, 1.0), 1});
  }
  return rows;
}

}  // namespace imp3d
