#pragma once

#include <span>
#include <vector>

#include "imp3d/device.hpp"
#include "imp3d/topology.hpp"

namespace imp3d {

// Closed-form set margins for IMP steps on linear devices.

struct BiasPoint {
  double v_p = 0.0;
  double v_l = 0.0;
};

struct MarginReport {
  double delta_ideal = 0.0;
  double delta_actual = 0.0;
  double v_star = 0.0;
  double optimal_v_p = 0.0;
  double optimal_v_l = 0.0;  ///< resistive load only
  double optimal_i_l = 0.0;  ///< current source only
  Polarity configuration = Polarity::parallel;
  double g_l = 0.0;

  double delta_ideal_normalized() const noexcept { return delta_ideal / v_star; }
  double delta_actual_normalized() const noexcept { return delta_actual / v_star; }
};

/// Midpoint of the set-threshold range.
double v_star(const MemristorSpec& spec) noexcept;

/// Zero-variation margin of the parallel circuit for load conductance g_l.
double delta_ideal_parallel(double g_l, double g_on, double g_off, double v_star) noexcept;

/// Optimal (v_p, v_l) for g_l > 0.
BiasPoint optimal_bias(double g_l, double g_on, double g_off, double v_star) noexcept;

/// Optimal injected current for the current-source circuit (g_l = 0).
double optimal_i_l(double g_off, double v_star) noexcept;

/// Margin after subtracting the set-threshold half-width. May be negative.
double delta_actual(double delta_ideal, const MemristorSpec& spec) noexcept;

/// Actual margin at g_l = 0 for possibly different P and Q specs.
double delta_general(const MemristorSpec& p_spec, const MemristorSpec& q_spec, Polarity polarity,
                     double g_on, double g_off) noexcept;

/// Passive crossbar memory margin under V/3 biasing.
double delta_memory(double v_star) noexcept;

/// Load conductance sqrt(g_on * g_off) recommended for the resistive circuit.
double legacy_load(double g_on, double g_off) noexcept;

/// Drops across (Q with both OFF, Q with P ON, P with both OFF) for a
/// parallel pair. `injected` is g_l * v_l for a resistive load or i_l for a
/// current source (g_l = 0). At an optimal bias the first equals
/// v* + delta_ideal and the other two v* - delta_ideal.
struct ParallelDrops {
  double q_both_off = 0.0;
  double q_p_on = 0.0;
  double p_both_off = 0.0;
};
ParallelDrops parallel_binding_drops(double v_p, double injected, double g_l, double g_on,
                                     double g_off) noexcept;

/// Full report for a parallel pair sharing `spec`. g_l == 0 selects the
/// current-source circuit.
MarginReport analyze_parallel(const MemristorSpec& spec, double g_l);

struct SweepRow {
  double g_l_over_g_on = 0.0;
  double ratio = 0.0;
  double delta_over_v_star = 0.0;
  int marker = 0;  ///< 0 analytic curve, 1 legacy load point, 2 numeric (nonlinear)
};

/// Normalized delta_ideal vs. g_l/g_on on `steps` evenly spaced points in
/// [gl_min, gl_max] for every ratio, plus one marker=1 row at the legacy load.
std::vector<SweepRow> margin_sweep(double gl_min, double gl_max, int steps,
                                   std::span<const double> ratios);

}  // namespace imp3d
