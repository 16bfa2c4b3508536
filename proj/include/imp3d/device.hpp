#pragma once

#include <cstdint>
#include <variant>

#include "imp3d/rng.hpp"

namespace imp3d {

/// Voltage at which ON/OFF read conductances are defined.
inline constexpr double kReadVoltage = 0.1;

enum class Logic : std::uint8_t { off = 0, on = 1 };

/// I = G * V with G the (scaled) state conductance.
struct LinearIV {};

/// I = a * sinh(b * V) per state.
struct SinhIV {
  double a_on = 0.0;
  double b_on = 0.0;
  double a_off = 0.0;
  double b_off = 0.0;
};

using IVModel = std::variant<LinearIV, SinhIV>;

/// Static parameters of one bipolar memristor. Voltages are set-polarity drops
/// across the device; reset thresholds are negative with
/// v_reset_max <= v_reset_min < 0 (v_reset_max is the full-reset voltage).
struct MemristorSpec {
  double v_set_min = 1.0;
  double v_set_max = 1.0;
  double v_reset_min = -1.5;
  double v_reset_max = -2.2;
  double g_on = 100e-6;
  double g_off = 10e-6;
  IVModel iv_model = LinearIV{};
  /// Conductance multiplier applied to an ON device on a partial reset.
  double partial_reset_factor = 0.7;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  double v_star() const noexcept { return 0.5 * (v_set_max + v_set_min); }
  double set_half_width() const noexcept { return 0.5 * (v_set_max - v_set_min); }
  bool is_linear() const noexcept { return std::holds_alternative<LinearIV>(iv_model); }
};

struct DeviceState {
  Logic logic = Logic::off;
  /// Multiplies the nominal state conductance; 1 after any full switching event.
  double conductance_scale = 1.0;

  static constexpr DeviceState on() noexcept { return {Logic::on, 1.0}; }
  static constexpr DeviceState off() noexcept { return {Logic::off, 1.0}; }
  bool operator==(const DeviceState&) const = default;
};

/// One cycle's realized switching thresholds.
struct ThresholdSample {
  double v_set = 0.0;
  double v_reset_onset = 0.0;
  double v_reset_full = 0.0;
};

/// Device current (set-polarity direction) for a set-polarity drop `v`.
double current(const MemristorSpec& spec, const DeviceState& state, double v);

/// dI/dV at drop `v`.
double differential_conductance(const MemristorSpec& spec, const DeviceState& state, double v);

/// Nominal read conductance for a logic state (ignores conductance_scale).
double state_conductance(const MemristorSpec& spec, Logic logic) noexcept;

/// Chord conductance I(kReadVoltage)/kReadVoltage for the given state.
double read_conductance(const MemristorSpec& spec, const DeviceState& state);

/// READ decoding: 1 iff the read conductance exceeds sqrt(g_on * g_off).
bool decode_bit(const MemristorSpec& spec, const DeviceState& state);

/// Builds a sinh model whose chord conductance at `v_read` equals g_on/g_off.
SinhIV fit_sinh(double g_on, double g_off, double b_on, double b_off,
                double v_read = kReadVoltage);

/// Uniform draws over [v_set_min, v_set_max] and [v_reset_max, v_reset_min].
/// Consumes exactly three draws from `rng`.
ThresholdSample sample_thresholds(const MemristorSpec& spec, RngStream& rng);

/// Thresholds used when variation is disabled: v_set at the range midpoint,
/// reset onset and full reset at the spec limits.
ThresholdSample nominal_thresholds(const MemristorSpec& spec) noexcept;

/// Copy of `spec` with the set range collapsed onto its midpoint.
MemristorSpec without_set_variation(MemristorSpec spec) noexcept;

}  // namespace imp3d
