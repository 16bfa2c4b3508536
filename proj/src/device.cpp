#include "imp3d/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "imp3d/error.hpp"

namespace imp3d {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void MemristorSpec::validate() const {
  require(std::isfinite(v_set_min) && std::isfinite(v_set_max) && std::isfinite(v_reset_min) &&
              std::isfinite(v_reset_max) && std::isfinite(g_on) && std::isfinite(g_off),
          "memristor spec: non-finite parameter");
  require(v_set_min > 0.0, "memristor spec: v_set_min must be > 0");
  require(v_set_max >= v_set_min, "memristor spec: v_set_max must be >= v_set_min");
  require(v_reset_min < 0.0, "memristor spec: v_reset_min must be < 0");
  require(v_reset_max <= v_reset_min, "memristor spec: v_reset_max must be <= v_reset_min");
  // g_on == g_off is accepted so that degenerate devices reach the optimizer
  // and are rejected there as infeasible.
  require(g_off > 0.0, "memristor spec: g_off must be > 0");
  require(g_on >= g_off, "memristor spec: g_on must be >= g_off");
  require(partial_reset_factor > 0.0 && partial_reset_factor <= 1.0,
          "memristor spec: partial_reset_factor must be in (0, 1]");

  if (const auto* s = std::get_if<SinhIV>(&iv_model)) {
    require(s->a_on > 0.0 && s->b_on > 0.0 && s->a_off > 0.0 && s->b_off > 0.0,
            "memristor spec: sinh parameters must be positive");
    // small-signal slope a*b must match the declared read conductance within 1%
    const double slope_on = s->a_on * s->b_on;
    const double slope_off = s->a_off * s->b_off;
    if (std::abs(slope_on - g_on) > 0.01 * g_on || std::abs(slope_off - g_off) > 0.01 * g_off) {
      std::ostringstream msg;
      msg << "memristor spec: sinh slope at 0 (" << slope_on << ", " << slope_off
          << ") differs from g_on/g_off by more than 1%";
      throw ConfigError(msg.str());
    }
    // ON must conduct more than OFF over the whole sub-set range; the ratio is
    // monotone in v so the endpoint decides
    const double v = v_set_min;
    if (g_on > g_off &&
        s->a_on * std::sinh(s->b_on * v) <= s->a_off * std::sinh(s->b_off * v)) {
      throw ConfigError("memristor spec: sinh OFF current exceeds ON current below v_set_min");
    }
  }
}

double state_conductance(const MemristorSpec& spec, Logic logic) noexcept {
  return logic == Logic::on ? spec.g_on : spec.g_off;
}

double current(const MemristorSpec& spec, const DeviceState& state, double v) {
  const bool on = state.logic == Logic::on;
  return std::visit(Overloaded{[&](const LinearIV&) {
                                 return state.conductance_scale *
                                        state_conductance(spec, state.logic) * v;
                               },
                               [&](const SinhIV& s) {
                                 const double a = on ? s.a_on : s.a_off;
                                 const double b = on ? s.b_on : s.b_off;
                                 return state.conductance_scale * a * std::sinh(b * v);
                               }},
                    spec.iv_model);
}

double differential_conductance(const MemristorSpec& spec, const DeviceState& state, double v) {
  const bool on = state.logic == Logic::on;
  return std::visit(Overloaded{[&](const LinearIV&) {
                                 return state.conductance_scale *
                                        state_conductance(spec, state.logic);
                               },
                               [&](const SinhIV& s) {
                                 const double a = on ? s.a_on : s.a_off;
                                 const double b = on ? s.b_on : s.b_off;
                                 return state.conductance_scale * a * b * std::cosh(b * v);
                               }},
                    spec.iv_model);
}

double read_conductance(const MemristorSpec& spec, const DeviceState& state) {
  return current(spec, state, kReadVoltage) / kReadVoltage;
}

bool decode_bit(const MemristorSpec& spec, const DeviceState& state) {
  return read_conductance(spec, state) > std::sqrt(spec.g_on * spec.g_off);
}

SinhIV fit_sinh(double g_on, double g_off, double b_on, double b_off, double v_read) {
  if (!(b_on > 0.0 && b_off > 0.0 && v_read > 0.0))
    throw ConfigError("fit_sinh: nonlinearity and read voltage must be positive");
  SinhIV s;
  s.b_on = b_on;
  s.b_off = b_off;
  s.a_on = g_on * v_read / std::sinh(b_on * v_read);
  s.a_off = g_off * v_read / std::sinh(b_off * v_read);
  return s;
}

ThresholdSample sample_thresholds(const MemristorSpec& spec, RngStream& rng) {
  const double u_set = rng.uniform();
  const double u_r1 = rng.uniform();
  const double u_r2 = rng.uniform();
  const auto lerp = [](double lo, double hi, double u) { return lo + (hi - lo) * u; };
  ThresholdSample t;
  t.v_set = lerp(spec.v_set_min, spec.v_set_max, u_set);
  const double r1 = lerp(spec.v_reset_max, spec.v_reset_min, u_r1);
  const double r2 = lerp(spec.v_reset_max, spec.v_reset_min, u_r2);
  t.v_reset_onset = std::max(r1, r2);
  t.v_reset_full = std::min(r1, r2);
  return t;
}

ThresholdSample nominal_thresholds(const MemristorSpec& spec) noexcept {
  return {spec.v_star(), spec.v_reset_min, spec.v_reset_max};
}

MemristorSpec without_set_variation(MemristorSpec spec) noexcept {
  const double mid = spec.v_star();
  spec.v_set_min = mid;
  spec.v_set_max = mid;
  return spec;
}

}  // namespace imp3d
