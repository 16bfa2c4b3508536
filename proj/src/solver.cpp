#include "imp3d/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "imp3d/error.hpp"

namespace imp3d {

namespace {

double device_term(const DrivenDevice& d, double v_c) {
  return d.sign * current(*d.spec, d.state, d.sign * (d.terminal - v_c));
}

double device_slope(const DrivenDevice& d, double v_c) {
  return differential_conductance(*d.spec, d.state, d.sign * (d.terminal - v_c));
}

double load_term(const PairCircuit& c, double v_c) {
  if (const auto* r = std::get_if<ResistiveLoad>(&c.load)) return r->g_l * (r->v_l - v_c);
  return std::get<CurrentSourceLoad>(c.load).i_l;
}

double load_conductance(const PairCircuit& c) {
  if (const auto* r = std::get_if<ResistiveLoad>(&c.load)) return r->g_l;
  return 0.0;
}

double node_slope(const PairCircuit& c, double v_c) {
  return -(device_slope(c.p, v_c) + device_slope(c.q, v_c) + load_conductance(c));
}

NodeSolution finish(const PairCircuit& c, double v_c, int iterations) {
  NodeSolution s;
  s.v_c = v_c;
  s.drop_p = c.p.sign * (c.p.terminal - v_c);
  s.drop_q = c.q.sign * (c.q.terminal - v_c);
  s.residual = node_current(c, v_c);
  s.iterations = iterations;
  return s;
}

}  // namespace

double node_current(const PairCircuit& circuit, double v_c) {
  return device_term(circuit.p, v_c) + device_term(circuit.q, v_c) + load_term(circuit, v_c);
}

double linear_node_voltage(const PairCircuit& c) {
  const double g_p = c.p.state.conductance_scale * state_conductance(*c.p.spec, c.p.state.logic);
  const double g_q = c.q.state.conductance_scale * state_conductance(*c.q.spec, c.q.state.logic);
  double injected = 0.0;
  double g_l = 0.0;
  if (const auto* r = std::get_if<ResistiveLoad>(&c.load)) {
    g_l = r->g_l;
    injected = r->g_l * r->v_l;
  } else {
    injected = std::get<CurrentSourceLoad>(c.load).i_l;
  }
  return (g_p * c.p.terminal + g_q * c.q.terminal + injected) / (g_p + g_q + g_l);
}

NodeSolution solve_circuit(const PairCircuit& c, const SolverOptions& options) {
  const bool linear = c.p.spec->is_linear() && c.q.spec->is_linear();
  if (linear && !options.force_iterative) return finish(c, linear_node_voltage(c), 0);

  // node_current is strictly decreasing in v_c, so a sign change brackets
  // exactly one root.
  double lo = -options.bracket;
  double hi = options.bracket;
  for (int widen = 0; widen < 8 && !(node_current(c, lo) > 0.0 && node_current(c, hi) < 0.0);
       ++widen) {
    lo *= 2.0;
    hi *= 2.0;
  }
  if (!(node_current(c, lo) >= 0.0 && node_current(c, hi) <= 0.0))
    throw NoConvergence("solver: no sign change of the node current within +/-" +
                        std::to_string(hi) + " V");

  // small-signal estimate as the starting point
  double g_sum = load_conductance(c);
  double i_sum = 0.0;
  for (const DrivenDevice* d : {&c.p, &c.q}) {
    const double g = differential_conductance(*d->spec, d->state, 0.0);
    g_sum += g;
    i_sum += g * d->terminal;
  }
  if (const auto* r = std::get_if<ResistiveLoad>(&c.load))
    i_sum += r->g_l * r->v_l;
  else
    i_sum += std::get<CurrentSourceLoad>(c.load).i_l;
  double v = std::clamp(i_sum / g_sum, lo, hi);

  for (int it = 1; it <= options.max_iterations; ++it) {
    const double f = node_current(c, v);
    if (f == 0.0) return finish(c, v, it);
    if (f > 0.0)
      lo = v;
    else
      hi = v;
    const double df = node_slope(c, v);
    double next = v - f / df;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    const double step = next - v;
    v = next;
    const bool tiny_step = std::abs(step) <= 1e-14 * std::max(1.0, std::abs(v));
    const bool tiny_bracket = (hi - lo) <= 4e-16 * std::max(1.0, std::abs(v));
    if ((tiny_step || tiny_bracket) && std::abs(node_current(c, v)) <= options.current_tolerance)
      return finish(c, v, it);
  }
  const double residual = node_current(c, v);
  if (std::abs(residual) <= options.current_tolerance) return finish(c, v, options.max_iterations);
  std::ostringstream msg;
  msg << "solver: residual " << residual << " A after " << options.max_iterations
      << " iterations";
  throw NoConvergence(msg.str());
}

PairCircuit make_pair_circuit(const PairGeometry& g, const MemristorSpec& p_spec,
                              DeviceState p_state, const MemristorSpec& q_spec,
                              DeviceState q_state, const ImpConfig& config) {
  const double frame = g.sign_q;
  PairCircuit c;
  c.p = {&p_spec, p_state, g.sign_p, frame * config.v_p};
  c.q = {&q_spec, q_state, g.sign_q, 0.0};
  if (const auto* r = std::get_if<ResistiveLoad>(&config.load))
    c.load = ResistiveLoad{r->g_l, frame * r->v_l};
  else
    c.load = CurrentSourceLoad{frame * std::get<CurrentSourceLoad>(config.load).i_l};
  return c;
}

NodeSolution solve_node(const StackTopology& topology, const SpecTable& specs,
                        std::span<const DeviceState> states, const ImpConfig& config,
                        std::string_view p, std::string_view q, const SolverOptions& options) {
  const PairGeometry g = resolve_pair(topology, p, q);
  if (states.size() != topology.size())
    throw ConfigError("solve_node: state vector does not match topology");
  const auto circuit =
      make_pair_circuit(g, spec_for(specs, topology.cell(g.p)), states[g.p],
                        spec_for(specs, topology.cell(g.q)), states[g.q], config);
  return solve_circuit(circuit, options);
}

namespace {

struct SwitchMemory {
  bool set = false;
  bool reset = false;
};

/// Applies the switching rules to one device; returns true on a state change.
bool apply_rules(const MemristorSpec& spec, DeviceState& state, const ThresholdSample& th,
                 double drop, SwitchMemory& mem, std::string_view id, int iteration,
                 std::vector<SwitchEvent>& events) {
  if (state.logic == Logic::off) {
    if (!mem.set && drop >= th.v_set) {
      state = DeviceState::on();
      mem.set = true;
      events.push_back({std::string(id), SwitchKind::set, drop, iteration});
      return true;
    }
    return false;
  }
  if (!mem.reset && drop <= th.v_reset_onset) {
    mem.reset = true;
    if (drop <= th.v_reset_full) {
      state = DeviceState::off();
      events.push_back({std::string(id), SwitchKind::full_reset, drop, iteration});
    } else {
      state.conductance_scale *= spec.partial_reset_factor;
      events.push_back({std::string(id), SwitchKind::partial_reset, drop, iteration});
    }
    return true;
  }
  return false;
}

}  // namespace

SettleResult settle_pair(const PairGeometry& g, const MemristorSpec& p_spec, DeviceState p_state,
                         const ThresholdSample& p_th, const MemristorSpec& q_spec,
                         DeviceState q_state, const ThresholdSample& q_th,
                         const ImpConfig& config, std::string_view p_id, std::string_view q_id,
                         const SolverOptions& options) {
  SettleResult r;
  r.p = p_state;
  r.q = q_state;
  SwitchMemory p_mem;
  SwitchMemory q_mem;
  for (int it = 1; it <= kMaxSettleIterations; ++it) {
    r.iterations = it;
    r.final_solution =
        solve_circuit(make_pair_circuit(g, p_spec, r.p, q_spec, r.q, config), options);
    bool changed =
        apply_rules(q_spec, r.q, q_th, r.final_solution.drop_q, q_mem, q_id, it, r.events);
    changed |= apply_rules(p_spec, r.p, p_th, r.final_solution.drop_p, p_mem, p_id, it, r.events);
    if (!changed) return r;
  }
  // final state reached after the last permitted switch; report its solution
  r.final_solution =
      solve_circuit(make_pair_circuit(g, p_spec, r.p, q_spec, r.q, config), options);
  return r;
}

SettleResult settle_states(const StackTopology& topology, const SpecTable& specs,
                           std::span<DeviceState> states, const ImpConfig& config,
                           std::string_view p, std::string_view q,
                           const ThresholdSample& p_thresholds,
                           const ThresholdSample& q_thresholds, const SolverOptions& options) {
  const PairGeometry g = resolve_pair(topology, p, q);
  if (states.size() != topology.size())
    throw ConfigError("settle_states: state vector does not match topology");
  auto r = settle_pair(g, spec_for(specs, topology.cell(g.p)), states[g.p], p_thresholds,
                       spec_for(specs, topology.cell(g.q)), states[g.q], q_thresholds, config, p,
                       q, options);
  states[g.p] = r.p;
  states[g.q] = r.q;
  return r;
}

std::string_view to_string(SwitchKind kind) noexcept {
  switch (kind) {
    case SwitchKind::set:
      return "set";
    case SwitchKind::partial_reset:
      return "partial_reset";
    case SwitchKind::full_reset:
      return "full_reset";
  }
  return "?";
}

}  // namespace imp3d
