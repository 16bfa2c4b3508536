#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imp3d/device.hpp"
#include "imp3d/topology.hpp"

namespace imp3d {

struct SolverOptions {
  double current_tolerance = 1e-12;  ///< amperes
  int max_iterations = 100;
  double bracket = 10.0;  ///< initial root bracket [-bracket, +bracket] volts
  bool force_iterative = false;  ///< skip the closed form for linear devices
};

/// One driven device as seen from the common node.
struct DrivenDevice {
  const MemristorSpec* spec = nullptr;
  DeviceState state;
  int sign = 1;             ///< orientation sign relative to the common node
  double terminal = 0.0;    ///< potential of the device's other terminal
};

/// P, Q and the load meeting at one node, in physical potentials.
struct PairCircuit {
  DrivenDevice p;
  DrivenDevice q;
  std::variant<ResistiveLoad, CurrentSourceLoad> load;
};

struct NodeSolution {
  double v_c = 0.0;     ///< common-node potential
  double drop_p = 0.0;  ///< set-polarity drop across P
  double drop_q = 0.0;  ///< set-polarity drop across Q
  double residual = 0.0;
  int iterations = 0;
};

/// Net current flowing into the node at potential `v_c`.
double node_current(const PairCircuit& circuit, double v_c);

/// Closed-form node potential for linear devices.
double linear_node_voltage(const PairCircuit& circuit);

/// Kirchhoff balance at the common node. Linear circuits use the closed form
/// unless `force_iterative`; otherwise safeguarded Newton with bisection.
NodeSolution solve_circuit(const PairCircuit& circuit, const SolverOptions& options = {});

/// Maps a Q-frame config onto the pair's electrodes: Q's outer terminal is
/// grounded, P's outer terminal is at sign_q * v_p.
PairCircuit make_pair_circuit(const PairGeometry& geometry, const MemristorSpec& p_spec,
                              DeviceState p_state, const MemristorSpec& q_spec,
                              DeviceState q_state, const ImpConfig& config);

/// Solve one IMP step on a topology. `states` is indexed like topology.cells().
NodeSolution solve_node(const StackTopology& topology, const SpecTable& specs,
                        std::span<const DeviceState> states, const ImpConfig& config,
                        std::string_view p, std::string_view q,
                        const SolverOptions& options = {});

enum class SwitchKind { set, partial_reset, full_reset };

struct SwitchEvent {
  std::string cell;
  SwitchKind kind = SwitchKind::set;
  double drop = 0.0;
  int iteration = 0;
};

struct SettleResult {
  DeviceState p;
  DeviceState q;
  NodeSolution final_solution;
  std::vector<SwitchEvent> events;
  int iterations = 0;
};

/// Upper bound on solve/switch rounds per pulse.
inline constexpr int kMaxSettleIterations = 4;

/// Quasi-static response to one IMP pulse: solve, apply switching rules,
/// repeat until no state changes. Each device switches at most once per kind.
SettleResult settle_pair(const PairGeometry& geometry, const MemristorSpec& p_spec,
                         DeviceState p_state, const ThresholdSample& p_thresholds,
                         const MemristorSpec& q_spec, DeviceState q_state,
                         const ThresholdSample& q_thresholds, const ImpConfig& config,
                         std::string_view p_id = "P", std::string_view q_id = "Q",
                         const SolverOptions& options = {});

/// Topology-level wrapper; updates `states` in place and returns the result.
SettleResult settle_states(const StackTopology& topology, const SpecTable& specs,
                           std::span<DeviceState> states, const ImpConfig& config,
                           std::string_view p, std::string_view q,
                           const ThresholdSample& p_thresholds,
                           const ThresholdSample& q_thresholds,
                           const SolverOptions& options = {});

std::string_view to_string(SwitchKind kind) noexcept;

}  // namespace imp3d
