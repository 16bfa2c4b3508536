#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "imp3d/solver.hpp"
#include "imp3d/topology.hpp"

namespace imp3d {

struct WriteStep {
  std::string cell;
  bool value = false;
};

/// Unconditional full reset to OFF.
struct ResetStep {
  std::string cell;
};

/// q <- p IMP q. `config` names an entry of the config table; "auto" selects
/// the entry "P>Q" if present, else the one named by pair_class(p, q).
struct ImpStep {
  std::string p;
  std::string q;
  std::string config = "auto";
};

struct ReadStep {
  std::string cell;
};

using Step = std::variant<WriteStep, ResetStep, ImpStep, ReadStep>;

struct StepProgram {
  std::vector<Step> steps;
  std::map<std::string, std::string> inputs;   ///< variable -> cell
  std::map<std::string, std::string> outputs;  ///< variable -> cell

  void append(const StepProgram& other);
};

struct StepCensus {
  std::size_t writes = 0;
  std::size_t resets = 0;
  std::size_t imps = 0;
  std::size_t reads = 0;
};
StepCensus census(const StepProgram& program);

using ConfigTable = std::map<std::string, ImpConfig>;

/// NAND: RESET out; IMP(a, out); IMP(b, out). Inputs "a", "b"; output "out".
StepProgram nand_macro(const std::string& a, const std::string& b, const std::string& out,
                       const std::string& config = "auto");

/// NOT: RESET out; IMP(a, out). Input "a"; output "out".
StepProgram not_macro(const std::string& a, const std::string& out,
                      const std::string& config = "auto");

/// Single IMP on preset cells. Inputs "p", "q"; output "q".
StepProgram imp_program(const std::string& p, const std::string& q,
                        const std::string& config = "auto");

struct Variation {
  bool enabled = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  static Variation off() { return {}; }
  static Variation seeded(std::uint64_t seed, std::uint64_t stream = 0) {
    return {true, seed, stream};
  }
};

struct CellState {
  std::string cell;
  DeviceState state;
};

struct StepRecord {
  std::size_t index = 0;
  Step step;
  std::vector<CellState> before;
  std::vector<CellState> after;
  std::optional<NodeSolution> node;
  std::vector<SwitchEvent> events;
  std::optional<bool> read_bit;
};

struct ExecutionTrace {
  std::vector<StepRecord> steps;
  std::map<std::string, bool> final_bits;  ///< decoded state of every cell
  std::map<std::string, bool> outputs;     ///< declared outputs
  std::vector<DeviceState> final_states;   ///< indexed like topology.cells()
};

/// A program resolved against a topology, spec table and config table
/// (all copied in):
/// cell ids become indices, config refs become configs, and every adjacency,
/// usability and define-before-use rule is checked once. Throws ProgramError.
class CompiledProgram {
 public:
  CompiledProgram(const StepProgram& program, const StackTopology& topology,
                  const SpecTable& specs, const ConfigTable& configs);

  struct Op {
    enum class Kind : std::uint8_t { write, reset, imp, read } kind;
    std::size_t target = 0;  ///< written/reset/read cell, or Q for imp
    std::size_t source = 0;  ///< P for imp
    bool value = false;
    std::size_t config = 0;  ///< index into configs()
    std::size_t pair = 0;    ///< index into pairs() for imp
  };

  const StepProgram& program() const noexcept { return program_; }
  const StackTopology& topology() const noexcept { return topology_; }
  const std::vector<Op>& ops() const noexcept { return ops_; }
  const std::vector<ImpConfig>& configs() const noexcept { return configs_; }
  const std::vector<PairGeometry>& pairs() const noexcept { return pairs_; }
  const std::vector<MemristorSpec>& cell_specs() const noexcept { return cell_specs_; }
  const std::vector<std::pair<std::string, std::size_t>>& inputs() const noexcept {
    return inputs_;
  }
  const std::vector<std::pair<std::string, std::size_t>>& outputs() const noexcept {
    return outputs_;
  }

 private:
  StepProgram program_;
  StackTopology topology_;
  std::vector<Op> ops_;
  std::vector<ImpConfig> configs_;
  std::vector<PairGeometry> pairs_;
  std::vector<MemristorSpec> cell_specs_;
  std::vector<std::pair<std::string, std::size_t>> inputs_;
  std::vector<std::pair<std::string, std::size_t>> outputs_;
};

struct RunOptions {
  bool record_trace = true;
  SolverOptions solver;
};

/// Per-IMP-step summary used by yield estimation.
struct ImpOutcome {
  std::size_t step = 0;
  double min_scale = 1.0;  ///< smallest conductance_scale of P and Q after the step
};

/// Runs a compiled program. `states` holds the starting state of every cell
/// and is updated in place; declared inputs in `inputs` are written ideally
/// before the first step. Unusable cells are forced OFF.
ExecutionTrace run(const CompiledProgram& compiled, std::vector<DeviceState>& states,
                   const std::map<std::string, bool>& inputs, const Variation& variation,
                   const RunOptions& options = {}, std::vector<ImpOutcome>* imp_outcomes = nullptr);

/// Convenience: compile and run from all-OFF states.
ExecutionTrace execute(const StepProgram& program, const StackTopology& topology,
                       const SpecTable& specs, const ConfigTable& configs,
                       const Variation& variation, const std::map<std::string, bool>& inputs = {},
                       const RunOptions& options = {});

/// Every (p, q) pair used by IMP steps, in first-use order.
std::vector<std::pair<std::string, std::string>> imp_pairs(const StepProgram& program);

std::string_view op_name(const Step& step) noexcept;

}  // namespace imp3d
