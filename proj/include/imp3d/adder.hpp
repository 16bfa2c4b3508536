#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imp3d/program.hpp"
#include "imp3d/topology.hpp"

namespace imp3d {

/// Two-input NAND gate of a netlist: out = NAND(lhs, rhs).
struct NandGate {
  std::string out;
  std::string lhs;
  std::string rhs;
};

/// Gate-level full adder over primary inputs "a", "b", "c_in" producing
/// "s" and "c_out".
struct NandNetlist {
  std::vector<NandGate> gates;

  /// The nine-gate decomposition: four gates for a XOR b, four for the
  /// sum, and one carry gate that reuses NAND(a, b) and NAND(a^b, c_in).
  static NandNetlist full_adder();
};

struct AdderPlacement {
  std::string a;
  std::string b;
  std::string c_in;
};

/// Placement the default adder stack ships with.
AdderPlacement default_adder_placement();

struct FullAdderOptions {
  int not_budget = 4;        ///< NOT (copy/move) gates available
  bool carry_to_input = true;  ///< leave c_out in the c_in cell for ripple chaining
};

/// Schedules the netlist on the usable cells of `stack`: every NAND and NOT
/// writes a free cell adjacent to its operands, no live value is overwritten,
/// and exactly options.not_budget NOTs are spent. Depth-first search with
/// memoization; deterministic. Throws PlacementInfeasible when no schedule
/// exists. The program declares inputs a/b/c_in and outputs s/c_out.
StepProgram compile_full_adder(const StackTopology& stack, const AdderPlacement& placement,
                               const FullAdderOptions& options = {},
                               const NandNetlist& netlist = NandNetlist::full_adder());

/// Structural and functional check of a full-adder program: only RESET/IMP
/// steps on usable adjacent cells, NAND/NOT macro shape, and correct s/c_out
/// on all eight rows under an ideal Boolean interpretation. Throws
/// ProgramError describing the first violation.
void check_full_adder(const StackTopology& stack, const StepProgram& program);

struct RippleResult {
  std::uint32_t sum = 0;
  bool carry = false;
  StepCensus census;
};

/// Time-multiplexed ripple-carry adder on one full-adder stack: each round
/// writes a_i and b_i, runs the full-adder program and reads s; the carry stays
/// in place between rounds.
class RippleAdder {
 public:
  RippleAdder(StackTopology stack, SpecTable specs, ConfigTable configs, StepProgram full_adder,
              int bits = 8);

  /// Default stack, per-level device specs and nominal class configs.
  static RippleAdder standard(int bits = 8);

  RippleResult add(std::uint32_t a, std::uint32_t b, bool c0,
                   const Variation& variation = Variation::off()) const;

  /// The whole multi-round program for given operands (for tracing/export).
  StepProgram program_for(std::uint32_t a, std::uint32_t b, bool c0) const;

  int bits() const noexcept { return bits_; }
  const StackTopology& stack() const noexcept { return stack_; }
  const SpecTable& specs() const noexcept { return specs_; }
  const ConfigTable& configs() const noexcept { return configs_; }
  const StepProgram& full_adder() const noexcept { return full_adder_; }

 private:
  StackTopology stack_;
  SpecTable specs_;
  ConfigTable configs_;
  StepProgram full_adder_;
  int bits_;
  std::optional<CompiledProgram> round_;
};

RippleResult ripple_adder_8bit(std::uint8_t a, std::uint8_t b, bool c0);

}  // namespace imp3d
