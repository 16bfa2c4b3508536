#include "imp3d/adder.hpp"

#include <algorithm>
#include <unordered_set>

#include "imp3d/error.hpp"
#include "imp3d/optimizer.hpp"

namespace imp3d {

NandNetlist NandNetlist::full_adder() {
  return {{{"n1", "a", "b"},
           {"n2", "a", "n1"},
           {"n3", "b", "n1"},
           {"n4", "n2", "n3"},
           {"n5", "n4", "c_in"},
           {"n6", "n4", "n5"},
           {"n7", "c_in", "n5"},
           {"s", "n6", "n7"},
           {"c_out", "n1", "n5"}}};
}

AdderPlacement default_adder_placement() { return {"B2", "B4", "T1"}; }

namespace {

// Cell contents during scheduling: 0 = free, otherwise 1 + 2 * value + complemented.
using Slot = std::uint8_t;

constexpr Slot slot_of(int value, bool complemented) {
  return static_cast<Slot>(1 + 2 * value + (complemented ? 1 : 0));
}

struct Move {
  bool is_not = false;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  std::size_t dst = 0;
};

class Scheduler {
 public:
  Scheduler(const StackTopology& stack, const AdderPlacement& placement,
            const FullAdderOptions& options, const NandNetlist& netlist)
      : options_(options) {
    cells_ = stack.usable_ids();
    if (cells_.size() > 9) throw PlacementInfeasible("full adder: too many usable cells");
    if (options.not_budget < 0 || options.not_budget > 7)
      throw ConfigError("full adder: NOT budget must be in [0, 7]");
    if (netlist.gates.size() > 15) throw PlacementInfeasible("full adder: netlist too large");
    const std::size_t n = cells_.size();
    adjacent_.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        adjacent_[i][j] = i != j && stack.common_electrode(cells_[i], cells_[j]).has_value();

    names_ = {"a", "b", "c_in"};
    for (const auto& g : netlist.gates) names_.push_back(g.out);
    if (names_.size() > 31) throw PlacementInfeasible("full adder: too many values");
    for (const auto& g : netlist.gates) {
      gates_.push_back({value_id(g.lhs), value_id(g.rhs), value_id(g.out)});
    }
    s_ = value_id("s");
    c_out_ = value_id("c_out");

    state_.assign(n, 0);
    for (const auto& [value, cell] :
         {std::pair{"a", placement.a}, std::pair{"b", placement.b},
          std::pair{"c_in", placement.c_in}}) {
      const std::size_t idx = cell_index(cell);
      if (state_[idx] != 0) throw PlacementInfeasible("full adder: placement reuses " + cell);
      state_[idx] = slot_of(value_id(value), false);
    }
    c_in_cell_ = cell_index(placement.c_in);
  }

  std::optional<std::vector<Move>> solve() {
    if (rec(0, 0)) return moves_;
    return std::nullopt;
  }

  const std::vector<std::string>& cells() const { return cells_; }
  std::size_t s_cell() const {
    for (std::size_t i = 0; i < state_.size(); ++i)
      if (state_[i] == slot_of(s_, false)) return i;
    return 0;
  }
  std::size_t c_out_cell() const {
    for (std::size_t i = 0; i < state_.size(); ++i)
      if (state_[i] == slot_of(c_out_, false)) return i;
    return 0;
  }

 private:
  struct Gate {
    int lhs, rhs, out;
  };

  int value_id(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw PlacementInfeasible("full adder: undefined value " + name);
    return static_cast<int>(it - names_.begin());
  }

  std::size_t cell_index(const std::string& cell) const {
    auto it = std::find(cells_.begin(), cells_.end(), cell);
    if (it == cells_.end())
      throw PlacementInfeasible("full adder: placement cell " + cell + " is not usable");
    return static_cast<std::size_t>(it - cells_.begin());
  }

  std::uint64_t key(std::size_t gate, int nots) const {
    std::uint64_t k = gate;
    k = k * 8 + static_cast<std::uint64_t>(nots);
    for (Slot s : state_) k = k * 64 + s;
    return k;
  }

  bool live(int value, std::size_t gate) const {
    if (value == s_ || value == c_out_) return true;
    for (std::size_t g = gate; g < gates_.size(); ++g)
      if (gates_[g].lhs == value || gates_[g].rhs == value) return true;
    return false;
  }

  bool is_free(std::size_t cell, std::size_t gate) const {
    const Slot slot = state_[cell];
    if (slot == 0) return true;
    if ((slot - 1) % 2 == 1) return true;
    const int value = (slot - 1) / 2;
    if (!live(value, gate)) return true;
    for (std::size_t i = 0; i < state_.size(); ++i)
      if (i != cell && state_[i] == slot) return true;
    return false;
  }

  bool done() const {
    if (options_.carry_to_input && state_[c_in_cell_] != slot_of(c_out_, false)) return false;
    bool have_s = false;
    bool have_c = false;
    for (Slot s : state_) {
      have_s = have_s || s == slot_of(s_, false);
      have_c = have_c || s == slot_of(c_out_, false);
    }
    return have_s && have_c;
  }

  bool try_move(const Move& m, Slot slot, std::size_t gate, int nots) {
    const Slot saved = state_[m.dst];
    state_[m.dst] = slot;
    moves_.push_back(m);
    if (rec(gate, nots)) return true;
    moves_.pop_back();
    state_[m.dst] = saved;
    return false;
  }

  bool rec(std::size_t gate, int nots) {
    if (!failed_.insert(key(gate, nots)).second) return false;
    if (gate == gates_.size() && nots == options_.not_budget && done()) return true;
    const std::size_t n = cells_.size();

    if (nots < options_.not_budget) {
      for (std::size_t src = 0; src < n; ++src) {
        const Slot v = state_[src];
        if (v == 0) continue;
        const Slot flipped = static_cast<Slot>(((v - 1) ^ 1) + 1);
        for (std::size_t dst = 0; dst < n; ++dst) {
          if (!adjacent_[src][dst] || !is_free(dst, gate)) continue;
          if (try_move({true, src, src, dst}, flipped, gate, nots + 1)) return true;
        }
      }
    }
    if (gate < gates_.size()) {
      const Gate& g = gates_[gate];
      for (std::size_t x = 0; x < n; ++x) {
        if (state_[x] != slot_of(g.lhs, false)) continue;
        for (std::size_t y = 0; y < n; ++y) {
          if (state_[y] != slot_of(g.rhs, false)) continue;
          for (std::size_t dst = 0; dst < n; ++dst) {
            if (dst == x || dst == y || !adjacent_[x][dst] || !adjacent_[y][dst]) continue;
            if (!is_free(dst, gate)) continue;
            if (try_move({false, x, y, dst}, slot_of(g.out, false), gate + 1, nots)) return true;
          }
        }
      }
    }
    return false;
  }

  FullAdderOptions options_;
  std::vector<std::string> cells_;
  std::vector<std::vector<bool>> adjacent_;
  std::vector<std::string> names_;
  std::vector<Gate> gates_;
  int s_ = 0;
  int c_out_ = 0;
  std::size_t c_in_cell_ = 0;
  std::vector<Slot> state_;
  std::vector<Move> moves_;
  std::unordered_set<std::uint64_t> failed_;
};

}  // namespace

StepProgram compile_full_adder(const StackTopology& stack, const AdderPlacement& placement,
                               const FullAdderOptions& options, const NandNetlist& netlist) {
  Scheduler scheduler(stack, placement, options, netlist);
  auto moves = scheduler.solve();
  if (!moves)
    throw PlacementInfeasible("no full-adder schedule for placement a=" + placement.a +
                              " b=" + placement.b + " c_in=" + placement.c_in);
  const auto& cells = scheduler.cells();
  StepProgram program;
  for (const auto& m : *moves) {
    program.append(m.is_not ? not_macro(cells[m.lhs], cells[m.dst])
                            : nand_macro(cells[m.lhs], cells[m.rhs], cells[m.dst]));
  }
  program.inputs = {{"a", placement.a}, {"b", placement.b}, {"c_in", placement.c_in}};
  program.outputs = {{"s", cells[scheduler.s_cell()]},
                     {"c_out", cells[scheduler.c_out_cell()]}};
  check_full_adder(stack, program);
  return program;
}

void check_full_adder(const StackTopology& stack, const StepProgram& program) {
  for (const char* var : {"a", "b", "c_in"})
    if (!program.inputs.count(var)) throw ProgramError(std::string("missing input ") + var);
  for (const char* var : {"s", "c_out"})
    if (!program.outputs.count(var)) throw ProgramError(std::string("missing output ") + var);

  // Macro shape: RESET dst followed by one (NOT) or two (NAND) IMPs into dst.
  const auto& steps = program.steps;
  for (std::size_t i = 0; i < steps.size();) {
    const auto* reset = std::get_if<ResetStep>(&steps[i]);
    if (!reset) throw ProgramError("step " + std::to_string(i) + ": expected RESET");
    std::size_t j = i + 1;
    while (j < steps.size() && j - i <= 2) {
      const auto* imp = std::get_if<ImpStep>(&steps[j]);
      if (!imp) break;
      if (imp->q != reset->cell)
        throw ProgramError("step " + std::to_string(j) + ": IMP target differs from RESET cell");
      if (imp->p == reset->cell)
        throw ProgramError("step " + std::to_string(j) + ": IMP reads its own target");
      resolve_pair(stack, imp->p, imp->q);
      if (!stack.is_usable(imp->p) || !stack.is_usable(imp->q))
        throw ProgramError("step " + std::to_string(j) + ": unusable cell");
      ++j;
    }
    if (j == i + 1) throw ProgramError("step " + std::to_string(i) + ": RESET without IMP");
    i = j;
  }

  for (int row = 0; row < 8; ++row) {
    std::map<std::string, bool> bits;
    const bool a = row & 1, b = (row >> 1) & 1, c = (row >> 2) & 1;
    bits[program.inputs.at("a")] = a;
    bits[program.inputs.at("b")] = b;
    bits[program.inputs.at("c_in")] = c;
    for (const auto& step : steps) {
      if (const auto* r = std::get_if<ResetStep>(&step)) {
        bits[r->cell] = false;
      } else if (const auto* imp = std::get_if<ImpStep>(&step)) {
        bits[imp->q] = !bits[imp->p] || bits[imp->q];
      }
    }
    const bool s = a ^ b ^ c;
    const bool carry = (a && b) || (c && (a ^ b));
    if (bits[program.outputs.at("s")] != s || bits[program.outputs.at("c_out")] != carry)
      throw ProgramError("full adder is wrong for a=" + std::to_string(a) +
                         " b=" + std::to_string(b) + " c_in=" + std::to_string(c));
  }
}

RippleAdder::RippleAdder(StackTopology stack, SpecTable specs, ConfigTable configs,
                         StepProgram full_adder, int bits)
    : stack_(std::move(stack)),
      specs_(std::move(specs)),
      configs_(std::move(configs)),
      full_adder_(std::move(full_adder)),
      bits_(bits) {
  if (bits_ < 1 || bits_ > 32) throw ConfigError("ripple adder width must be in [1, 32]");
  check_full_adder(stack_, full_adder_);
  if (full_adder_.outputs.at("c_out") != full_adder_.inputs.at("c_in"))
    throw ProgramError("ripple adder needs c_out left in the c_in cell");
  round_.emplace(full_adder_, stack_, specs_, configs_);
}

RippleAdder RippleAdder::standard(int bits) {
  StackTopology stack = build_adder_stack();
  SpecTable specs = measured_level_specs();
  StepProgram fa = compile_full_adder(stack, default_adder_placement());
  std::vector<PairRef> pairs;
  for (const auto& [p, q] : imp_pairs(fa)) pairs.push_back({p, q});
  auto derived = derive_class_configs(stack, specs, pairs, LoadSpec::current_source(),
                                      DeriveMode::nominal);
  return RippleAdder(std::move(stack), std::move(specs), std::move(derived.configs),
                     std::move(fa), bits);
}

RippleResult RippleAdder::add(std::uint32_t a, std::uint32_t b, bool c0,
                              const Variation& variation) const {
  std::vector<DeviceState> states(stack_.size(), DeviceState::off());
  RunOptions options;
  options.record_trace = false;
  RippleResult result;
  for (int i = 0; i < bits_; ++i) {
    std::map<std::string, bool> inputs{{"a", (a >> i) & 1u}, {"b", (b >> i) & 1u}};
    if (i == 0) inputs["c_in"] = c0;
    Variation v = variation;
    v.stream = variation.stream * 64 + static_cast<std::uint64_t>(i);
    const auto trace = run(*round_, states, inputs, v, options);
    if (trace.outputs.at("s")) result.sum |= 1u << i;
    result.carry = trace.outputs.at("c_out");
  }
  const StepCensus round = census(full_adder_);
  const auto n = static_cast<std::size_t>(bits_);
  result.census.writes = 2 * n + 1;
  result.census.resets = round.resets * n;
  result.census.imps = round.imps * n;
  result.census.reads = n + 1;
  return result;
}

StepProgram RippleAdder::program_for(std::uint32_t a, std::uint32_t b, bool c0) const {
  const auto& in = full_adder_.inputs;
  StepProgram program;
  for (int i = 0; i < bits_; ++i) {
    program.steps.push_back(WriteStep{in.at("a"), ((a >> i) & 1u) != 0});
    program.steps.push_back(WriteStep{in.at("b"), ((b >> i) & 1u) != 0});
    if (i == 0) program.steps.push_back(WriteStep{in.at("c_in"), c0});
    program.steps.insert(program.steps.end(), full_adder_.steps.begin(), full_adder_.steps.end());
    program.steps.push_back(ReadStep{full_adder_.outputs.at("s")});
  }
  program.steps.push_back(ReadStep{in.at("c_in")});
  program.outputs = {{"carry", in.at("c_in")}};
  return program;
}

RippleResult ripple_adder_8bit(std::uint8_t a, std::uint8_t b, bool c0) {
  static const RippleAdder adder = RippleAdder::standard(8);
  return adder.add(a, b, c0);
}

}  // namespace imp3d
