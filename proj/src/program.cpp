#include "imp3d/program.hpp"

#include <algorithm>
#include <set>

#include "imp3d/error.hpp"
#include "imp3d/rng.hpp"

namespace imp3d {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_usable(const StackTopology& t, const std::string& cell, std::size_t step) {
  if (!t.find(cell))
    throw ProgramError("step " + std::to_string(step) + ": unknown cell " + cell);
  if (!t.is_usable(cell))
    throw ProgramError("step " + std::to_string(step) + ": cell " + cell + " is unusable");
}

}  // namespace

void StepProgram::append(const StepProgram& other) {
  steps.insert(steps.end(), other.steps.begin(), other.steps.end());
}

StepCensus census(const StepProgram& program) {
  StepCensus c;
  for (const auto& s : program.steps) {
    std::visit(Overloaded{[&](const WriteStep&) { ++c.writes; },
                          [&](const ResetStep&) { ++c.resets; },
                          [&](const ImpStep&) { ++c.imps; }, [&](const ReadStep&) { ++c.reads; }},
               s);
  }
  return c;
}

StepProgram nand_macro(const std::string& a, const std::string& b, const std::string& out,
                       const std::string& config) {
  if (out == a || out == b)
    throw ProgramError("nand: output cell " + out + " collides with an input cell");
  StepProgram p;
  p.steps = {ResetStep{out}, ImpStep{a, out, config}, ImpStep{b, out, config}};
  p.inputs = {{"a", a}, {"b", b}};
  p.outputs = {{"out", out}};
  return p;
}

StepProgram not_macro(const std::string& a, const std::string& out, const std::string& config) {
  if (out == a) throw ProgramError("not: output cell " + out + " collides with the input cell");
  StepProgram p;
  p.steps = {ResetStep{out}, ImpStep{a, out, config}};
  p.inputs = {{"a", a}};
  p.outputs = {{"out", out}};
  return p;
}

StepProgram imp_program(const std::string& p, const std::string& q, const std::string& config) {
  StepProgram prog;
  prog.steps = {ImpStep{p, q, config}};
  prog.inputs = {{"p", p}, {"q", q}};
  prog.outputs = {{"q", q}};
  return prog;
}

std::vector<std::pair<std::string, std::string>> imp_pairs(const StepProgram& program) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& s : program.steps) {
    if (const auto* imp = std::get_if<ImpStep>(&s)) {
      if (seen.emplace(imp->p, imp->q).second) out.emplace_back(imp->p, imp->q);
    }
  }
  return out;
}

std::string_view op_name(const Step& step) noexcept {
  switch (step.index()) {
    case 0:
      return "write";
    case 1:
      return "reset";
    case 2:
      return "imp";
    default:
      return "read";
  }
}

CompiledProgram::CompiledProgram(const StepProgram& program, const StackTopology& topology,
                                 const SpecTable& specs, const ConfigTable& configs)
    : program_(program), topology_(topology) {
  cell_specs_.reserve(topology_.size());
  for (const auto& cell : topology_.cells()) {
    auto it = specs.find(cell.spec_ref);
    if (it != specs.end()) {
      it->second.validate();
      cell_specs_.push_back(it->second);
    } else if (topology_.is_usable(cell.id)) {
      throw ProgramError("no device spec '" + cell.spec_ref + "' for cell " + cell.id);
    } else {
      cell_specs_.push_back(MemristorSpec{});
    }
  }

  std::vector<bool> defined(topology_.size(), false);
  for (const auto& [var, cell] : program_.inputs) {
    require_usable(topology_, cell, 0);
    const std::size_t idx = topology_.index_of(cell);
    inputs_.emplace_back(var, idx);
    defined[idx] = true;
  }

  std::map<std::string, std::size_t> config_index;
  for (std::size_t i = 0; i < program_.steps.size(); ++i) {
    const Step& step = program_.steps[i];
    Op op{};
    if (const auto* w = std::get_if<WriteStep>(&step)) {
      require_usable(topology_, w->cell, i);
      op.kind = Op::Kind::write;
      op.target = topology_.index_of(w->cell);
      op.value = w->value;
      defined[op.target] = true;
    } else if (const auto* r = std::get_if<ResetStep>(&step)) {
      require_usable(topology_, r->cell, i);
      op.kind = Op::Kind::reset;
      op.target = topology_.index_of(r->cell);
      defined[op.target] = true;
    } else if (const auto* imp = std::get_if<ImpStep>(&step)) {
      require_usable(topology_, imp->p, i);
      require_usable(topology_, imp->q, i);
      PairGeometry g;
      try {
        g = resolve_pair(topology_, imp->p, imp->q);
      } catch (const NotAdjacent& e) {
        throw ProgramError("step " + std::to_string(i) + ": " + e.what());
      }
      if (!defined[g.p] || !defined[g.q])
        throw ProgramError("step " + std::to_string(i) + ": IMP reads a cell that was never " +
                           "written, reset or declared as input");
      std::string ref = imp->config;
      if (ref == "auto") {
        ref = pair_key(imp->p, imp->q);
        if (!configs.contains(ref)) ref = pair_class(topology_, imp->p, imp->q);
      }
      auto found = config_index.find(ref);
      if (found == config_index.end()) {
        auto it = configs.find(ref);
        if (it == configs.end())
          throw ProgramError("step " + std::to_string(i) + ": no config named '" + ref + "'");
        it->second.validate();
        configs_.push_back(it->second);
        found = config_index.emplace(ref, configs_.size() - 1).first;
      }
      op.kind = Op::Kind::imp;
      op.source = g.p;
      op.target = g.q;
      op.config = found->second;
      op.pair = pairs_.size();
      pairs_.push_back(std::move(g));
    } else {
      const auto& rd = std::get<ReadStep>(step);
      if (!topology_.find(rd.cell))
        throw ProgramError("step " + std::to_string(i) + ": unknown cell " + rd.cell);
      op.kind = Op::Kind::read;
      op.target = topology_.index_of(rd.cell);
      if (!defined[op.target])
        throw ProgramError("step " + std::to_string(i) + ": READ of undefined cell " + rd.cell);
    }
    ops_.push_back(op);
  }

  for (const auto& [var, cell] : program_.outputs) {
    if (!topology_.find(cell)) throw ProgramError("output " + var + ": unknown cell " + cell);
    const std::size_t idx = topology_.index_of(cell);
    if (!defined[idx]) throw ProgramError("output " + var + " is never computed");
    outputs_.emplace_back(var, idx);
  }
}

ExecutionTrace run(const CompiledProgram& compiled, std::vector<DeviceState>& states,
                   const std::map<std::string, bool>& inputs, const Variation& variation,
                   const RunOptions& options, std::vector<ImpOutcome>* imp_outcomes) {
  const StackTopology& topo = compiled.topology();
  const auto& specs = compiled.cell_specs();
  if (states.size() != topo.size())
    throw ProgramError("run: state vector does not match topology");
  for (std::size_t i = 0; i < topo.size(); ++i)
    if (!topo.is_usable(topo.cell(i).id)) states[i] = DeviceState::off();

  for (const auto& [var, value] : inputs) {
    bool known = false;
    for (const auto& [name, idx] : compiled.inputs()) {
      if (name == var) {
        states[idx] = value ? DeviceState::on() : DeviceState::off();
        known = true;
      }
    }
    if (!known) throw ProgramError("run: '" + var + "' is not a declared input");
  }

  ExecutionTrace trace;
  RngStream rng(variation.seed, variation.stream);
  const auto& steps = compiled.program().steps;
  if (options.record_trace) trace.steps.reserve(steps.size());

  for (std::size_t i = 0; i < compiled.ops().size(); ++i) {
    const auto& op = compiled.ops()[i];
    StepRecord rec;
    const bool record = options.record_trace;
    if (record) {
      rec.index = i;
      rec.step = steps[i];
      if (op.kind == CompiledProgram::Op::Kind::imp)
        rec.before.push_back({topo.cell(op.source).id, states[op.source]});
      rec.before.push_back({topo.cell(op.target).id, states[op.target]});
    }
    switch (op.kind) {
      case CompiledProgram::Op::Kind::write:
        states[op.target] = op.value ? DeviceState::on() : DeviceState::off();
        break;
      case CompiledProgram::Op::Kind::reset:
        states[op.target] = DeviceState::off();
        break;
      case CompiledProgram::Op::Kind::read:
        if (record) rec.read_bit = decode_bit(specs[op.target], states[op.target]);
        break;
      case CompiledProgram::Op::Kind::imp: {
        const auto& g = compiled.pairs()[op.pair];
        const auto& p_spec = specs[g.p];
        const auto& q_spec = specs[g.q];
        ThresholdSample p_th = nominal_thresholds(p_spec);
        ThresholdSample q_th = nominal_thresholds(q_spec);
        if (variation.enabled) {
          p_th = sample_thresholds(p_spec, rng);
          q_th = sample_thresholds(q_spec, rng);
        }
        auto r = settle_pair(g, p_spec, states[g.p], p_th, q_spec, states[g.q], q_th,
                             compiled.configs()[op.config], topo.cell(g.p).id,
                             topo.cell(g.q).id, options.solver);
        states[g.p] = r.p;
        states[g.q] = r.q;
        if (imp_outcomes)
          imp_outcomes->push_back(
              {i, std::min(r.p.conductance_scale, r.q.conductance_scale)});
        if (record) {
          rec.node = r.final_solution;
          rec.events = std::move(r.events);
        }
        break;
      }
    }
    if (record) {
      if (op.kind == CompiledProgram::Op::Kind::imp)
        rec.after.push_back({topo.cell(op.source).id, states[op.source]});
      rec.after.push_back({topo.cell(op.target).id, states[op.target]});
      trace.steps.push_back(std::move(rec));
    }
  }

  for (std::size_t i = 0; i < topo.size(); ++i)
    trace.final_bits[topo.cell(i).id] = decode_bit(specs[i], states[i]);
  for (const auto& [var, idx] : compiled.outputs())
    trace.outputs[var] = decode_bit(specs[idx], states[idx]);
  trace.final_states = states;
  return trace;
}

ExecutionTrace execute(const StepProgram& program, const StackTopology& topology,
                       const SpecTable& specs, const ConfigTable& configs,
                       const Variation& variation, const std::map<std::string, bool>& inputs,
                       const RunOptions& options) {
  CompiledProgram compiled(program, topology, specs, configs);
  std::vector<DeviceState> states(topology.size(), DeviceState::off());
  return run(compiled, states, inputs, variation, options);
}

}  // namespace imp3d
