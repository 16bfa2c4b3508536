#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "imp3d/adder.hpp"
#include "imp3d/error.hpp"
#include "imp3d/io.hpp"
#include "imp3d/margins.hpp"
#include "imp3d/montecarlo.hpp"
#include "imp3d/optimizer.hpp"

using namespace imp3d;
using io::Json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct Stack {
  StackTopology topology;
  SpecTable specs;
};

Stack stack_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("specs")) throw ConfigError("topology file needs a 'specs' table");
  return {io::topology_from_json(j), io::specs_from_json(j.at("specs"))};
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("malformed ") + what + ": '" + text + "'");
    }
  }
  return out;
}

std::vector<PairRef> parse_pairs(const std::string& text) {
  std::vector<PairRef> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
      throw ConfigError("malformed pair '" + item + "', expected P:Q");
    out.push_back({item.substr(0, colon), item.substr(colon + 1)});
  }
  if (out.empty()) throw ConfigError("no pairs given");
  return out;
}

LoadSpec parse_load(const std::string& text) {
  if (text == "current") return LoadSpec::current_source();
  const std::string prefix = "resistive:";
  if (text.rfind(prefix, 0) == 0) {
    const auto values = parse_list(text.substr(prefix.size()), "load");
    if (values.size() != 1 || !(values[0] > 0.0))
      throw ConfigError("resistive load needs one positive conductance");
    return LoadSpec::resistive(values[0]);
  }
  throw ConfigError("load must be 'current' or 'resistive:GL'");
}

void emit(const Json& j, const std::string& out_path = {}) {
  const std::string text = io::dump(j);
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw ConfigError("cannot write " + out_path);
    f << text;
  }
}

ConfigTable program_configs(const Json& doc, const StepProgram& program, const Stack& stack) {
  if (doc.contains("configs")) return io::configs_from_json(doc.at("configs"));
  std::vector<PairRef> pairs;
  for (const auto& [p, q] : imp_pairs(program)) {
    // non-adjacent pairs are left for the program compiler to report
    try {
      resolve_pair(stack.topology, p, q);
    } catch (const NotAdjacent&) {
      continue;
    }
    pairs.push_back({p, q});
  }
  if (pairs.empty()) return {};
  return derive_class_configs(stack.topology, stack.specs, pairs, LoadSpec::current_source(),
                              DeriveMode::nominal)
      .configs;
}

BitMap bit_map(const Json& j) {
  BitMap out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean())
      out[k] = v.get<bool>();
    else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1))
      out[k] = v.get<int>() == 1;
    else
      throw ConfigError("bit '" + k + "' must be 0 or 1");
  }
  return out;
}

Json bits_json(const BitMap& bits) {
  Json j = Json::object();
  for (const auto& [k, v] : bits) j[k] = v ? 1 : 0;
  return j;
}

/// "expected": [{"inputs": {...}, "outputs": {...}}, ...]
std::vector<std::pair<BitMap, BitMap>> expected_rows(const Json& doc) {
  std::vector<std::pair<BitMap, BitMap>> rows;
  if (!doc.contains("expected")) return rows;
  for (const auto& row : doc.at("expected")) {
    if (!row.is_object() || !row.contains("inputs") || !row.contains("outputs"))
      throw ConfigError("expected rows need 'inputs' and 'outputs'");
    rows.emplace_back(bit_map(row.at("inputs")), bit_map(row.at("outputs")));
  }
  return rows;
}

int cmd_margins(const std::string& spec_path, const std::string& sweep,
                const std::string& ratio_text, const std::string& out_path) {
  const MemristorSpec spec = io::spec_from_json(io::read_json_file(spec_path));
  const auto s = parse_list(sweep, "sweep");
  if (s.size() != 3 || s[2] < 2 || s[2] != static_cast<int>(s[2]) || s[0] < 0 || s[1] <= s[0])
    throw ConfigError("sweep must be gl_min,gl_max,steps with 0 <= gl_min < gl_max, steps >= 2");
  const auto ratios = parse_list(ratio_text, "ratios");
  for (double r : ratios)
    if (!(r >= 1.0)) throw ConfigError("ON/OFF ratios must be >= 1");
  const auto rows = margin_sweep(s[0], s[1], static_cast<int>(s[2]), ratios);
  if (out_path.empty()) {
    io::write_sweep_csv(std::cout, rows);
    return 0;
  }
  std::ofstream f(out_path);
  if (!f) throw ConfigError("cannot write " + out_path);
  io::write_sweep_csv(f, rows);
  emit({{"rows", rows.size()},
        {"out", out_path},
        {"current_source", io::to_json(analyze_parallel(spec, 0.0))}});
  return 0;
}

int cmd_optimize(const std::string& topo_path, const std::string& pair_text,
                 const std::string& load_text, const std::string& out_path) {
  const Stack stack = stack_from_json(io::read_json_file(topo_path));
  const auto pairs = parse_pairs(pair_text);
  const LoadSpec load = parse_load(load_text);
  try {
    emit(io::to_json(optimize(stack.topology, pairs, stack.specs, load)), out_path);
    return 0;
  } catch (const Infeasible& e) {
    emit({{"error", e.category()}, {"message", e.what()}, {"result", io::to_json(e.result())}},
         out_path);
    return kExitInfeasible;
  }
}

int cmd_run(const std::string& program_path, const std::string& topo_path, std::uint64_t seed,
            const std::string& variation, const std::string& trace_path) {
  if (variation != "on" && variation != "off") throw ConfigError("--variation must be on or off");
  const Json doc = io::read_json_file(program_path);
  const StepProgram program = io::program_from_json(doc);
  const Stack stack = stack_from_json(io::read_json_file(topo_path));
  const ConfigTable configs = program_configs(doc, program, stack);
  const CompiledProgram compiled(program, stack.topology, stack.specs, configs);

  auto rows = expected_rows(doc);
  if (rows.empty()) {
    const std::size_t n = std::size_t{1} << std::min<std::size_t>(program.inputs.size(), 16);
    for (std::size_t r = 0; r < n; ++r) rows.emplace_back(input_row(program, r), BitMap{});
  }

  std::ofstream trace_out;
  if (!trace_path.empty()) {
    trace_out.open(trace_path);
    if (!trace_out) throw ConfigError("cannot write " + trace_path);
  }
  Json out_rows = Json::array();
  std::size_t correct = 0;
  std::size_t checked = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [inputs, expected] = rows[r];
    std::vector<DeviceState> states(stack.topology.size(), DeviceState::off());
    const Variation v = variation == "on" ? Variation::seeded(seed, r) : Variation::off();
    const auto trace = run(compiled, states, inputs, v);
    if (trace_out.is_open()) io::write_trace_lines(trace_out, trace);
    Json row{{"inputs", bits_json(inputs)}, {"outputs", bits_json(trace.outputs)}};
    Json reads = Json::array();
    for (const auto& rec : trace.steps)
      if (rec.read_bit) reads.push_back({{"step", rec.index}, {"bit", *rec.read_bit ? 1 : 0}});
    if (!reads.empty()) row["reads"] = reads;
    if (!expected.empty()) {
      bool ok = true;
      for (const auto& [var, bit] : expected) {
        auto it = trace.outputs.find(var);
        ok = ok && it != trace.outputs.end() && it->second == bit;
      }
      row["expected"] = bits_json(expected);
      row["correct"] = ok;
      ++checked;
      if (ok) ++correct;
    }
    out_rows.push_back(row);
  }
  Json result{{"rows", out_rows}, {"variation", variation}, {"seed", seed}};
  if (checked > 0) {
    result["correct"] = correct;
    result["checked"] = checked;
  }
  emit(result);
  return 0;
}

int cmd_adder(std::int64_t a, std::int64_t b, int cin, int bits) {
  if (bits < 1 || bits > 32) throw ConfigError("--bits must be in [1, 32]");
  const std::int64_t limit = std::int64_t{1} << bits;
  if (a < 0 || a >= limit || b < 0 || b >= limit)
    throw ConfigError("operands must fit in " + std::to_string(bits) + " bits");
  if (cin != 0 && cin != 1) throw ConfigError("--cin must be 0 or 1");
  const RippleAdder adder = RippleAdder::standard(bits);
  const auto r = adder.add(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), cin == 1);
  emit({{"sum", r.sum},
        {"carry", r.carry ? 1 : 0},
        {"resets", r.census.resets},
        {"imps", r.census.imps}});
  return 0;
}

int cmd_yield(const std::string& program_path, const std::string& topo_path, std::size_t trials,
              std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw ConfigError("--trials must be positive");
  const Json doc = io::read_json_file(program_path);
  const StepProgram program = io::program_from_json(doc);
  Json topo_doc;
  if (!topo_path.empty())
    topo_doc = io::read_json_file(topo_path);
  else if (doc.contains("topology"))
    topo_doc = doc.at("topology");
  else
    throw ConfigError("yield needs --topology or a 'topology' object in the program file");
  const Stack stack = stack_from_json(topo_doc);
  const ConfigTable configs = program_configs(doc, program, stack);

  const auto rows = expected_rows(doc);
  if (rows.empty()) throw ConfigError("yield needs an 'expected' truth table in the program file");
  OutputOracle oracle = [rows](const BitMap& inputs) {
    for (const auto& [in, out] : rows)
      if (in == inputs) return out;
    throw ConfigError("no expected row for an input combination");
  };
  YieldOptions options;
  options.trials = trials;
  options.seed = seed;
  options.threads = threads;
  emit(io::to_json(estimate_yield(program, stack.topology, stack.specs, configs, oracle, options)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stateful IMP logic simulator for stacked memristor arrays"};
  app.require_subcommand(1);

  std::string spec_path, sweep = "0,2,101", ratios = "3,10,100", out_path;
  auto* margins = app.add_subcommand("margins", "Set margin vs. load conductance sweep (CSV)");
  margins->add_option("--spec", spec_path, "Device spec JSON")->required();
  margins->add_option("--sweep", sweep, "gl_min,gl_max,steps in units of g_on");
  margins->add_option("--ratios", ratios, "Comma-separated ON/OFF ratios");
  margins->add_option("--out", out_path, "CSV output path (stdout if omitted)");

  std::string topo_path, pairs, load = "current";
  auto* opt = app.add_subcommand("optimize", "Find the bias that maximizes the set margin");
  opt->add_option("--topology", topo_path, "Topology JSON with a specs table")->required();
  opt->add_option("--pairs", pairs, "P:Q pairs sharing one config, comma-separated")->required();
  opt->add_option("--load", load, "current | resistive:GL");
  opt->add_option("--out", out_path, "Also write the result here");

  std::string program_path, variation = "off", trace_path;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Execute a step program on every input row");
  run_cmd->add_option("--program", program_path, "Program JSON")->required();
  run_cmd->add_option("--topology", topo_path, "Topology JSON with a specs table")->required();
  run_cmd->add_option("--seed", seed, "Variation seed");
  run_cmd->add_option("--variation", variation, "on | off");
  run_cmd->add_option("--trace", trace_path, "Write per-step JSON lines here");

  std::int64_t a = 0, b = 0;
  int cin = 0, bits = 8;
  auto* adder = app.add_subcommand("adder", "Ripple-carry addition on the full-adder stack");
  adder->add_option("--a", a, "First operand")->required();
  adder->add_option("--b", b, "Second operand")->required();
  adder->add_option("--cin", cin, "Carry in (0 or 1)");
  adder->add_option("--bits", bits, "Operand width");

  std::size_t trials = 1000;
  unsigned threads = 1;
  auto* yield = app.add_subcommand("yield", "Monte Carlo yield under threshold variation");
  yield->add_option("--program", program_path, "Program JSON with an expected table")->required();
  yield->add_option("--topology", topo_path, "Topology JSON with a specs table");
  yield->add_option("--trials", trials, "Number of trials");
  yield->add_option("--seed", seed, "Base seed");
  yield->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit({{"error", "usage"}, {"message", e.what()}});
    return kExitConfig;
  }

  try {
    if (*margins) return cmd_margins(spec_path, sweep, ratios, out_path);
    if (*opt) return cmd_optimize(topo_path, pairs, load, out_path);
    if (*run_cmd) return cmd_run(program_path, topo_path, seed, variation, trace_path);
    if (*adder) return cmd_adder(a, b, cin, bits);
    if (*yield) return cmd_yield(program_path, topo_path, trials, seed, threads);
  } catch (const ConfigError& e) {
    emit({{"error", e.category()}, {"message", e.what()}});
    return kExitConfig;
  } catch (const Error& e) {
    emit({{"error", e.category()}, {"message", e.what()}});
    return kExitError;
  } catch (const std::exception& e) {
    emit({{"error", "internal"}, {"message", e.what()}});
    return kExitError;
  }
  return kExitError;
}
