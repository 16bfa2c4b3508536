#include "imp3d/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "imp3d/error.hpp"

namespace imp3d::io {

double round12(double value) {
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string text(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  if (!j.at(key).is_string()) throw ConfigError(std::string("key '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

bool bit(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const Json& v = j.at(key);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) return v.get<int>() == 1;
  throw ConfigError(std::string("key '") + key + "' must be 0, 1 or a boolean");
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

Json state_json(const DeviceState& s) {
  return {{"logic", s.logic == Logic::on ? 1 : 0}, {"scale", round12(s.conductance_scale)}};
}

Level level_from(const std::string& s) {
  if (s == "bottom") return Level::bottom;
  if (s == "top") return Level::top;
  throw ConfigError("unknown level '" + s + "'");
}

Orientation orientation_from(const std::string& s) {
  if (s == "active_toward_node") return Orientation::active_toward_node;
  if (s == "active_away_from_node") return Orientation::active_away_from_node;
  throw ConfigError("unknown orientation '" + s + "'");
}

std::map<std::string, std::string> name_map(const Json& j, const char* key) {
  std::map<std::string, std::string> out;
  if (!j.contains(key)) return out;
  require_object(j.at(key), key);
  for (const auto& [k, v] : j.at(key).items()) {
    if (!v.is_string()) throw ConfigError(std::string(key) + "." + k + " must be a cell id");
    out[k] = v.get<std::string>();
  }
  return out;
}

}  // namespace

MemristorSpec spec_from_json(const Json& j) {
  return guarded("spec", [&] {
    require_object(j, "spec");
    MemristorSpec s;
    s.v_set_min = number(j, "v_set_min");
    s.v_set_max = number(j, "v_set_max");
    s.v_reset_min = number(j, "v_reset_min");
    s.v_reset_max = number(j, "v_reset_max");
    s.g_on = number(j, "g_on");
    s.g_off = number(j, "g_off");
    if (j.contains("partial_reset_factor")) s.partial_reset_factor = number(j, "partial_reset_factor");
    if (j.contains("iv_model")) {
      const Json& m = j.at("iv_model");
      const std::string kind = m.is_string() ? m.get<std::string>() : text(m, "kind");
      if (kind == "linear") {
        s.iv_model = LinearIV{};
      } else if (kind == "sinh") {
        require_object(m, "iv_model");
        if (m.contains("a_on")) {
          s.iv_model = SinhIV{number(m, "a_on"), number(m, "b_on"), number(m, "a_off"),
                              number(m, "b_off")};
        } else {
          s.iv_model = fit_sinh(s.g_on, s.g_off, number(m, "b_on"), number(m, "b_off"));
        }
      } else {
        throw ConfigError("unknown iv_model '" + kind + "'");
      }
    }
    s.validate();
    return s;
  });
}

Json to_json(const MemristorSpec& s) {
  Json j{{"v_set_min", round12(s.v_set_min)},     {"v_set_max", round12(s.v_set_max)},
         {"v_reset_min", round12(s.v_reset_min)}, {"v_reset_max", round12(s.v_reset_max)},
         {"g_on", round12(s.g_on)},               {"g_off", round12(s.g_off)},
         {"partial_reset_factor", round12(s.partial_reset_factor)}};
  if (const auto* m = std::get_if<SinhIV>(&s.iv_model)) {
    j["iv_model"] = {{"kind", "sinh"},
                     {"a_on", round12(m->a_on)},
                     {"b_on", round12(m->b_on)},
                     {"a_off", round12(m->a_off)},
                     {"b_off", round12(m->b_off)}};
  } else {
    j["iv_model"] = {{"kind", "linear"}};
  }
  return j;
}

SpecTable specs_from_json(const Json& j) {
  require_object(j, "specs");
  SpecTable out;
  for (const auto& [k, v] : j.items()) out[k] = spec_from_json(v);
  return out;
}

Json to_json(const SpecTable& specs) {
  Json j = Json::object();
  for (const auto& [k, v] : specs) j[k] = to_json(v);
  return j;
}

StackTopology topology_from_json(const Json& j) {
  return guarded("topology", [&] {
    require_object(j, "topology");
    if (!j.contains("cells") || !j.at("cells").is_array())
      throw ConfigError("topology needs a 'cells' array");
    std::vector<Cell> cells;
    for (const auto& c : j.at("cells")) {
      require_object(c, "cell");
      Cell cell;
      cell.id = text(c, "id");
      cell.level = level_from(text(c, "level"));
      cell.spec_ref = c.contains("spec") ? text(c, "spec") : cell.id;
      cell.orientation = orientation_from(text(c, "orientation"));
      cell.middle = text(c, "middle");
      cell.outer = text(c, "outer");
      cells.push_back(std::move(cell));
    }
    std::set<std::string> unusable;
    if (j.contains("unusable"))
      for (const auto& u : j.at("unusable")) unusable.insert(u.get<std::string>());
    return StackTopology(std::move(cells), std::move(unusable));
  });
}

Json to_json(const StackTopology& t) {
  Json cells = Json::array();
  for (const auto& c : t.cells()) {
    cells.push_back({{"id", c.id},
                     {"level", std::string(to_string(c.level))},
                     {"spec", c.spec_ref},
                     {"orientation", std::string(to_string(c.orientation))},
                     {"middle", c.middle},
                     {"outer", c.outer}});
  }
  Json unusable = Json::array();
  for (const auto& u : t.unusable_cells()) unusable.push_back(u);
  return {{"cells", cells}, {"unusable", unusable}};
}

ImpConfig config_from_json(const Json& j) {
  return guarded("config", [&] {
    require_object(j, "config");
    ImpConfig c;
    c.v_p = number(j, "v_p");
    if (j.contains("pulse_duration")) c.pulse_duration = number(j, "pulse_duration");
    if (!j.contains("load")) throw ConfigError("config needs a 'load'");
    const Json& l = j.at("load");
    require_object(l, "load");
    const std::string kind = text(l, "kind");
    if (kind == "current_source") {
      c.load = CurrentSourceLoad{number(l, "i_l")};
    } else if (kind == "resistive") {
      c.load = ResistiveLoad{number(l, "g_l"), number(l, "v_l")};
    } else {
      throw ConfigError("unknown load kind '" + kind + "'");
    }
    c.validate();
    return c;
  });
}

Json to_json(const ImpConfig& c) {
  Json load;
  if (const auto* cs = std::get_if<CurrentSourceLoad>(&c.load)) {
    load = {{"kind", "current_source"}, {"i_l", round12(cs->i_l)}};
  } else {
    const auto& r = std::get<ResistiveLoad>(c.load);
    load = {{"kind", "resistive"}, {"g_l", round12(r.g_l)}, {"v_l", round12(r.v_l)}};
  }
  return {{"v_p", round12(c.v_p)}, {"load", load}, {"pulse_duration", round12(c.pulse_duration)}};
}

ConfigTable configs_from_json(const Json& j) {
  require_object(j, "configs");
  ConfigTable out;
  for (const auto& [k, v] : j.items()) out[k] = config_from_json(v);
  return out;
}

Json to_json(const ConfigTable& configs) {
  Json j = Json::object();
  for (const auto& [k, v] : configs) j[k] = to_json(v);
  return j;
}

StepProgram program_from_json(const Json& j) {
  return guarded("program", [&] {
    require_object(j, "program");
    if (!j.contains("steps") || !j.at("steps").is_array())
      throw ConfigError("program needs a 'steps' array");
    StepProgram p;
    for (const auto& s : j.at("steps")) {
      require_object(s, "step");
      const std::string op = text(s, "op");
      if (op == "write") {
        p.steps.push_back(WriteStep{text(s, "cell"), bit(s, "value")});
      } else if (op == "reset") {
        p.steps.push_back(ResetStep{text(s, "cell")});
      } else if (op == "imp") {
        p.steps.push_back(
            ImpStep{text(s, "p"), text(s, "q"), s.contains("config") ? text(s, "config") : "auto"});
      } else if (op == "read") {
        p.steps.push_back(ReadStep{text(s, "cell")});
      } else {
        throw ConfigError("unknown op '" + op + "'");
      }
    }
    p.inputs = name_map(j, "inputs");
    p.outputs = name_map(j, "outputs");
    return p;
  });
}

Json to_json(const Step& step) {
  Json j{{"op", std::string(op_name(step))}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WriteStep>) {
          j["cell"] = s.cell;
          j["value"] = s.value ? 1 : 0;
        } else if constexpr (std::is_same_v<T, ImpStep>) {
          j["p"] = s.p;
          j["q"] = s.q;
          j["config"] = s.config;
        } else {
          j["cell"] = s.cell;
        }
      },
      step);
  return j;
}

Json to_json(const StepProgram& p) {
  Json steps = Json::array();
  for (const auto& s : p.steps) steps.push_back(to_json(s));
  return {{"steps", steps}, {"inputs", p.inputs}, {"outputs", p.outputs}};
}

Json to_json(const NodeSolution& s) {
  return {{"v_c", round12(s.v_c)},
          {"drop_p", round12(s.drop_p)},
          {"drop_q", round12(s.drop_q)},
          {"residual", round12(s.residual)},
          {"iterations", s.iterations}};
}

Json to_json(const SwitchEvent& e) {
  return {{"cell", e.cell},
          {"kind", std::string(to_string(e.kind))},
          {"drop", round12(e.drop)},
          {"iteration", e.iteration}};
}

Json to_json(const StepRecord& r) {
  Json j = to_json(r.step);
  j["step"] = r.index;
  Json before = Json::object();
  for (const auto& cs : r.before) before[cs.cell] = state_json(cs.state);
  Json after = Json::object();
  for (const auto& cs : r.after) after[cs.cell] = state_json(cs.state);
  j["before"] = before;
  j["after"] = after;
  if (r.node) j["node"] = to_json(*r.node);
  if (std::holds_alternative<ImpStep>(r.step)) {
    Json events = Json::array();
    for (const auto& e : r.events) events.push_back(to_json(e));
    j["events"] = events;
  }
  if (r.read_bit) j["read"] = *r.read_bit ? 1 : 0;
  return j;
}

void write_trace_lines(std::ostream& out, const ExecutionTrace& trace) {
  for (const auto& r : trace.steps) out << to_json(r).dump() << '\n';
}

Json to_json(const MarginReport& r) {
  Json j{{"delta_ideal", round12(r.delta_ideal)},
         {"delta_actual", round12(r.delta_actual)},
         {"v_star", round12(r.v_star)},
         {"optimal_v_p", round12(r.optimal_v_p)},
         {"configuration", std::string(to_string(r.configuration))},
         {"g_l", round12(r.g_l)}};
  if (r.g_l > 0.0)
    j["optimal_v_l"] = round12(r.optimal_v_l);
  else
    j["optimal_i_l"] = round12(r.optimal_i_l);
  return j;
}

Json to_json(const OptimizationResult& r) {
  Json slacks = Json::object();
  for (const auto& [k, v] : r.slack_breakdown) slacks[k] = round12(v);
  return {{"best_config", to_json(r.best_config)},
          {"margin", round12(r.margin)},
          {"slack_breakdown", slacks},
          {"evaluations", r.evaluations},
          {"boundary", r.boundary}};
}

Json to_json(const YieldReport& r) {
  Json hist = Json::object();
  for (const auto& [k, v] : r.failure_histogram) hist[std::to_string(k)] = v;
  return {{"trials", r.trials},
          {"passes", r.passes},
          {"yield", round12(r.yield)},
          {"failure_histogram", hist},
          {"imp_steps", r.imp_steps},
          {"degraded_imp_steps", r.degraded_imp_steps},
          {"degraded_ratio_fraction", round12(r.degraded_ratio_fraction)}};
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "g_l_over_g_on,ratio,delta_over_v_star,marker\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%d\n", r.g_l_over_g_on, r.ratio,
                  r.delta_over_v_star, r.marker);
    out << buf;
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace imp3d::io
