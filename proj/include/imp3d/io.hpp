#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "imp3d/adder.hpp"
#include "imp3d/device.hpp"
#include "imp3d/margins.hpp"
#include "imp3d/montecarlo.hpp"
#include "imp3d/optimizer.hpp"
#include "imp3d/program.hpp"
#include "imp3d/topology.hpp"

namespace imp3d::io {

using Json = nlohmann::json;

/// Rounds to 12 significant digits so emitted documents are byte-stable.
double round12(double value);

MemristorSpec spec_from_json(const Json& j);
Json to_json(const MemristorSpec& spec);

SpecTable specs_from_json(const Json& j);
Json to_json(const SpecTable& specs);

/// {"cells":[...], "unusable":[...]} (an optional "specs" key is ignored here).
StackTopology topology_from_json(const Json& j);
Json to_json(const StackTopology& topology);

ImpConfig config_from_json(const Json& j);
Json to_json(const ImpConfig& config);

ConfigTable configs_from_json(const Json& j);
Json to_json(const ConfigTable& configs);

/// {"steps":[{"op":"write","cell":"B1","value":1}, {"op":"imp","p":..,"q":..,"config":..}, ...],
///  "inputs":{...}, "outputs":{...}}
StepProgram program_from_json(const Json& j);
Json to_json(const StepProgram& program);
Json to_json(const Step& step);

Json to_json(const NodeSolution& solution);
Json to_json(const SwitchEvent& event);
Json to_json(const StepRecord& record);
/// One JSON object per line, one line per step.
void write_trace_lines(std::ostream& out, const ExecutionTrace& trace);

Json to_json(const MarginReport& report);
Json to_json(const OptimizationResult& result);
Json to_json(const YieldReport& report);

/// Header plus one row per sweep entry, 12 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

Json read_json_file(const std::string& path);

/// Stable text: sorted keys, 2-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace imp3d::io
