#include "imp3d/montecarlo.hpp"

#include <algorithm>
#include <thread>

#include "imp3d/error.hpp"

namespace imp3d {

BitMap input_row(const StepProgram& program, std::size_t row) {
  BitMap bits;
  std::size_t i = 0;
  for (const auto& entry : program.inputs) bits[entry.first] = ((row >> i++) & 1u) != 0;
  return bits;
}

namespace {

struct TrialResult {
  bool pass = false;
  std::size_t first_deviation = 0;
  std::size_t imp_steps = 0;
  std::size_t degraded = 0;
};

using Snapshot = std::vector<std::vector<bool>>;

Snapshot decoded_after(const CompiledProgram& compiled, const ExecutionTrace& trace) {
  Snapshot out;
  out.reserve(trace.steps.size());
  for (const auto& rec : trace.steps) {
    std::vector<bool> bits;
    for (const auto& cs : rec.after) {
      const std::size_t idx = compiled.topology().index_of(cs.cell);
      bits.push_back(decode_bit(compiled.cell_specs()[idx], cs.state));
    }
    out.push_back(std::move(bits));
  }
  return out;
}

}  // namespace

YieldReport estimate_yield(const StepProgram& program, const StackTopology& topology,
                           const SpecTable& specs, const ConfigTable& configs,
                           const OutputOracle& oracle, const YieldOptions& options) {
  if (options.trials == 0) throw ConfigError("yield: trials must be positive");
  if (program.inputs.size() > 16) throw ConfigError("yield: too many declared inputs");
  const CompiledProgram compiled(program, topology, specs, configs);
  const std::size_t rows = std::size_t{1} << program.inputs.size();
  const std::size_t n_steps = compiled.ops().size();

  std::vector<BitMap> row_inputs(rows);
  std::vector<BitMap> expected(rows);
  std::vector<Snapshot> reference(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    row_inputs[r] = input_row(program, r);
    expected[r] = oracle(row_inputs[r]);
    std::vector<DeviceState> states(topology.size(), DeviceState::off());
    reference[r] = decoded_after(compiled, run(compiled, states, row_inputs[r], Variation::off()));
  }

  auto trial = [&](std::size_t t) {
    const std::size_t r = t % rows;
    std::vector<DeviceState> states(topology.size(), DeviceState::off());
    std::vector<ImpOutcome> outcomes;
    const auto trace = run(compiled, states, row_inputs[r], Variation::seeded(options.seed, t),
                           RunOptions{}, &outcomes);
    TrialResult res;
    res.pass = true;
    for (const auto& [var, bit] : expected[r]) {
      auto it = trace.outputs.find(var);
      if (it == trace.outputs.end() || it->second != bit) res.pass = false;
    }
    if (!res.pass) {
      const Snapshot got = decoded_after(compiled, trace);
      res.first_deviation = n_steps == 0 ? 0 : n_steps - 1;
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i] != reference[r][i]) {
          res.first_deviation = i;
          break;
        }
      }
    }
    res.imp_steps = outcomes.size();
    for (const auto& o : outcomes)
      if (o.min_scale < options.degrade_threshold) ++res.degraded;
    return res;
  };

  std::vector<TrialResult> results(options.trials);
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.trials)));
  if (threads == 1) {
    for (std::size_t t = 0; t < options.trials; ++t) results[t] = trial(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < options.trials; t += threads) results[t] = trial(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  YieldReport report;
  report.trials = options.trials;
  for (const auto& r : results) {
    if (r.pass)
      ++report.passes;
    else
      ++report.failure_histogram[r.first_deviation];
    report.imp_steps += r.imp_steps;
    report.degraded_imp_steps += r.degraded;
  }
  report.yield = static_cast<double>(report.passes) / static_cast<double>(report.trials);
  report.degraded_ratio_fraction =
      report.imp_steps == 0 ? 0.0
                            : static_cast<double>(report.degraded_imp_steps) /
                                  static_cast<double>(report.imp_steps);
  return report;
}

}  // namespace imp3d
