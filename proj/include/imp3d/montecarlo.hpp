#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "imp3d/program.hpp"

namespace imp3d {

using BitMap = std::map<std::string, bool>;

/// Expected declared outputs for an assignment of the declared inputs.
using OutputOracle = std::function<BitMap(const BitMap& inputs)>;

struct YieldOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  /// An IMP step counts as degrading when P or Q ends with
  /// conductance_scale below this value.
  double degrade_threshold = 0.9;
  unsigned threads = 1;
};

struct YieldReport {
  std::size_t trials = 0;
  std::size_t passes = 0;
  double yield = 0.0;
  /// step index -> failed trials whose first deviation from the
  /// zero-variation run happened at that step.
  std::map<std::size_t, std::size_t> failure_histogram;
  std::size_t imp_steps = 0;
  std::size_t degraded_imp_steps = 0;
  double degraded_ratio_fraction = 0.0;

  bool operator==(const YieldReport&) const = default;
};

/// Monte Carlo over cycle-to-cycle threshold variation. Trial t runs the
/// program on input row (t mod 2^inputs) with thresholds drawn from the
/// stream (seed, t); it passes iff every declared output matches the oracle.
/// Bit-identical for any thread count.
YieldReport estimate_yield(const StepProgram& program, const StackTopology& topology,
                           const SpecTable& specs, const ConfigTable& configs,
                           const OutputOracle& oracle, const YieldOptions& options);

/// Input row `row` of the declared inputs (bit i of `row` -> i-th input in
/// name order).
BitMap input_row(const StepProgram& program, std::size_t row);

}  // namespace imp3d
