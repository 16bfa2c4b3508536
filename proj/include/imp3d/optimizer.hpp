#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "imp3d/error.hpp"
#include "imp3d/solver.hpp"
#include "imp3d/topology.hpp"

namespace imp3d {

/// Slack id -> volts. Ids look like "p0q0.q_set", "p1q0.q_hold",
/// "p0q1.p_set", "p1q1.p_reset" (p/q digits are the initial logic states).
using SlackBreakdown = std::map<std::string, double>;

/// The twelve IMP correctness slacks for one (P, Q) pair under `config`:
/// Q must set from (OFF, OFF), must not set otherwise, and P must stay
/// between its reset onset and set minimum in every state combination.
SlackBreakdown evaluate_margin(const StackTopology& topology, std::string_view p,
                               std::string_view q, const ImpConfig& config,
                               const MemristorSpec& p_spec, const MemristorSpec& q_spec,
                               const SolverOptions& options = {});

/// Smallest slack; the symmetric voltage margin of the step.
double margin_of(const SlackBreakdown& slacks);

enum class LoadKind { current_source, resistive };

struct LoadSpec {
  LoadKind kind = LoadKind::current_source;
  double g_l = 0.0;  ///< resistive only

  static LoadSpec current_source() { return {}; }
  static LoadSpec resistive(double g_l) { return {LoadKind::resistive, g_l}; }
};

struct PairRef {
  std::string p;
  std::string q;
};

struct OptimizerOptions {
  int grid_points = 41;       ///< per axis, coarse and refinement grids
  int refine_rounds = 3;
  double shrink = 5.0;        ///< box shrink factor per refinement round
  bool polish = true;         ///< solve the active-constraint vertex after the grid
  bool require_feasible = true;
  double tie_tolerance = 1e-12;  ///< relative to v_star
  bool use_simd_kernels = true;  ///< batched kernels for all-linear pairs
  SolverOptions solver;
};

struct OptimizationResult {
  ImpConfig best_config;
  double margin = 0.0;
  SlackBreakdown slack_breakdown;  ///< "<p>><q>:<slack id>" for every pair
  std::size_t evaluations = 0;
  bool boundary = false;  ///< |margin| within tie tolerance: strict inequalities unmet
};

/// No bias point satisfies the inequalities with positive margin.
class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, OptimizationResult result)
      : Error("infeasible", what), result_(std::move(result)) {}
  const OptimizationResult& result() const noexcept { return result_; }

 private:
  OptimizationResult result_;
};

/// Maximizes the joint margin (minimum over all `pairs`) of one shared config.
/// Coarse grid over v_p in [-2 v*, 2 v*] and drive in [-4 v* g_on, 4 v* g_on]
/// (or the equivalent load voltage), shrinking refinement grids around the
/// incumbent, then an active-set vertex solve. Throws Infeasible when the best
/// margin is negative or a tie and options.require_feasible is set.
OptimizationResult optimize(const StackTopology& topology, const std::vector<PairRef>& pairs,
                            const SpecTable& specs, const LoadSpec& load,
                            const OptimizerOptions& options = {});

/// Which specs to optimize against when deriving program configs.
enum class DeriveMode {
  nominal,     ///< set ranges collapsed to their midpoint (zero variation)
  worst_case,  ///< full threshold ranges
};

struct DerivedConfigs {
  std::map<std::string, ImpConfig> configs;  ///< keyed by pair_class() or pair_key()
  std::map<std::string, double> margins;
};

/// One config per pair class present among `pairs`, each jointly optimized
/// over the pairs of that class. Never throws Infeasible.
DerivedConfigs derive_class_configs(const StackTopology& topology, const SpecTable& specs,
                                    const std::vector<PairRef>& pairs, const LoadSpec& load,
                                    DeriveMode mode, const OptimizerOptions& options = {});

/// One config per ordered pair, keyed "P>Q". Never throws Infeasible.
DerivedConfigs derive_pair_configs(const StackTopology& topology, const SpecTable& specs,
                                   const std::vector<PairRef>& pairs, const LoadSpec& load,
                                   DeriveMode mode, const OptimizerOptions& options = {});

}  // namespace imp3d
