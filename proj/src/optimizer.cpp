#include "imp3d/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "imp3d/kernels.hpp"

namespace imp3d {

namespace {

constexpr std::array<const char*, 4> kStatePrefix = {"p0q0.", "p0q1.", "p1q0.", "p1q1."};
constexpr std::size_t kSlacksPerPair = 12;

struct PairContext {
  PairGeometry geometry;
  std::string label;  // "P>Q"
  const MemristorSpec* p_spec = nullptr;
  const MemristorSpec* q_spec = nullptr;
  bool linear = false;
  kernels::LinearPair kernel;
};

/// Twelve slacks in a fixed order: for each (p, q) initial state in
/// kStatePrefix order: q_set|q_hold, p_set, p_reset.
void pair_slacks(const PairContext& ctx, const ImpConfig& config, const SolverOptions& options,
                 double* out) {
  std::size_t k = 0;
  for (int sp = 0; sp < 2; ++sp) {
    for (int sq = 0; sq < 2; ++sq) {
      const DeviceState ps = sp ? DeviceState::on() : DeviceState::off();
      const DeviceState qs = sq ? DeviceState::on() : DeviceState::off();
      const auto sol = solve_circuit(
          make_pair_circuit(ctx.geometry, *ctx.p_spec, ps, *ctx.q_spec, qs, config), options);
      out[k++] = (sp == 0 && sq == 0) ? sol.drop_q - ctx.q_spec->v_set_max
                                      : ctx.q_spec->v_set_min - sol.drop_q;
      out[k++] = ctx.p_spec->v_set_min - sol.drop_p;
      out[k++] = sol.drop_p - ctx.p_spec->v_reset_min;
    }
  }
}

// pair_slacks orders states (0,0),(0,1),(1,0),(1,1); kStatePrefix matches.
static_assert(kStatePrefix.size() * 3 == kSlacksPerPair);

ImpConfig make_config(const LoadSpec& load, double v_p, double drive) {
  ImpConfig c;
  c.v_p = v_p;
  if (load.kind == LoadKind::resistive)
    c.load = ResistiveLoad{load.g_l, drive};
  else
    c.load = CurrentSourceLoad{drive};
  return c;
}

class Objective {
 public:
  Objective(std::vector<PairContext> pairs, LoadSpec load, const OptimizerOptions& options)
      : pairs_(std::move(pairs)), load_(load), options_(options) {}

  std::size_t evaluations() const noexcept { return evaluations_; }
  std::size_t slack_count() const noexcept { return pairs_.size() * kSlacksPerPair; }

  /// Joint margin at every (v_p[i], drive[i]).
  void batch(std::span<const double> v_p, std::span<const double> drive, std::span<double> out) {
    std::fill(out.begin(), out.end(), std::numeric_limits<double>::infinity());
    scratch_.resize(out.size());
    for (const auto& ctx : pairs_) {
      if (ctx.linear && options_.use_simd_kernels) {
        kernels::min_slack(ctx.kernel, v_p, drive, scratch_);
      } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
          std::array<double, kSlacksPerPair> s{};
          pair_slacks(ctx, make_config(load_, v_p[i], drive[i]), options_.solver, s.data());
          scratch_[i] = *std::min_element(s.begin(), s.end());
        }
      }
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], scratch_[i]);
    }
    evaluations_ += out.size();
  }

  /// All slacks of all pairs at one point.
  std::vector<double> slacks(double v_p, double drive) {
    std::vector<double> s(slack_count());
    const ImpConfig config = make_config(load_, v_p, drive);
    for (std::size_t k = 0; k < pairs_.size(); ++k)
      pair_slacks(pairs_[k], config, options_.solver, s.data() + k * kSlacksPerPair);
    ++evaluations_;
    return s;
  }

  double margin(double v_p, double drive) {
    const auto s = slacks(v_p, drive);
    return *std::min_element(s.begin(), s.end());
  }

 private:
  std::vector<PairContext> pairs_;
  LoadSpec load_;
  const OptimizerOptions& options_;
  std::vector<double> scratch_;
  std::size_t evaluations_ = 0;
};

struct Point {
  double v_p = 0.0;
  double drive = 0.0;
  double margin = -std::numeric_limits<double>::infinity();
};

/// Best point of an n x n grid centred on (cv, cd) with half-widths (hv, hd).
/// Ties keep the lexicographically smallest (v_p, drive).
Point grid_search(Objective& f, int n, double cv, double hv, double cd, double hd) {
  const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  std::vector<double> vps(count);
  std::vector<double> drives(count);
  std::vector<double> out(count);
  const auto axis = [n](double c, double h, int i) {
    return n == 1 ? c : c - h + 2.0 * h * i / (n - 1);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(j);
      vps[k] = axis(cv, hv, i);
      drives[k] = axis(cd, hd, j);
    }
  }
  f.batch(vps, drives, out);
  Point best;
  for (std::size_t k = 0; k < count; ++k) {
    if (out[k] > best.margin) best = {vps[k], drives[k], out[k]};
  }
  return best;
}

/// Solves a 3x3 system in place by Gaussian elimination with partial pivoting.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3>& b) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (int r = c + 1; r < 3; ++r) {
      const double m = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= m * a[c][k];
      b[r] -= m * b[c];
    }
  }
  for (int c = 2; c >= 0; --c) {
    double s = b[c];
    for (int k = c + 1; k < 3; ++k) s -= a[c][k] * b[k];
    b[c] = s / a[c][c];
  }
  return std::isfinite(b[0]) && std::isfinite(b[1]) && std::isfinite(b[2]);
}

/// Refines `best` by locating the point where three slacks are equal (a
/// vertex of the max-min problem). Tries every triple among the six smallest
/// slacks at the incumbent and keeps the best improvement.
Point polish(Objective& f, Point best, double v_scale, double d_scale) {
  const auto s0 = f.slacks(best.v_p, best.drive);
  std::vector<std::size_t> order(s0.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s0[a] < s0[b]; });
  const std::size_t k = std::min<std::size_t>(6, order.size());

  const auto eval = [&](double x, double y) { return f.slacks(x * v_scale, y * d_scale); };
  const double h = 1e-6;
  Point result = best;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      for (std::size_t c = b + 1; c < k; ++c) {
        const std::array<std::size_t, 3> idx = {order[a], order[b], order[c]};
        double x = best.v_p / v_scale;
        double y = best.drive / d_scale;
        double m = best.margin;
        bool ok = true;
        for (int it = 0; it < 30 && ok; ++it) {
          const auto s = eval(x, y);
          const auto sxp = eval(x + h, y);
          const auto sxm = eval(x - h, y);
          const auto syp = eval(x, y + h);
          const auto sym = eval(x, y - h);
          std::array<std::array<double, 3>, 3> jac{};
          std::array<double, 3> rhs{};
          for (int r = 0; r < 3; ++r) {
            const std::size_t i = idx[static_cast<std::size_t>(r)];
            jac[r][0] = (sxp[i] - sxm[i]) / (2.0 * h);
            jac[r][1] = (syp[i] - sym[i]) / (2.0 * h);
            jac[r][2] = -1.0;
            rhs[r] = -(s[i] - m);
          }
          if (!solve3(jac, rhs)) {
            ok = false;
            break;
          }
          x += rhs[0];
          y += rhs[1];
          m += rhs[2];
          if (std::abs(x) > 100.0 || std::abs(y) > 100.0) ok = false;
          if (std::abs(rhs[0]) < 1e-14 && std::abs(rhs[1]) < 1e-14) break;
        }
        if (!ok) continue;
        const auto s = eval(x, y);
        const double margin = *std::min_element(s.begin(), s.end());
        if (margin > result.margin) result = {x * v_scale, y * d_scale, margin};
      }
    }
  }
  return result;
}

std::vector<PairContext> make_contexts(const StackTopology& topology,
                                       const std::vector<PairRef>& pairs,
                                       const SpecTable& specs, const LoadSpec& load) {
  std::vector<PairContext> out;
  for (const auto& pr : pairs) {
    PairContext ctx;
    ctx.geometry = resolve_pair(topology, pr.p, pr.q);
    ctx.label = pair_key(pr.p, pr.q);
    ctx.p_spec = &spec_for(specs, topology.cell(ctx.geometry.p));
    ctx.q_spec = &spec_for(specs, topology.cell(ctx.geometry.q));
    ctx.p_spec->validate();
    ctx.q_spec->validate();
    ctx.linear = ctx.p_spec->is_linear() && ctx.q_spec->is_linear();
    auto& k = ctx.kernel;
    k.g_p_off = ctx.p_spec->g_off;
    k.g_p_on = ctx.p_spec->g_on;
    k.g_q_off = ctx.q_spec->g_off;
    k.g_q_on = ctx.q_spec->g_on;
    k.g_l = load.kind == LoadKind::resistive ? load.g_l : 0.0;
    k.p_sign = static_cast<double>(ctx.geometry.sign_p * ctx.geometry.sign_q);
    k.q_set_min = ctx.q_spec->v_set_min;
    k.q_set_max = ctx.q_spec->v_set_max;
    k.p_set_min = ctx.p_spec->v_set_min;
    k.p_reset_min = ctx.p_spec->v_reset_min;
    out.push_back(std::move(ctx));
  }
  return out;
}

}  // namespace

SlackBreakdown evaluate_margin(const StackTopology& topology, std::string_view p,
                               std::string_view q, const ImpConfig& config,
                               const MemristorSpec& p_spec, const MemristorSpec& q_spec,
                               const SolverOptions& options) {
  config.validate();
  PairContext ctx;
  ctx.geometry = resolve_pair(topology, p, q);
  ctx.p_spec = &p_spec;
  ctx.q_spec = &q_spec;
  std::array<double, kSlacksPerPair> s{};
  pair_slacks(ctx, config, options, s.data());
  SlackBreakdown out;
  std::size_t k = 0;
  for (int state = 0; state < 4; ++state) {
    const std::string prefix = kStatePrefix[static_cast<std::size_t>(state)];
    out[prefix + (state == 0 ? "q_set" : "q_hold")] = s[k++];
    out[prefix + "p_set"] = s[k++];
    out[prefix + "p_reset"] = s[k++];
  }
  return out;
}

double margin_of(const SlackBreakdown& slacks) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [id, v] : slacks) m = std::min(m, v);
  return m;
}

OptimizationResult optimize(const StackTopology& topology, const std::vector<PairRef>& pairs,
                            const SpecTable& specs, const LoadSpec& load,
                            const OptimizerOptions& options) {
  if (pairs.empty()) throw ConfigError("optimize: no (p, q) pairs given");
  if (load.kind == LoadKind::resistive && !(load.g_l > 0.0))
    throw ConfigError("optimize: resistive load requires g_l > 0");
  if (options.grid_points < 2 || options.refine_rounds < 0 || !(options.shrink > 1.0))
    throw ConfigError("optimize: invalid grid options");

  auto contexts = make_contexts(topology, pairs, specs, load);
  double v_scale = 0.0;
  double g_scale = 0.0;
  double g_low = std::numeric_limits<double>::infinity();
  for (const auto& ctx : contexts) {
    v_scale = std::max({v_scale, ctx.p_spec->v_star(), ctx.q_spec->v_star()});
    g_scale = std::max({g_scale, ctx.p_spec->g_on, ctx.q_spec->g_on});
    g_low = std::min({g_low, ctx.p_spec->g_off, ctx.q_spec->g_off});
  }
  auto drive_half = [&](double g) {
    return load.kind == LoadKind::resistive ? 4.0 * v_scale * std::max(1.0, g / load.g_l)
                                            : 4.0 * v_scale * g;
  };
  const double v_half = 2.0 * v_scale;
  const double d_half = drive_half(g_scale);

  // High ON/OFF ratios leave a feasible drive band of OFF-conductance width,
  // which the ON-scaled grid can step over; search a second, OFF-scaled window.
  Objective f(std::move(contexts), load, options);
  Point best{0.0, 0.0, -std::numeric_limits<double>::infinity()};
  for (const double d0 : {d_half, drive_half(g_low)}) {
    Point local = grid_search(f, options.grid_points, 0.0, v_half, 0.0, d0);
    double hv = v_half;
    double hd = d0;
    for (int r = 0; r < options.refine_rounds; ++r) {
      hv /= options.shrink;
      hd /= options.shrink;
      const Point p = grid_search(f, options.grid_points, local.v_p, hv, local.drive, hd);
      if (p.margin > local.margin) local = p;
    }
    if (local.margin > best.margin) best = local;
    if (!(d0 > drive_half(g_low))) break;
  }
  if (options.polish) best = polish(f, best, v_scale, d_half);

  OptimizationResult result;
  result.best_config = make_config(load, best.v_p, best.drive);
  result.evaluations = f.evaluations();
  for (const auto& pr : pairs) {
    const auto& p_spec = spec_for(specs, topology.cell(pr.p));
    const auto& q_spec = spec_for(specs, topology.cell(pr.q));
    for (const auto& [id, v] :
         evaluate_margin(topology, pr.p, pr.q, result.best_config, p_spec, q_spec,
                         options.solver))
      result.slack_breakdown[pair_key(pr.p, pr.q) + ":" + id] = v;
  }
  result.margin = margin_of(result.slack_breakdown);
  if (std::abs(result.margin) <= options.tie_tolerance * v_scale) {
    result.boundary = true;
    result.margin = 0.0;
  }
  if (options.require_feasible && (result.margin < 0.0 || result.boundary)) {
    std::ostringstream msg;
    msg << "no bias point with positive margin (best margin " << result.margin << " V)";
    throw Infeasible(msg.str(), std::move(result));
  }
  return result;
}

namespace {

DerivedConfigs derive_grouped(const StackTopology& topology, const SpecTable& specs,
                              const std::map<std::string, std::vector<PairRef>>& classes,
                              const LoadSpec& load, DeriveMode mode,
                              const OptimizerOptions& options) {
  SpecTable effective = specs;
  if (mode == DeriveMode::nominal) {
    for (auto& [name, spec] : effective) spec = without_set_variation(spec);
  }

  OptimizerOptions opts = options;
  opts.require_feasible = false;
  DerivedConfigs out;
  for (const auto& [name, members] : classes) {
    auto r = optimize(topology, members, effective, load, opts);
    out.configs[name] = r.best_config;
    out.margins[name] = r.margin;
  }
  return out;
}

}  // namespace

DerivedConfigs derive_class_configs(const StackTopology& topology, const SpecTable& specs,
                                    const std::vector<PairRef>& pairs, const LoadSpec& load,
                                    DeriveMode mode, const OptimizerOptions& options) {
  std::map<std::string, std::vector<PairRef>> classes;
  for (const auto& pr : pairs) classes[pair_class(topology, pr.p, pr.q)].push_back(pr);
  return derive_grouped(topology, specs, classes, load, mode, options);
}

DerivedConfigs derive_pair_configs(const StackTopology& topology, const SpecTable& specs,
                                   const std::vector<PairRef>& pairs, const LoadSpec& load,
                                   DeriveMode mode, const OptimizerOptions& options) {
  std::map<std::string, std::vector<PairRef>> groups;
  for (const auto& pr : pairs) groups[pair_key(pr.p, pr.q)] = {pr};
  return derive_grouped(topology, specs, groups, load, mode, options);
}

}  // namespace imp3d
