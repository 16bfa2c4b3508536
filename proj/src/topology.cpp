#include "imp3d/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "imp3d/error.hpp"

namespace imp3d {

StackTopology::StackTopology(std::vector<Cell> cells, std::set<std::string> unusable)
    : cells_(std::move(cells)), unusable_(std::move(unusable)) {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.id.empty()) throw ConfigError("topology: cell with empty id");
    if (c.middle.empty() || c.outer.empty())
      throw ConfigError("topology: cell " + c.id + " needs a middle and an outer electrode");
    if (c.middle == c.outer)
      throw ConfigError("topology: cell " + c.id + " has both terminals on one electrode");
    if (!index_.emplace(c.id, i).second) throw ConfigError("topology: duplicate cell id " + c.id);
    electrodes_[c.middle].push_back(c.id);
    electrodes_[c.outer].push_back(c.id);
  }
  for (const auto& id : unusable_) {
    if (!index_.contains(id)) throw ConfigError("topology: unknown unusable cell " + id);
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (std::size_t j = i + 1; j < cells_.size(); ++j) {
      const Cell& a = cells_[i];
      const Cell& b = cells_[j];
      const bool same = (a.middle == b.middle && a.outer == b.outer) ||
                        (a.middle == b.outer && a.outer == b.middle);
      if (same) throw ConfigError("topology: cells " + a.id + " and " + b.id + " are in parallel");
    }
  }
}

const Cell& StackTopology::cell(std::string_view id) const { return cells_[index_of(id)]; }

std::optional<std::size_t> StackTopology::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t StackTopology::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found) throw ConfigError("topology: unknown cell " + std::string(id));
  return *found;
}

bool StackTopology::is_usable(std::string_view id) const {
  return find(id).has_value() && !unusable_.contains(std::string(id));
}

std::vector<std::string> StackTopology::usable_ids() const {
  std::vector<std::string> out;
  for (const auto& c : cells_)
    if (!unusable_.contains(c.id)) out.push_back(c.id);
  return out;
}

std::map<std::string, std::vector<std::string>> StackTopology::shared_nodes() const {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [node, ids] : electrodes_)
    if (ids.size() >= 2) out.emplace(node, ids);
  return out;
}

std::optional<std::string> StackTopology::common_electrode(std::string_view a,
                                                           std::string_view b) const {
  const Cell& ca = cell(a);
  const Cell& cb = cell(b);
  if (ca.id == cb.id) return std::nullopt;
  for (const std::string* e : {&ca.middle, &ca.outer}) {
    if (*e == cb.middle || *e == cb.outer) return *e;
  }
  return std::nullopt;
}

int StackTopology::orientation_sign(const Cell& cell, std::string_view electrode) const {
  const int middle_sign = cell.orientation == Orientation::active_away_from_node ? 1 : -1;
  if (electrode == cell.middle) return middle_sign;
  if (electrode == cell.outer) return -middle_sign;
  throw ConfigError("topology: cell " + cell.id + " is not attached to " + std::string(electrode));
}

bool StackTopology::usable_cells_connected() const {
  const auto ids = usable_ids();
  if (ids.size() <= 1) return true;
  std::set<std::string> seen{ids.front()};
  std::queue<std::string> frontier;
  frontier.push(ids.front());
  while (!frontier.empty()) {
    const std::string cur = frontier.front();
    frontier.pop();
    for (const auto& other : ids) {
      if (seen.contains(other)) continue;
      if (common_electrode(cur, other)) {
        seen.insert(other);
        frontier.push(other);
      }
    }
  }
  return seen.size() == ids.size();
}

void ImpConfig::validate() const {
  if (!std::isfinite(v_p)) throw ConfigError("imp config: v_p must be finite");
  if (const auto* r = std::get_if<ResistiveLoad>(&load)) {
    if (!(r->g_l > 0.0) || !std::isfinite(r->g_l))
      throw ConfigError("imp config: resistive load requires g_l > 0");
    if (!std::isfinite(r->v_l)) throw ConfigError("imp config: v_l must be finite");
  } else if (!std::isfinite(std::get<CurrentSourceLoad>(load).i_l)) {
    throw ConfigError("imp config: i_l must be finite");
  }
  if (pulse_duration < 0.0) throw ConfigError("imp config: negative pulse duration");
}

PairGeometry resolve_pair(const StackTopology& topology, std::string_view p, std::string_view q) {
  if (p == q) throw NotAdjacent("a device cannot implicate itself: " + std::string(p));
  auto node = topology.common_electrode(p, q);
  if (!node)
    throw NotAdjacent("cells " + std::string(p) + " and " + std::string(q) +
                      " share no electrode");
  PairGeometry g;
  g.p = topology.index_of(p);
  g.q = topology.index_of(q);
  g.node = *node;
  g.sign_p = topology.orientation_sign(topology.cell(g.p), g.node);
  g.sign_q = topology.orientation_sign(topology.cell(g.q), g.node);
  g.polarity = g.sign_p == g.sign_q ? Polarity::parallel : Polarity::anti_parallel;
  return g;
}

Polarity pair_polarity(const StackTopology& topology, std::string_view p, std::string_view q) {
  return resolve_pair(topology, p, q).polarity;
}

std::string pair_key(std::string_view p, std::string_view q) {
  std::string k(p);
  k += '>';
  k += q;
  return k;
}

std::string pair_class(const StackTopology& topology, std::string_view p, std::string_view q) {
  const Polarity pol = pair_polarity(topology, p, q);
  const Level level = topology.cell(q).level;
  std::string out = pol == Polarity::parallel ? "parallel-" : "anti-";
  out += level == Level::bottom ? "bottom" : "top";
  return out;
}

StackTopology build_default_stack() {
  std::vector<Cell> cells{
      {"B1", Level::bottom, "B1", Orientation::active_away_from_node, "M", "XB1"},
      {"B2", Level::bottom, "B2", Orientation::active_away_from_node, "M", "XB2"},
      {"T1", Level::top, "T1", Orientation::active_toward_node, "M", "YT1"},
      {"T2", Level::top, "T2", Orientation::active_toward_node, "M", "YT2"},
  };
  return StackTopology(std::move(cells), {});
}

StackTopology build_adder_stack() {
  // Bottom crossbar: rows X1, X2 under columns M1, M2. Top crossbar: rows
  // Y1, Y2 over the same columns.
  constexpr auto away = Orientation::active_away_from_node;
  constexpr auto toward = Orientation::active_toward_node;
  std::vector<Cell> cells{
      {"B1", Level::bottom, "bottom", away, "M1", "X1"},
      {"B2", Level::bottom, "bottom", away, "M2", "X1"},
      {"B3", Level::bottom, "bottom", away, "M1", "X2"},
      {"B4", Level::bottom, "bottom", away, "M2", "X2"},
      {"T1", Level::top, "top", toward, "M1", "Y1"},
      {"T2", Level::top, "top", toward, "M1", "Y2"},
      {"T3", Level::top, "top", toward, "M2", "Y1"},
      {"T4", Level::top, "top", toward, "M2", "Y2"},
  };
  return StackTopology(std::move(cells), {"B1", "B3"});
}

const MemristorSpec& spec_for(const SpecTable& specs, const Cell& cell) {
  auto it = specs.find(cell.spec_ref);
  if (it == specs.end())
    throw ConfigError("no device spec '" + cell.spec_ref + "' for cell " + cell.id);
  return it->second;
}

namespace {

MemristorSpec level_spec(Level level, double g_on, double g_off) {
  MemristorSpec s;
  if (level == Level::bottom) {
    s.v_set_min = 1.1;
    s.v_set_max = 1.9;
  } else {
    s.v_set_min = 0.7;
    s.v_set_max = 1.6;
  }
  // Reset onset and full-reset voltages were only reported for one bottom
  // device; they are reused for every device.
  s.v_reset_min = -1.5;
  s.v_reset_max = -2.2;
  s.g_on = g_on;
  s.g_off = g_off;
  return s;
}

}  // namespace

SpecTable measured_device_specs() {
  return {
      {"B1", level_spec(Level::bottom, 115e-6, 10e-6)},
      {"B2", level_spec(Level::bottom, 115e-6, 10e-6)},
      {"T1", level_spec(Level::top, 125e-6, 5e-6)},
      {"T2", level_spec(Level::top, 120e-6, 8e-6)},
  };
}

SpecTable measured_level_specs() {
  return {
      {"bottom", level_spec(Level::bottom, 115e-6, 10e-6)},
      {"top", level_spec(Level::top, 120e-6, 8e-6)},
  };
}

std::string_view to_string(Level level) noexcept {
  return level == Level::bottom ? "bottom" : "top";
}

std::string_view to_string(Polarity polarity) noexcept {
  return polarity == Polarity::parallel ? "parallel" : "anti_parallel";
}

std::string_view to_string(Orientation orientation) noexcept {
  return orientation == Orientation::active_toward_node ? "active_toward_node"
                                                        : "active_away_from_node";
}

}  // namespace imp3d
