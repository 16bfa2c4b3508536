#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "imp3d/device.hpp"

namespace imp3d {

enum class Level { bottom, top };

/// Which terminal of the device faces the middle electrode during a set.
/// `active_away_from_node`: set drop = V(outer) - V(middle).
/// `active_toward_node`:    set drop = V(middle) - V(outer).
enum class Orientation { active_toward_node, active_away_from_node };

enum class Polarity { parallel, anti_parallel };

struct Cell {
  std::string id;
  Level level = Level::bottom;
  std::string spec_ref;
  Orientation orientation = Orientation::active_away_from_node;
  std::string middle;  ///< middle electrode
  std::string outer;   ///< bottom or top electrode
};

/// Cells on two stacked levels, wired through named electrodes. Two cells are
/// adjacent (can take part in one IMP step) iff they share an electrode.
class StackTopology {
 public:
  StackTopology() = default;
  StackTopology(std::vector<Cell> cells, std::set<std::string> unusable);

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const Cell& cell(std::size_t index) const { return cells_.at(index); }
  const Cell& cell(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  ///< throws ConfigError

  const std::set<std::string>& unusable_cells() const noexcept { return unusable_; }
  bool is_usable(std::string_view id) const;
  std::vector<std::string> usable_ids() const;

  /// electrode -> cells attached to it (every electrode, sorted).
  const std::map<std::string, std::vector<std::string>>& electrodes() const noexcept {
    return electrodes_;
  }
  /// Electrodes with two or more cells attached.
  std::map<std::string, std::vector<std::string>> shared_nodes() const;

  std::optional<std::string> common_electrode(std::string_view a, std::string_view b) const;

  /// +1 when the set drop of `cell` is V(other terminal) - V(electrode),
  /// -1 when it is V(electrode) - V(other terminal).
  int orientation_sign(const Cell& cell, std::string_view electrode) const;

  /// Usable cells reachable from each other through shared electrodes.
  bool usable_cells_connected() const;

 private:
  std::vector<Cell> cells_;
  std::set<std::string> unusable_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> electrodes_;
};

struct ResistiveLoad {
  double g_l = 0.0;
  double v_l = 0.0;
};

struct CurrentSourceLoad {
  double i_l = 0.0;  ///< current injected into the common node
};

/// Bias for one IMP step, expressed in the frame of the output device Q:
/// positive voltages/currents push Q's common-node terminal toward its reset
/// side, i.e. a negative v_p and i_l drive a set of Q. The solver maps this to
/// physical electrode potentials through Q's orientation, which is what makes
/// top-output and bottom-output steps share one parameter set up to sign.
struct ImpConfig {
  double v_p = 0.0;
  std::variant<ResistiveLoad, CurrentSourceLoad> load = CurrentSourceLoad{};
  double pulse_duration = 10e-3;  ///< seconds, bookkeeping only

  void validate() const;
  bool is_current_source() const noexcept {
    return std::holds_alternative<CurrentSourceLoad>(load);
  }
};

/// Electrical view of a (P, Q) pair inside a topology.
struct PairGeometry {
  std::size_t p = 0;
  std::size_t q = 0;
  std::string node;  ///< common electrode
  int sign_p = 1;    ///< orientation sign of P relative to `node`
  int sign_q = 1;
  Polarity polarity = Polarity::parallel;
};

/// Throws NotAdjacent if p == q or the cells share no electrode.
PairGeometry resolve_pair(const StackTopology& topology, std::string_view p, std::string_view q);

Polarity pair_polarity(const StackTopology& topology, std::string_view p, std::string_view q);

/// "parallel-bottom", "anti-top", ... : polarity plus output level.
std::string pair_class(const StackTopology& topology, std::string_view p, std::string_view q);

/// "P>Q"
std::string pair_key(std::string_view p, std::string_view q);

/// Four cells (B1, B2, T1, T2) on one middle electrode.
StackTopology build_default_stack();

/// Two stacked 2x2 crossbars sharing middle electrodes M1 and M2: eight
/// positions B1..B4, T1..T4 with B1 and B3 kept permanently OFF.
StackTopology build_adder_stack();

using SpecTable = std::map<std::string, MemristorSpec>;

/// Spec for a cell via its spec_ref; throws ConfigError when missing.
const MemristorSpec& spec_for(const SpecTable& specs, const Cell& cell);

/// Linear device parameters measured on the fabricated four-device stack.
SpecTable measured_device_specs();

/// Per-level specs ("bottom", "top") used by the adder stack.
SpecTable measured_level_specs();

std::string_view to_string(Level level) noexcept;
std::string_view to_string(Polarity polarity) noexcept;
std::string_view to_string(Orientation orientation) noexcept;

}  // namespace imp3d
