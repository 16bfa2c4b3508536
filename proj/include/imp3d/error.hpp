#pragma once

#include <stdexcept>
#include <string>

namespace imp3d {

/// Base class for every error raised by the library. `category()` is the
/// machine-readable tag the CLI reports in its JSON error objects.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

/// Malformed or out-of-range configuration data.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Two cells do not share an electrode, or a cell was paired with itself.
class NotAdjacent : public Error {
 public:
  explicit NotAdjacent(const std::string& what) : Error("not_adjacent", what) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what) : Error("no_convergence", what) {}
};

class ProgramError : public Error {
 public:
  explicit ProgramError(const std::string& what) : Error("program", what) {}
};

class PlacementInfeasible : public Error {
 public:
  explicit PlacementInfeasible(const std::string& what)
      : Error("placement_infeasible", what) {}
};

}  // namespace imp3d
