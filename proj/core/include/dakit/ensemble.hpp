#pragma once

#include <vector>

#include "dakit/field.hpp"

namespace dakit {

/// A set of model states sharing one grid.
struct Ensemble {
  std::vector<StateField> members;

  Ensemble() = default;
  explicit Ensemble(std::vector<StateField> m) : members(std::move(m)) {}

  int size() const { return static_cast<int>(members.size()); }

  StateField mean() const;
  void validate() const; // N >= 2, one grid
};

} // namespace dakit
