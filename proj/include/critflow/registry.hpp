#pragma once

#include <functional>
#include <string>
#include <vector>

#include "critflow/functional.hpp"

namespace critflow {

struct FamilyEntry {
  std::string name;
  std::string description;
  std::function<FunctionalFamily()> make;
};

/// Built-in families, in a fixed order.
const std::vector<FamilyEntry>& builtin_families();

/// s(lambda) = 1 - 2 bump(|lambda|), bump = 1 on [0, 0.3] and 0 on [0.7, 1]
/// with a quintic transition: both endpoint slices equal f_-1 of the demo.
ScalarProfile bump_profile();

/// A built-in name, or else a path to a JSON manifest.
FunctionalFamily resolve_family(const std::string& name_or_path);

}  // namespace critflow
