#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "critflow/functional.hpp"

namespace critflow {

/// Expression trees for user-supplied families and operator paths.
///
/// JSON encoding:
///   3.5                                  constant
///   "lambda"                             the parameter
///   "norm"                               |x|
///   "x0", "x1", ... or {"coord": i}      coordinates
///   {"dot": [v0, v1, ...]}               <x, v>
///   {"op": "+", "args": [e, ...]}        also "-", "*", "/", "pow", "sin", "cos", "exp"
/// A one-argument "-" is negation.
class Expression {
 public:
  static Expression parse(const nlohmann::json& node);

  double operator()(double lambda, const Vec& x) const;
  /// Highest coordinate index referenced, or -1 when x is unused.
  int max_coordinate() const;

  struct Node;

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

/// Loads {"name", "dim", "box": {"lo", "hi"}, "f": expr}. Derivatives are
/// installed by finite differences.
FunctionalFamily family_from_manifest(const nlohmann::json& manifest);
FunctionalFamily family_from_manifest_file(const std::string& path);

}  // namespace critflow
