#pragma once

#include <vector>

#include "critflow/functional.hpp"

namespace critflow {

/// A symmetry J (self-adjoint involution) stored as the diagonal of signs in
/// the interleaved basis e1+, e1-, e2+, e2-, ...; the truncation space H_n is
/// spanned by the first 2n basis vectors, so J(H_n) = H_n for every n.
struct SymmetryOperator {
  std::vector<int> signs;

  static SymmetryOperator interleaved(int pairs);

  int dim() const { return static_cast<int>(signs.size()); }
  int pairs() const { return dim() / 2; }
  Mat matrix(int truncation_pairs = -1) const;
  Vec apply(const Vec& x) const;

  static int plus_index(int k) { return 2 * k; }    // e_{k+1}^+, k zero-based
  static int minus_index(int k) { return 2 * k + 1; }
};

}  // namespace critflow
