#pragma once

#include <string>
#include <vector>

#include "critflow/bifurcate.hpp"
#include "critflow/functional.hpp"
#include "critflow/symmetry.hpp"

namespace critflow::galerkin {

/// rho with its first two derivatives.
struct Nonlinearity {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;

  /// rho(u) = 1 - cos u: rho(0) = rho'(0) = 0, rho''(0) = 1, |rho'| <= 1.
  static Nonlinearity one_minus_cos();
};

/// K(lambda, x) = -kappa(lambda) sum_e rho'(<x, e>) e, the negative gradient
/// of kappa(lambda) sum_e rho(<x, e>). Directions are vectors of the ambient
/// space spanned by `ambient_pairs` interleaved pairs.
struct CompactPerturbationFamily {
  std::vector<Vec> directions;
  Nonlinearity rho = Nonlinearity::one_minus_cos();
  ScalarProfile kappa = ScalarProfile::constant(1.0);
  int ambient_pairs = 0;

  /// Hessian of the perturbation term at the origin in the ambient space.
  Mat origin_hessian(double lambda) const;
  /// Largest |K(lambda, x)| over all x: |kappa| sup|rho'| sum |e|.
  double range_bound(double lambda) const;
};

/// kappa = 1 + lambda on the first `modes` negative basis vectors.
CompactPerturbationFamily rank_demo_perturbation(int modes, int ambient_pairs);
/// One direction w = sum_k 2^(1-k) e_k^- over all ambient pairs, kappa = 1 + lambda.
CompactPerturbationFamily decaying_carrier_perturbation(int ambient_pairs);

/// f_n(lambda, x) = 1/2 <Jx, x> + kappa(lambda) sum_e rho(<x, P_n e>) on H_n
/// (dimension 2n), so that grad f_n = Jx - P_n K(lambda, x). Throws
/// DirectionOutsideTruncation when some direction leaves H_n unless
/// allow_outside is set.
FunctionalFamily truncate(const SymmetryOperator& J, const CompactPerturbationFamily& K, int n,
                          bool allow_outside = false);

struct TruncationRow {
  int n = 0;
  int sign_minus = 0;       // generalized signature of L_-1 on H_n
  int sign_plus = 0;        // generalized signature of L_1 on H_n
  int endpoint_pairs = 0;   // nontrivial pairs found within eps of (+-1, 0)
  double y_terminal = 0.0;  // nontrivial critical value y_n(1) on the tracked branch
  double witness_norm = 0.0;
  bool y_found = false;
};

struct StabilizationReport {
  int stabilization_index = 0;  // N: both endpoint signatures constant from N on
  int sign_minus = 0, sign_plus = 0;
  int spf = 0;                  // (sign L_1 - sign L_-1) / 2
  std::vector<TruncationRow> rows;
  /// |y_n(1) - y_m(1)| for the last row m, aligned with rows.
  std::vector<double> drift;
};

struct StabilizationOptions {
  double endpoint_eps = 0.05;
  int stability_window = 3;
  int jobs = 1;
};

/// Generalized signatures at lambda = +-1 up to the largest n, and for each n
/// of n_range the endpoint scan and the terminal branch value at lambda_probe.
/// The terminal value follows the carrier line: the 1D critical equation is
/// solved for the limit carrier, projected to H_n and refined by Newton.
StabilizationReport stabilization_diagnostics(const SymmetryOperator& J, const CompactPerturbationFamily& K,
                                              double lambda_probe, const std::vector<int>& n_range,
                                              const StabilizationOptions& opts = {});

/// Nontrivial root of u = c sin u in (0, pi) for c > 1; 0 otherwise.
double carrier_root(double c);

struct IndefiniteReport {
  int modes = 0;
  int spf_endpoints = 0, spf_crossings = 0, spf_signature = 0;
  int degree_product = 0;
  StabilizationReport stabilization;
  bifurcate::HypothesisReport hypotheses;
  bifurcate::Classification classification;
  bifurcate::BranchLandmarks landmarks;
  double branch_lambda_min = 0.0;  // smallest lambda of a nontrivial pair on the attached branch
  double branch_lambda_max = 0.0;
  double terminal_value = 0.0;     // smallest nontrivial value at lambda = 1 on the attached branch
  double terminal_oracle = 0.0;    // -t^2/2 + 2 (1 - cos t) with t = 2 sin t
};

struct IndefiniteOptions {
  int slices = 200;
  int jobs = 1;
  std::uint64_t seed = 3;
};

/// f(lambda, x) = 1/2 <Jx, x> + (1 + lambda) sum_{k <= modes} (1 - cos <x, e_k^->) on H_modes.
IndefiniteReport strongly_indefinite_demo(int modes, const IndefiniteOptions& opts = {});

}  // namespace critflow::galerkin
