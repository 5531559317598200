#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "critflow/critical_points.hpp"
#include "critflow/functional.hpp"
#include "critflow/plane.hpp"
#include "critflow/topology.hpp"

namespace critflow::bifurcate {

enum class PairKind { Trivial, NonTrivial };

/// A point (lambda, y) of the critical-pair set with the critical point that
/// realizes it.
struct CriticalPair {
  double lambda = 0.0;
  double y = 0.0;
  Vec witness;
  double grad_norm = 0.0;
  double slope = 0.0;  // df/dlambda at the witness, the branch slope dy/dlambda
  PairKind kind = PairKind::NonTrivial;
  int slice = 0;
  int component = -1;  // -1 for trivial pairs not linked to any branch
};

struct ScanOptions {
  double lambda_lo = -1.0;
  double lambda_hi = 1.0;
  int slices = 400;
  double window = 10.0;          // R of the window [lo, hi] x [-R, R]
  std::vector<Vec> seeds;        // empty: ring_seeds(dim)
  NewtonOptions newton;
  double trivial_radius = 1e-5;
  double value_tol = 1e-8;
  bool strict_window = true;     // throw WindowTooSmall when a branch reaches |y| >= R
  int jobs = 1;
};

struct Component {
  int id = 0;
  std::vector<std::size_t> members;  // indices into BranchSet::pairs (nontrivial and linked trivial)
  double lambda_min = 0.0, lambda_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool touches_trivial = false;  // linked to a trivial pair, so part of the component of Z_in
  bool touches_window = false;   // a member has |y| >= R
  std::size_t nontrivial = 0;
};

/// Sampled critical pairs with branch components under the linking relation.
struct BranchSet {
  std::vector<CriticalPair> pairs;                       // sorted by (slice, y)
  std::vector<Component> components;                     // nontrivial components
  std::vector<std::pair<std::size_t, std::size_t>> links;
  std::vector<double> lambdas;
  double step = 0.0;
  double window = 0.0;
  ScanOptions options;
  int dropped_seeds = 0;

  std::size_t nontrivial_count() const;
};

/// Slices f_lambda on a uniform lambda grid, finds critical points from the
/// seeds, maps them to pairs, deduplicates values per slice, and links pairs
/// of the same or adjacent slices with |dy| <= 2 dlambda (1 + max slope).
BranchSet scan_critical_pairs(const FunctionalFamily& family, const ScanOptions& opts = {});

struct Landmark {
  double lambda = 0.0;
  double y = 0.0;
  double witness_norm = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;  // slice bracket before refinement
};

struct BranchLandmarks {
  std::vector<Landmark> bifurcations;   // meeting the trivial line with vanishing witness
  std::vector<Landmark> folds;          // turning points in lambda
  std::vector<Landmark> zero_crossings; // value branch crossing y = 0 away from the origin
  std::vector<Landmark> terminal;       // pairs at the last slice, ascending y
};

BranchLandmarks landmarks(const FunctionalFamily& family, const BranchSet& branch, const Component& comp);

enum class Alternative { IntersectsLambdaBoundary, UnboundedInWindow, Neither, NoBranch };

std::string to_string(Alternative a);

/// Pure classification of one component against the window of its scan.
Alternative classify_component(const BranchSet& branch, const Component& comp);

struct Classification {
  Alternative overall = Alternative::NoBranch;
  std::vector<Alternative> per_component;  // aligned with branch.components
  BranchSet branch;                        // the final scan (window possibly enlarged)
  int window_doublings = 0;
};

/// Scans, and while a branch reaches the window edge doubles R (at most 3
/// times). The overall verdict concerns the components attached to the
/// trivial line: IntersectsLambdaBoundary if any reaches lambda = lo or hi,
/// else UnboundedInWindow if any still reaches |y| = R, else Neither;
/// NoBranch when there is no nontrivial pair at all.
Classification classify_alternatives(const FunctionalFamily& family, ScanOptions opts);

struct HypothesisConfig {
  double value_bound = 10.0;   // N: values are restricted to [-N, N]
  int ps_starts = 64;
  int partf_samples = 20000;
  double endpoint_eps = 0.05;  // radius of the balls around (+-1, 0)
  double pair_eps = 0.05;      // sublevel pair (f^eps, f^-eps)
  topology::GridParams grid;
  std::uint64_t seed = 3;
  int jobs = 1;
};

struct HypothesisReport {
  bool ps_ok = false;
  bool partf_bounded_ok = false;
  bool nonbif_endpoints_ok = false;
  bool pair_inequivalent_ok = false;

  // Evidence.
  int ps_sequences = 0;
  int ps_escaping = 0;              // sequences with vanishing gradient leaving every bounded set
  double ps_worst_norm = 0.0;       // largest |x| reached by a small-gradient sequence
  std::vector<double> partf_sup;    // sup |df/dlambda| on {|f| <= N} at box scales 1, 2, 4
  int endpoint_nontrivial = 0;      // nontrivial pairs found within eps of (+-1, 0)
  double endpoint_closest = 0.0;    // smallest |y| of a nontrivial pair near lambda = +-1
  std::string pair_method;          // "homology" or "morse"
  topology::BettiVector betti_minus, betti_plus;
  int morse_minus = -1, morse_plus = -1;
  std::string pair_detail;

  bool all() const { return ps_ok && partf_bounded_ok && nonbif_endpoints_ok && pair_inequivalent_ok; }
};

HypothesisReport verify_hypotheses(const FunctionalFamily& family, const HypothesisConfig& cfg = {});

/// Level curves a(lambda) < 0 < b(lambda) that avoid every sampled critical
/// value, equal -eps and eps near lambda = +-1 and enclose the components
/// attached to the trivial line. None when such a component reaches
/// lambda = +-1 or the envelope would meet another critical value.
struct SeparatingCurves {
  ScalarProfile a;
  ScalarProfile b;
  double plateau_lo = 0.0, plateau_hi = 0.0;
  double depth_a = 0.0, height_b = 0.0;
};

std::optional<SeparatingCurves> separating_curves(const BranchSet& branch, double eps);

/// Rasterizes the branch into D+ = [lo, hi] x [0, R] and D- (mirrored) and
/// runs component_or_curve on each. The side segments above eps count as
/// part of the far side, so a Component certifies a branch from the trivial
/// line to lambda = +-1 or |y| = R, while curves on both sides certify that
/// the sampled branch is enclosed.
struct GlobalCertificate {
  plane::RectGrid upper_grid, lower_grid;
  plane::Separation upper, lower;
  bool global_branch = false;
};

GlobalCertificate global_branch_certificate(const BranchSet& branch, double eps, int rows = 0);

struct EversionReport {
  int spf_endpoints = 0;
  int spf_crossings = 0;
  int spf_signature = 0;
  int degree_product = 0;       // product of the local degrees of grad f at 0 for lambda = -1, 1
  int morse_minus = 0;
  int morse_plus = 0;
  double circle_radius = 0.0;
  double circle_radius_spread = 0.0;
  double circle_value = 0.0;
  int circle_points = 0;
  BranchLandmarks landmarks;
  Alternative classification = Alternative::NoBranch;
  topology::BettiVector betti_minus, betti_plus;
  std::string pair_verdict;
  BranchSet branch;
};

struct EversionOptions {
  int slices = 400;
  double grid_h = 0.01;
  double eps = 0.05;
  int jobs = 1;
};

EversionReport demo_eversion_report(const EversionOptions& opts = {});

}  // namespace critflow::bifurcate
