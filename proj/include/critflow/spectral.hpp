#pragma once

#include <functional>
#include <vector>

#include "critflow/eigen_sym.hpp"
#include "critflow/functional.hpp"
#include "critflow/symmetry.hpp"

namespace critflow::spectral {

/// A continuous path lambda -> symmetric matrix on [a, b], sampled on a
/// uniform grid of `samples` points.
struct SymOperatorPath {
  int dim = 0;
  std::function<Mat(double)> at;
  double a = -1.0;
  double b = 1.0;
  int samples = 201;

  double grid_point(int i) const { return a + (b - a) * i / (samples - 1); }
};

/// lambda -> hess f(lambda, 0), the linearization along the trivial branch.
SymOperatorPath hessian_path(const FunctionalFamily& family, double a = -1.0, double b = 1.0,
                             int samples = 201);

/// Counts eigenvalues below -tol. Throws DegenerateOperator when an eigenvalue
/// lies in [-tol, tol] unless kernel_ok. A negative tol selects the default.
int morse_index(const Mat& M, double tol = -1.0, bool kernel_ok = false);

/// sign M = mu(-M) - mu(M).
int signature(const Mat& M, double tol = -1.0);

/// dim(V^-(La) ∩ V^+(Lb)) - dim(V^-(Lb) ∩ V^+(La)), with intersection
/// dimensions read off the principal angles between the eigenspaces.
int spectral_flow_endpoints(const Mat& La, const Mat& Lb, double tol = -1.0);

/// Dimension of the intersection of the column spans of two orthonormal bases.
int intersection_dimension(const Mat& Qa, const Mat& Qb, double angle_tol = 1e-9);

struct Crossing {
  double lambda = 0.0;
  int direction = 0;  // +1: an eigenvalue moves from negative to positive
};

struct CrossingResult {
  int spf = 0;
  std::vector<Crossing> crossings;
  int intervals_examined = 0;
};

/// Counts signed eigenvalue zero-crossings along the sampled path, bisecting
/// every interval whose eigenvalues come within the Weyl perturbation bound of
/// zero until the crossing eigenvalues are isolated.
CrossingResult spectral_flow_crossings(const SymOperatorPath& path, double tol = -1.0,
                                       int jobs = 1, double min_step = 1e-9);

struct GeneralizedSignature {
  int value = 0;
  int stabilization_index = 0;  // N: sign L_n is constant for N <= n <= n_max
  std::vector<int> history;     // sign L_n for n = 1..n_max (0 where L_n is singular)
};

/// sign(P_n (J + K)|H_n) for n = 1..n_max; returns the eventual value once it
/// has been constant for at least `stability_window` consecutive n up to n_max.
GeneralizedSignature generalized_signature(const SymmetryOperator& J, const Mat& K, int n_max,
                                           int stability_window);

/// (sign_J(Lb) - sign_J(La)) / 2 after embedding both matrices in a
/// J-balanced space padded with `tail_pairs` unperturbed pairs.
int spectral_flow_signature(const Mat& La, const Mat& Lb, int tail_pairs = 3);

struct DegreeRelationReport {
  int spf = 0;
  int det_sign_a = 0;
  int det_sign_b = 0;
  int lhs = 0;  // (-1)^spf
  int rhs = 0;  // sign det La * sign det Lb
  bool holds = false;
};

DegreeRelationReport degree_relation_check(const SymOperatorPath& path, double tol = -1.0);

/// Sign of the determinant via LU, independent of the eigen-solver.
int determinant_sign(const Mat& M);

/// max_i |at(l_{i+1}) - at(l_i)|_F on a uniform grid of `samples` points.
double path_variation(const SymOperatorPath& path, int samples);

struct EigenTrace {
  std::vector<double> lambda;
  std::vector<Vec> eigenvalues;
};

EigenTrace eigenvalue_trace(const SymOperatorPath& path, int jobs = 1);

}  // namespace critflow::spectral
