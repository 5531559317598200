#pragma once

#include "critflow/functional.hpp"

namespace critflow {

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascending, the
/// k-th column of `eigenvectors` belongs to the k-th eigenvalue.
struct SpectralDecomposition {
  Vec eigenvalues;
  Mat eigenvectors;
  double tol = 0.0;  // kernel tolerance: |mu| <= tol counts as zero

  int negative_count() const;
  int positive_count() const;
  int kernel_count() const;
  /// Orthonormal basis of the span of eigenvectors with mu < -tol (V^-) or mu > tol (V^+).
  Mat negative_space() const;
  Mat positive_space() const;
};

/// Default kernel tolerance 1e-8 (1 + |M|_F).
double default_kernel_tol(const Mat& M);

/// Cyclic Jacobi rotations; sweeps until the off-diagonal Frobenius norm is
/// below rel_tol * |M|_F.
SpectralDecomposition jacobi_eigen(const Mat& M, double kernel_tol = -1.0, double rel_tol = 1e-12,
                                   int max_sweeps = 100);

/// Eigenvalues only (same algorithm).
Vec symmetric_eigenvalues(const Mat& M);

}  // namespace critflow
