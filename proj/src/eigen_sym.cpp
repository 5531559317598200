#include "critflow/eigen_sym.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "critflow/error.hpp"

namespace critflow {

int SpectralDecomposition::negative_count() const {
  return static_cast<int>((eigenvalues.array() < -tol).count());
}

int SpectralDecomposition::positive_count() const {
  return static_cast<int>((eigenvalues.array() > tol).count());
}

int SpectralDecomposition::kernel_count() const {
  return static_cast<int>(eigenvalues.size()) - negative_count() - positive_count();
}

Mat SpectralDecomposition::negative_space() const {
  const int k = negative_count();
  return eigenvectors.leftCols(k);
}

Mat SpectralDecomposition::positive_space() const {
  const int k = positive_count();
  return eigenvectors.rightCols(k);
}

double default_kernel_tol(const Mat& M) { return 1e-8 * (1.0 + M.norm()); }

SpectralDecomposition jacobi_eigen(const Mat& M, double kernel_tol, double rel_tol, int max_sweeps) {
  require(M.rows() == M.cols(), "matrix must be square");
  const Eigen::Index n = M.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(M(i, j))) fail(ErrorCode::NonFiniteValue, "matrix has non-finite entries");
    }
  }
  Mat A = 0.5 * (M + M.transpose());
  Mat V = Mat::Identity(n, n);
  const double scale = A.norm();
  const double target = rel_tol * scale;

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * A(p, q) * A(p, q);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off_norm() > target; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return A(a, a) < A(b, b); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = A(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = V.col(order[static_cast<std::size_t>(k)]);
  }
  out.tol = kernel_tol >= 0.0 ? kernel_tol : default_kernel_tol(M);
  return out;
}

Vec symmetric_eigenvalues(const Mat& M) { return jacobi_eigen(M).eigenvalues; }

}  // namespace critflow
