#include "critflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/LU>

#include "critflow/error.hpp"
#include "critflow/parallel.hpp"

namespace critflow {

SymmetryOperator SymmetryOperator::interleaved(int pairs) {
  require(pairs >= 1, "symmetry needs at least one pair");
  SymmetryOperator J;
  J.signs.resize(static_cast<std::size_t>(2 * pairs));
  for (int k = 0; k < pairs; ++k) {
    J.signs[static_cast<std::size_t>(plus_index(k))] = 1;
    J.signs[static_cast<std::size_t>(minus_index(k))] = -1;
  }
  return J;
}

Mat SymmetryOperator::matrix(int truncation_pairs) const {
  const int n = truncation_pairs < 0 ? dim() : 2 * truncation_pairs;
  require(n <= dim(), "truncation exceeds the symmetry dimension");
  Mat M = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) M(i, i) = signs[static_cast<std::size_t>(i)];
  return M;
}

Vec SymmetryOperator::apply(const Vec& x) const {
  require(x.size() <= dim(), "vector exceeds the symmetry dimension");
  Vec y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] *= signs[static_cast<std::size_t>(i)];
  return y;
}

}  // namespace critflow

namespace critflow::spectral {

namespace {

double resolve_tol(const Mat& M, double tol) { return tol >= 0.0 ? tol : default_kernel_tol(M); }

void require_invertible(const SpectralDecomposition& sd, const char* what) {
  if (sd.kernel_count() > 0) {
    fail(ErrorCode::DegenerateOperator, std::string(what) + " has an eigenvalue within tolerance of zero");
  }
}

struct Sample {
  double lambda = 0.0;
  Mat matrix;
  Vec eigenvalues;
  double tol = 0.0;
  int morse = 0;
  bool singular = false;
};

Sample take_sample(const SymOperatorPath& path, double lambda, double tol) {
  Sample s;
  s.lambda = lambda;
  s.matrix = path.at(lambda);
  s.tol = resolve_tol(s.matrix, tol);
  const auto sd = jacobi_eigen(s.matrix, s.tol);
  s.eigenvalues = sd.eigenvalues;
  s.morse = sd.negative_count();
  s.singular = sd.kernel_count() > 0;
  return s;
}

}  // namespace

SymOperatorPath hessian_path(const FunctionalFamily& family, double a, double b, int samples) {
  SymOperatorPath p;
  p.dim = family.dim;
  p.at = [family](double lambda) { return family.hessian_at_origin(lambda); };
  p.a = a;
  p.b = b;
  p.samples = samples;
  return p;
}

int morse_index(const Mat& M, double tol, bool kernel_ok) {
  const auto sd = jacobi_eigen(M, resolve_tol(M, tol));
  if (!kernel_ok) require_invertible(sd, "operator");
  return sd.negative_count();
}

int signature(const Mat& M, double tol) {
  const auto sd = jacobi_eigen(M, resolve_tol(M, tol));
  require_invertible(sd, "operator");
  return sd.positive_count() - sd.negative_count();
}

int intersection_dimension(const Mat& Qa, const Mat& Qb, double angle_tol) {
  if (Qa.cols() == 0 || Qb.cols() == 0) return 0;
  const Mat C = Qa.transpose() * Qb;
  // Squared cosines of the principal angles; an angle of zero is a shared direction.
  const Vec cos2 = symmetric_eigenvalues(C * C.transpose());
  return static_cast<int>((cos2.array() >= 1.0 - 2.0 * angle_tol).count());
}

int spectral_flow_endpoints(const Mat& La, const Mat& Lb, double tol) {
  require(La.rows() == Lb.rows() && La.rows() == La.cols() && Lb.rows() == Lb.cols(),
          "endpoint operators must be square and of equal size");
  const auto sa = jacobi_eigen(La, resolve_tol(La, tol));
  const auto sb = jacobi_eigen(Lb, resolve_tol(Lb, tol));
  require_invertible(sa, "L_a");
  require_invertible(sb, "L_b");
  return intersection_dimension(sa.negative_space(), sb.positive_space()) -
         intersection_dimension(sb.negative_space(), sa.positive_space());
}

CrossingResult spectral_flow_crossings(const SymOperatorPath& path, double tol, int jobs,
                                       double min_step) {
  require(path.samples >= 2, "path needs at least two samples");
  require(path.a < path.b, "path interval must satisfy a < b");
  const int n = path.samples;
  const double h = (path.b - path.a) / (n - 1);

  std::vector<Sample> grid(static_cast<std::size_t>(n));
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const double lambda = path.grid_point(static_cast<int>(i));
    Sample s = take_sample(path, lambda, tol);
    const bool endpoint = i == 0 || i + 1 == grid.size();
    if (s.singular && endpoint) {
      fail(ErrorCode::DegenerateOperator, "path endpoint operator is not invertible");
    }
    // Interior grid points that land on a kernel are nudged inside their cell.
    for (int k = 1; s.singular && k <= 8; ++k) s = take_sample(path, lambda + 0.0371 * k * h, tol);
    if (s.singular) fail(ErrorCode::MaxRefinement, "could not avoid a singular grid sample");
    grid[i] = std::move(s);
  });

  CrossingResult result;
  auto locate = [](const Sample& l, const Sample& r) {
    // Root of the linear interpolant of the eigenvalue nearest zero.
    Eigen::Index k = 0;
    (l.eigenvalues.cwiseAbs() + r.eigenvalues.cwiseAbs()).minCoeff(&k);
    const double el = l.eigenvalues[k], er = r.eigenvalues[k];
    if (el == er || (el > 0) == (er > 0)) return 0.5 * (l.lambda + r.lambda);
    return l.lambda + (r.lambda - l.lambda) * el / (el - er);
  };

  std::vector<std::pair<Sample, Sample>> stack;
  for (int i = n - 2; i >= 0; --i) stack.emplace_back(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(i + 1)]);

  while (!stack.empty()) {
    auto [l, r] = std::move(stack.back());
    stack.pop_back();
    ++result.intervals_examined;
    const int dmu = l.morse - r.morse;
    const double bound = 2.0 * (r.matrix - l.matrix).norm();
    const int candidates = static_cast<int>((l.eigenvalues.array().abs() <= bound).count());
    const int candidates_r = static_cast<int>((r.eigenvalues.array().abs() <= bound).count());
    const bool isolated = candidates == std::abs(dmu) && candidates_r == std::abs(dmu);
    const bool narrow = r.lambda - l.lambda <= min_step;
    if (isolated || narrow) {
      if (dmu != 0) {
        const double at = locate(l, r);
        const int dir = dmu > 0 ? 1 : -1;
        for (int k = 0; k < std::abs(dmu); ++k) result.crossings.push_back({at, dir});
        result.spf += dmu;
      }
      continue;
    }
    std::optional<Sample> mid;
    for (double frac : {0.5, 0.4, 0.6, 0.3, 0.7}) {
      Sample m = take_sample(path, l.lambda + frac * (r.lambda - l.lambda), tol);
      if (!m.singular) {
        mid = std::move(m);
        break;
      }
    }
    if (!mid) fail(ErrorCode::MaxRefinement, "crossing could not be isolated away from a kernel");
    stack.emplace_back(*mid, std::move(r));
    stack.emplace_back(std::move(l), *mid);
  }
  std::stable_sort(result.crossings.begin(), result.crossings.end(),
                   [](const Crossing& x, const Crossing& y) { return x.lambda < y.lambda; });
  return result;
}

GeneralizedSignature generalized_signature(const SymmetryOperator& J, const Mat& K, int n_max,
                                           int stability_window) {
  require(n_max >= 1 && stability_window >= 1, "n_max and stability_window must be positive");
  require(J.dim() >= 2 * n_max, "symmetry is smaller than the requested truncation");
  require(K.rows() >= 2 * n_max && K.cols() == K.rows(), "perturbation is smaller than the requested truncation");
  const Mat L = J.matrix(n_max) + K.topLeftCorner(2 * n_max, 2 * n_max);

  GeneralizedSignature out;
  std::vector<bool> valid;
  for (int n = 1; n <= n_max; ++n) {
    const Mat Ln = L.topLeftCorner(2 * n, 2 * n);
    const auto sd = jacobi_eigen(Ln);
    valid.push_back(sd.kernel_count() == 0);
    out.history.push_back(sd.kernel_count() == 0 ? sd.positive_count() - sd.negative_count() : 0);
  }
  if (!valid.back()) fail(ErrorCode::NotStabilized, "truncation at n_max is singular");
  int start = n_max;
  while (start > 1 && valid[static_cast<std::size_t>(start - 2)] &&
         out.history[static_cast<std::size_t>(start - 2)] == out.history.back()) {
    --start;
  }
  if (n_max - start + 1 < stability_window) {
    fail(ErrorCode::NotStabilized, "signature not constant over the stability window by n_max");
  }
  out.value = out.history.back();
  out.stabilization_index = start;
  return out;
}

int spectral_flow_signature(const Mat& La, const Mat& Lb, int tail_pairs) {
  require(La.rows() == Lb.rows() && La.rows() == La.cols(), "endpoint operators must match");
  const Eigen::Index d = La.rows();
  const Eigen::Index padded = d + (d % 2);
  const int pairs = static_cast<int>(padded / 2) + tail_pairs;
  const auto J = SymmetryOperator::interleaved(pairs);
  auto embed = [&](const Mat& L) {
    Mat full = J.matrix();
    full.topLeftCorner(padded, padded).setZero();
    full.topLeftCorner(d, d) = L;
    if (padded != d) full(d, d) = 1.0;
    return Mat(full - J.matrix());
  };
  const int window = tail_pairs + 1;
  const auto sa = generalized_signature(J, embed(La), pairs, window);
  const auto sb = generalized_signature(J, embed(Lb), pairs, window);
  return (sb.value - sa.value) / 2;
}

int determinant_sign(const Mat& M) {
  const double det = Eigen::PartialPivLU<Mat>(M).determinant();
  return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
}

DegreeRelationReport degree_relation_check(const SymOperatorPath& path, double tol) {
  DegreeRelationReport rep;
  const Mat La = path.at(path.a);
  const Mat Lb = path.at(path.b);
  if (jacobi_eigen(La, resolve_tol(La, tol)).kernel_count() > 0 ||
      jacobi_eigen(Lb, resolve_tol(Lb, tol)).kernel_count() > 0) {
    fail(ErrorCode::DegenerateOperator, "path endpoints must be invertible");
  }
  rep.spf = spectral_flow_crossings(path, tol).spf;
  rep.det_sign_a = determinant_sign(La);
  rep.det_sign_b = determinant_sign(Lb);
  rep.lhs = (rep.spf % 2 == 0) ? 1 : -1;
  rep.rhs = rep.det_sign_a * rep.det_sign_b;
  rep.holds = rep.lhs == rep.rhs;
  return rep;
}

double path_variation(const SymOperatorPath& path, int samples) {
  require(samples >= 2, "need at least two samples");
  double worst = 0.0;
  Mat prev = path.at(path.a);
  for (int i = 1; i < samples; ++i) {
    const Mat cur = path.at(path.a + (path.b - path.a) * i / (samples - 1));
    worst = std::max(worst, (cur - prev).norm());
    prev = cur;
  }
  return worst;
}

EigenTrace eigenvalue_trace(const SymOperatorPath& path, int jobs) {
  EigenTrace t;
  t.lambda.resize(static_cast<std::size_t>(path.samples));
  t.eigenvalues.resize(static_cast<std::size_t>(path.samples));
  parallel_for(t.lambda.size(), jobs, [&](std::size_t i) {
    t.lambda[i] = path.grid_point(static_cast<int>(i));
    t.eigenvalues[i] = symmetric_eigenvalues(path.at(t.lambda[i]));
  });
  return t;
}

}  // namespace critflow::spectral
