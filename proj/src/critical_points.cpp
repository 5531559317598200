#include "critflow/critical_points.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "critflow/eigen_sym.hpp"

namespace critflow::bifurcate {

namespace {

Vec pseudo_newton_step(const Mat& H, const Vec& g) {
  const auto sd = jacobi_eigen(H, 0.0);
  const double scale = sd.eigenvalues.cwiseAbs().maxCoeff();
  const double cutoff = std::max(1e-10 * scale, 1e-300);
  Vec p = Vec::Zero(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double mu = sd.eigenvalues[k];
    if (std::abs(mu) > cutoff) p -= (sd.eigenvectors.col(k).dot(g) / mu) * sd.eigenvectors.col(k);
  }
  return p;
}

}  // namespace

std::optional<CriticalPoint> newton_critical_point(const FunctionalFamily& family, double lambda,
                                                   Vec x, const NewtonOptions& opts) {
  const Box& box = family.domain;
  const double slack = opts.box_slack * (box.hi - box.lo).maxCoeff();
  Vec g = family.grad(lambda, x);
  double gn = g.norm();
  for (int it = 0; it < opts.max_iter; ++it) {
    if (!std::isfinite(gn)) return std::nullopt;
    if (gn <= opts.newton_tol) break;
    const Mat H = family.hess(lambda, x);

    auto try_direction = [&](Vec p) {
      const double len = p.norm();
      if (!(len > 0.0) || !std::isfinite(len)) return false;
      if (len > opts.max_step) p *= opts.max_step / len;
      for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
        const Vec y = x + alpha * p;
        const Vec gy = family.grad(lambda, y);
        const double gyn = gy.norm();
        if (std::isfinite(gyn) && gyn < (1.0 - 1e-4 * alpha) * gn) {
          x = y;
          g = gy;
          gn = gyn;
          return true;
        }
      }
      return false;
    };

    if (!try_direction(pseudo_newton_step(H, g)) && !try_direction(Vec(-(H * g)))) break;
    if (!box.contains(x, slack)) return std::nullopt;
  }
  if (!(gn <= opts.newton_tol)) return std::nullopt;
  return CriticalPoint{x, family.eval(lambda, x), gn};
}

SliceResult critical_points_slice(const FunctionalFamily& family, double lambda,
                                  const std::vector<Vec>& seeds, const NewtonOptions& opts) {
  SliceResult out;
  for (const auto& seed : seeds) {
    auto cp = newton_critical_point(family, lambda, seed, opts);
    if (!cp) {
      ++out.dropped;
      continue;
    }
    const bool duplicate = std::any_of(out.points.begin(), out.points.end(), [&](const CriticalPoint& q) {
      return (q.x - cp->x).norm() <= opts.dedup_r;
    });
    if (!duplicate) out.points.push_back(std::move(*cp));
  }
  return out;
}

std::vector<Vec> ring_seeds(int dim, int angles, double dr, int rings) {
  std::vector<Vec> seeds;
  seeds.push_back(Vec::Zero(dim));
  for (int k = 1; k <= rings; ++k) {
    const double r = dr * k;
    if (dim >= 2) {
      for (int a = 0; a < angles; ++a) {
        const double t = 2.0 * std::numbers::pi * a / angles;
        Vec x = Vec::Zero(dim);
        x[0] = r * std::cos(t);
        x[1] = r * std::sin(t);
        seeds.push_back(x);
      }
    }
    if (dim != 2) {
      for (int i = 0; i < dim; ++i) {
        for (double sgn : {1.0, -1.0}) {
          Vec x = Vec::Zero(dim);
          x[i] = sgn * r;
          seeds.push_back(x);
        }
      }
    }
  }
  return seeds;
}

std::vector<Vec> ball_seeds(const Vec& centre, double radius, int count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = centre.size();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vec dir(d);
    for (Eigen::Index k = 0; k < d; ++k) dir[k] = normal(rng);
    const double n = dir.norm();
    if (n == 0.0) continue;
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
    out.push_back(centre + (r / n) * dir);
  }
  return out;
}

}  // namespace critflow::bifurcate
