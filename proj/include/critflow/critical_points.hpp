#pragma once

#include <optional>
#include <vector>

#include "critflow/functional.hpp"

namespace critflow::bifurcate {

struct NewtonOptions {
  double newton_tol = 1e-9;
  double dedup_r = 1e-4;
  int max_iter = 200;
  double max_step = 0.5;
  double box_slack = 0.1;  // fraction of the box width a trajectory may overshoot
};

struct CriticalPoint {
  Vec x;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct SliceResult {
  std::vector<CriticalPoint> points;
  int dropped = 0;  // seeds that did not converge
};

/// Damped Newton on grad f_lambda with an eigen-filtered pseudo-inverse (so
/// manifolds of critical points and folds still converge) and a steepest
/// descent fallback on |grad f|^2 when the Newton step fails to decrease it.
std::optional<CriticalPoint> newton_critical_point(const FunctionalFamily& family, double lambda,
                                                   Vec seed, const NewtonOptions& opts = {});

/// Newton from every seed; converged points deduplicated at radius dedup_r.
SliceResult critical_points_slice(const FunctionalFamily& family, double lambda,
                                  const std::vector<Vec>& seeds, const NewtonOptions& opts = {});

/// The origin plus rings of `angles` points at radii 0.25, 0.5, ..., 2.5 in
/// the first coordinate plane; in higher dimension also +-r along every axis.
std::vector<Vec> ring_seeds(int dim, int angles = 16, double dr = 0.25, int rings = 10);

/// `count` points uniformly distributed in the ball B(centre, radius), seeded.
std::vector<Vec> ball_seeds(const Vec& centre, double radius, int count, unsigned long long seed);

}  // namespace critflow::bifurcate
