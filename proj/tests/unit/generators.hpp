#pragma once

#include <cmath>
#include <random>

#include "critflow/functional.hpp"
#include "critflow/plane.hpp"
#include "critflow/spectral.hpp"

namespace gen {

using critflow::Mat;
using critflow::Vec;

inline Mat random_symmetric(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = n(rng);
  return 0.5 * (A + A.transpose());
}

/// lambda -> A + lambda B + lambda^2 C on [-1, 1] with both endpoints at
/// least `gap` away from singular.
inline critflow::spectral::SymOperatorPath random_path(std::mt19937_64& rng, int d, double gap = 1e-2) {
  for (;;) {
    const Mat A = random_symmetric(rng, d), B = random_symmetric(rng, d), C = random_symmetric(rng, d, 0.5);
    critflow::spectral::SymOperatorPath p;
    p.dim = d;
    p.at = [A, B, C](double l) { return Mat(A + l * B + l * l * C); };
    const auto ea = critflow::symmetric_eigenvalues(p.at(-1.0));
    const auto eb = critflow::symmetric_eigenvalues(p.at(1.0));
    if (ea.cwiseAbs().minCoeff() > gap && eb.cwiseAbs().minCoeff() > gap) return p;
  }
}

inline critflow::plane::RectGrid random_mask(std::mt19937_64& rng, int nx, int ny, double density) {
  std::bernoulli_distribution b(density);
  auto g = critflow::plane::RectGrid::empty(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) g.set(i, j, b(rng));
  return g;
}

/// Strictly increasing map of [-1, 1] onto itself: a normalized positive
/// combination of odd monotone pieces.
inline critflow::ScalarProfile random_monotone(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const double c1 = u(rng), c3 = u(rng), c5 = u(rng) * 0.5, ct = u(rng), k = 1.0 + 3.0 * u(rng);
  const double shift = 0.3 * (u(rng) - 0.55);
  auto raw = [=](double x) {
    return c1 * x + c3 * x * x * x + c5 * std::pow(x, 5) + ct * std::tanh(k * (x - shift));
  };
  const double lo = raw(-1.0), hi = raw(1.0);
  return critflow::ScalarProfile::from([=](double x) { return -1.0 + 2.0 * (raw(x) - lo) / (hi - lo); });
}

}  // namespace gen
