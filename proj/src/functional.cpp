#include "critflow/functional.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "critflow/error.hpp"

namespace critflow {

Box Box::cube(int dim, double half_width) {
  return Box{Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width)};
}

bool Box::contains(const Vec& x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

bool Box::empty() const {
  if (lo.size() == 0 || lo.size() != hi.size()) return true;
  return ((hi - lo).array() <= 0.0).any();
}

Box Box::scaled(double factor) const {
  const Vec centre = 0.5 * (lo + hi);
  const Vec half = 0.5 * (hi - lo) * factor;
  return Box{centre - half, centre + half};
}

ScalarProfile ScalarProfile::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

ScalarProfile ScalarProfile::identity() {
  return {[](double t) { return t; }, [](double) { return 1.0; }};
}

ScalarProfile ScalarProfile::from(std::function<double(double)> eval,
                                  std::function<double(double)> derivative) {
  if (!derivative) {
    derivative = [eval](double t) {
      const double h = 1e-5 * (1.0 + std::abs(t));
      return (eval(t + h) - eval(t - h)) / (2.0 * h);
    };
  }
  return {std::move(eval), std::move(derivative)};
}

namespace {

double fd_step(const Vec& x) { return 1e-5 * (1.0 + x.norm()); }

}  // namespace

FunctionalFamily make_family(std::string name, int dim, FunctionalFamily::EvalFn eval,
                             FunctionalFamily::GradFn grad, FunctionalFamily::HessFn hess,
                             FunctionalFamily::EvalFn lambda_grad, std::optional<Box> domain) {
  require(dim > 0, "family dimension must be positive");
  require(static_cast<bool>(eval), "family needs an eval handle");
  FunctionalFamily f;
  f.dim = dim;
  f.name = std::move(name);
  f.domain = domain.value_or(Box::cube(dim, 3.0));
  f.eval = eval;
  const bool has_grad = static_cast<bool>(grad);

  if (has_grad) {
    f.grad = std::move(grad);
  } else {
    f.grad = [eval, dim](double lambda, const Vec& x) {
      const double h = fd_step(x);
      Vec g(dim);
      Vec xp = x;
      for (int i = 0; i < dim; ++i) {
        const double xi = xp[i];
        xp[i] = xi + h;
        const double up = eval(lambda, xp);
        xp[i] = xi - h;
        const double dn = eval(lambda, xp);
        xp[i] = xi;
        g[i] = (up - dn) / (2.0 * h);
      }
      return g;
    };
  }

  if (hess) {
    f.hess = std::move(hess);
  } else if (!has_grad) {
    // Second differences straight from eval; a wider step keeps the
    // cancellation error near 1e-8.
    f.hess = [eval, dim](double lambda, const Vec& x) {
      const double h = 1e-4 * (1.0 + x.norm());
      Mat H(dim, dim);
      Vec y = x;
      const double f0 = eval(lambda, x);
      for (int i = 0; i < dim; ++i) {
        const double xi = y[i];
        y[i] = xi + h;
        const double fp = eval(lambda, y);
        y[i] = xi - h;
        const double fm = eval(lambda, y);
        y[i] = xi;
        H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        for (int j = i + 1; j < dim; ++j) {
          const double xj = y[j];
          y[i] = xi + h; y[j] = xj + h;
          const double fpp = eval(lambda, y);
          y[j] = xj - h;
          const double fpm = eval(lambda, y);
          y[i] = xi - h;
          const double fmm = eval(lambda, y);
          y[j] = xj + h;
          const double fmp = eval(lambda, y);
          y[i] = xi; y[j] = xj;
          H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
      }
      return H;
    };
  }
  if (!f.hess) {
    auto g = f.grad;
    f.hess = [g, dim](double lambda, const Vec& x) {
      const double h = fd_step(x);
      Mat H(dim, dim);
      Vec y = x;
      for (int i = 0; i < dim; ++i) {
        const double xi = y[i];
        y[i] = xi + h;
        const Vec up = g(lambda, y);
        y[i] = xi - h;
        const Vec dn = g(lambda, y);
        y[i] = xi;
        H.col(i) = (up - dn) / (2.0 * h);
      }
      return Mat(0.5 * (H + H.transpose()));
    };
  }

  if (lambda_grad) {
    f.lambda_grad = std::move(lambda_grad);
  } else {
    f.lambda_grad = [eval](double lambda, const Vec& x) {
      const double h = 1e-5 * (1.0 + std::abs(lambda));
      return (eval(lambda + h, x) - eval(lambda - h, x)) / (2.0 * h);
    };
  }
  return f;
}

FunctionalFamily reversed(const FunctionalFamily& family) {
  FunctionalFamily r = family;
  r.name = family.name + "-reversed";
  r.eval = [e = family.eval](double l, const Vec& x) { return e(-l, x); };
  r.grad = [g = family.grad](double l, const Vec& x) { return g(-l, x); };
  r.hess = [h = family.hess](double l, const Vec& x) { return h(-l, x); };
  r.lambda_grad = [d = family.lambda_grad](double l, const Vec& x) { return -d(-l, x); };
  return r;
}

double bridge_polynomial(double a, double b, double r) {
  const double r2 = r * r;
  return (3.0 * a - b + 1.0) * r2 + (-2.0 * a + b - 2.0) * r2 * r + r2 * r2;
}

double bridge_polynomial_derivative(double a, double b, double r) {
  return 2.0 * (3.0 * a - b + 1.0) * r + 3.0 * (-2.0 * a + b - 2.0) * r * r + 4.0 * r * r * r;
}

double bridge_polynomial_second_derivative(double a, double b, double r) {
  return 2.0 * (3.0 * a - b + 1.0) + 6.0 * (-2.0 * a + b - 2.0) * r + 12.0 * r * r;
}

FunctionalFamily radial_bridge_family(ScalarProfile s, std::string name) {
  // p_{2s,3s}(r) = A r^2 + B r^3 + r^4 with A = 3s + 1, B = -(s + 2).
  FunctionalFamily f;
  f.dim = 2;
  f.name = std::move(name);
  f.domain = Box::cube(2, 3.0);
  f.eval = [s](double lambda, const Vec& x) {
    const double sv = s(lambda);
    return bridge_polynomial(2.0 * sv, 3.0 * sv, x.norm());
  };
  f.grad = [s](double lambda, const Vec& x) {
    const double sv = s(lambda);
    const double r = x.norm();
    const double phi = 2.0 * (3.0 * sv + 1.0) - 3.0 * (sv + 2.0) * r + 4.0 * r * r;
    return Vec(phi * x);
  };
  f.hess = [s](double lambda, const Vec& x) {
    const double sv = s(lambda);
    const double r = x.norm();
    const double phi = 2.0 * (3.0 * sv + 1.0) - 3.0 * (sv + 2.0) * r + 4.0 * r * r;
    Mat H = phi * Mat::Identity(2, 2);
    if (r > 0.0) H += ((-3.0 * (sv + 2.0) + 8.0 * r) / r) * (x * x.transpose());
    return H;
  };
  f.lambda_grad = [s](double lambda, const Vec& x) {
    const double r = x.norm();
    return s.derivative(lambda) * (3.0 * r * r - r * r * r);
  };
  return f;
}

ScalarProfile demo_profile() {
  using std::numbers::pi;
  return {[](double l) { return -std::sin(pi * l / 2.0); },
          [](double l) { return -(pi / 2.0) * std::cos(pi * l / 2.0); }};
}

FunctionalFamily radial_demo_family() { return radial_bridge_family(demo_profile(), "demo"); }

FunctionalFamily quadratic_family(int dim) {
  FunctionalFamily f;
  f.dim = dim;
  f.name = "quadratic";
  f.domain = Box::cube(dim, 3.0);
  f.eval = [](double, const Vec& x) { return x.squaredNorm(); };
  f.grad = [](double, const Vec& x) { return Vec(2.0 * x); };
  f.hess = [dim](double, const Vec&) { return Mat(2.0 * Mat::Identity(dim, dim)); };
  f.lambda_grad = [](double, const Vec&) { return 0.0; };
  return f;
}

FunctionalFamily zero_family(int dim) {
  FunctionalFamily f;
  f.dim = dim;
  f.name = "zero";
  f.domain = Box::cube(dim, 3.0);
  f.eval = [](double, const Vec&) { return 0.0; };
  f.grad = [dim](double, const Vec&) { return Vec(Vec::Zero(dim)); };
  f.hess = [dim](double, const Vec&) { return Mat(Mat::Zero(dim, dim)); };
  f.lambda_grad = [](double, const Vec&) { return 0.0; };
  return f;
}

FiniteDifferenceReport finite_difference_check(const FunctionalFamily& family, int samples,
                                               double step, double lambda_lo,
                                               double lambda_hi, std::uint64_t seed) {
  require(step > 0.0, "finite difference step must be positive");
  require(!family.domain.empty(), "domain box is empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = family.dim;
  FiniteDifferenceReport rep;
  rep.samples = samples;
  for (int k = 0; k < samples; ++k) {
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      x[i] = family.domain.lo[i] + unit(rng) * (family.domain.hi[i] - family.domain.lo[i]);
    }
    const double lambda = lambda_lo + unit(rng) * (lambda_hi - lambda_lo);
    const double f0 = family.eval(lambda, x);
    if (!std::isfinite(f0)) fail(ErrorCode::NonFiniteValue, "eval is not finite inside the domain box");

    const Vec g = family.grad(lambda, x);
    const Mat H = family.hess(lambda, x);
    Vec y = x;
    for (int i = 0; i < d; ++i) {
      const double xi = y[i];
      y[i] = xi + step;
      const double fp = family.eval(lambda, y);
      const Vec gp = family.grad(lambda, y);
      y[i] = xi - step;
      const double fm = family.eval(lambda, y);
      const Vec gm = family.grad(lambda, y);
      y[i] = xi;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        fail(ErrorCode::NonFiniteValue, "eval is not finite inside the domain box");
      }
      rep.max_grad_deviation = std::max(rep.max_grad_deviation, std::abs((fp - fm) / (2 * step) - g[i]));
      const Vec col = (gp - gm) / (2 * step);
      rep.max_hess_deviation = std::max(rep.max_hess_deviation, (col - H.col(i)).cwiseAbs().maxCoeff());
    }
    rep.max_hess_asymmetry = std::max(rep.max_hess_asymmetry, (H - H.transpose()).cwiseAbs().maxCoeff());
    const double dl = (family.eval(lambda + step, x) - family.eval(lambda - step, x)) / (2 * step);
    rep.max_lambda_deviation = std::max(rep.max_lambda_deviation, std::abs(dl - family.lambda_grad(lambda, x)));
  }
  return rep;
}

}  // namespace critflow
