#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace critflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  Vec lo;
  Vec hi;

  static Box cube(int dim, double half_width);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double slack = 0.0) const;
  bool empty() const;
  Box scaled(double factor) const;  // scaled about the box centre
};

/// A real function of one variable with its derivative.
struct ScalarProfile {
  std::function<double(double)> eval;
  std::function<double(double)> derivative;

  double operator()(double t) const { return eval(t); }

  static ScalarProfile constant(double c);
  static ScalarProfile identity();
  /// Installs a central-difference derivative when `derivative` is empty.
  static ScalarProfile from(std::function<double(double)> eval,
                            std::function<double(double)> derivative = {});
};

/// A parameterized functional f(lambda, x) on R^d with first and second
/// derivatives in x and the partial derivative in lambda. All handles must be
/// pure; they are called concurrently from worker threads.
struct FunctionalFamily {
  using EvalFn = std::function<double(double, const Vec&)>;
  using GradFn = std::function<Vec(double, const Vec&)>;
  using HessFn = std::function<Mat(double, const Vec&)>;

  int dim = 0;
  EvalFn eval;
  GradFn grad;
  HessFn hess;
  EvalFn lambda_grad;
  Box domain;
  std::string name;

  double operator()(double lambda, const Vec& x) const { return eval(lambda, x); }
  /// Hessian at the trivial solution, the operator L_lambda.
  Mat hessian_at_origin(double lambda) const { return hess(lambda, Vec::Zero(dim)); }
};

/// Builds a family, filling every missing derivative with central finite
/// differences of step 1e-5 (1 + |x|). A missing Hessian is differenced from
/// the gradient when one is supplied, otherwise from eval with a wider step.
FunctionalFamily make_family(std::string name, int dim, FunctionalFamily::EvalFn eval,
                             FunctionalFamily::GradFn grad = {},
                             FunctionalFamily::HessFn hess = {},
                             FunctionalFamily::EvalFn lambda_grad = {},
                             std::optional<Box> domain = std::nullopt);

/// f(-lambda, x); used to run the deformation flow backwards in lambda.
FunctionalFamily reversed(const FunctionalFamily& family);

// Bridge polynomial p_{a,b}(r) = (3a - b + 1) r^2 + (-2a + b - 2) r^3 + r^4,
// the quartic with p(0) = p'(0) = 0, p(1) = a, p'(1) = b.
double bridge_polynomial(double a, double b, double r);
double bridge_polynomial_derivative(double a, double b, double r);
double bridge_polynomial_second_derivative(double a, double b, double r);

/// f(lambda, x) = p_{2 s(lambda), 3 s(lambda)}(|x|) on R^2 for a profile s.
FunctionalFamily radial_bridge_family(ScalarProfile s, std::string name);

/// The eversion surrogate: radial_bridge_family with s(lambda) = -sin(pi lambda / 2),
/// matching f(-1) = 4r^2 - 3r^3 + r^4 and f(1) = -2r^2 - r^3 + r^4.
FunctionalFamily radial_demo_family();
ScalarProfile demo_profile();

/// f(lambda, x) = |x|^2 on R^dim, independent of lambda.
FunctionalFamily quadratic_family(int dim = 2);
FunctionalFamily zero_family(int dim = 2);

struct FiniteDifferenceReport {
  double max_grad_deviation = 0.0;
  double max_hess_deviation = 0.0;
  double max_lambda_deviation = 0.0;
  double max_hess_asymmetry = 0.0;
  int samples = 0;
};

/// Compares analytic derivatives with central differences at random points of
/// the domain box. Throws NonFiniteValue if eval is not finite somewhere.
FiniteDifferenceReport finite_difference_check(const FunctionalFamily& family, int samples,
                                               double step, double lambda_lo = -1.0,
                                               double lambda_hi = 1.0,
                                               std::uint64_t seed = 7);

}  // namespace critflow
