#include "critflow/registry.hpp"

#include <cmath>
#include <filesystem>

#include "critflow/error.hpp"
#include "critflow/expression.hpp"
#include "critflow/galerkin.hpp"

namespace critflow {

namespace {

double smooth(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smooth_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

FunctionalFamily ps_violation_family() {
  auto eval = [](double l, const Vec& x) {
    const double r2 = x.squaredNorm();
    return (1.0 + 0.5 * l) * r2 * std::exp(-r2);
  };
  auto grad = [](double l, const Vec& x) {
    const double r2 = x.squaredNorm();
    return Vec((1.0 + 0.5 * l) * 2.0 * (1.0 - r2) * std::exp(-r2) * x);
  };
  auto dl = [](double, const Vec& x) {
    const double r2 = x.squaredNorm();
    return 0.5 * r2 * std::exp(-r2);
  };
  return make_family("ps-violation", 2, eval, grad, {}, dl, Box::cube(2, 3.0));
}

FunctionalFamily partf_unbounded_family() {
  auto eval = [](double l, const Vec& x) { return std::sin(std::expm1(l * x.squaredNorm())); };
  auto grad = [](double l, const Vec& x) {
    const double r2 = x.squaredNorm();
    return Vec(std::cos(std::expm1(l * r2)) * std::exp(l * r2) * 2.0 * l * x);
  };
  auto dl = [](double l, const Vec& x) {
    const double r2 = x.squaredNorm();
    return std::cos(std::expm1(l * r2)) * std::exp(l * r2) * r2;
  };
  return make_family("partf-unbounded", 2, eval, grad, {}, dl, Box::cube(2, 3.0));
}

FunctionalFamily two_minimum_family() {
  auto eval = [](double, const Vec& x) {
    const double a = x[0] * x[0] - 1.0;
    return a * a + x[1] * x[1];
  };
  auto grad = [](double, const Vec& x) {
    Vec g(2);
    g << 4.0 * x[0] * (x[0] * x[0] - 1.0), 2.0 * x[1];
    return g;
  };
  auto hess = [](double, const Vec& x) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 12.0 * x[0] * x[0] - 4.0;
    H(1, 1) = 2.0;
    return H;
  };
  auto dl = [](double, const Vec&) { return 0.0; };
  return make_family("two-minimum", 2, eval, grad, hess, dl, Box::cube(2, 3.0));
}

FunctionalFamily saddle_family() {
  auto eval = [](double, const Vec& x) { return x[0] * x[0] - x[1] * x[1]; };
  auto grad = [](double, const Vec& x) {
    Vec g(2);
    g << 2.0 * x[0], -2.0 * x[1];
    return g;
  };
  auto hess = [](double, const Vec&) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 2.0;
    H(1, 1) = -2.0;
    return H;
  };
  auto dl = [](double, const Vec&) { return 0.0; };
  return make_family("saddle", 2, eval, grad, hess, dl, Box::cube(2, 3.0));
}

}  // namespace

ScalarProfile bump_profile() {
  auto bump = [](double l) { return 1.0 - smooth((std::abs(l) - 0.3) / 0.4); };
  auto dbump = [](double l) {
    const double s = l < 0.0 ? -1.0 : 1.0;
    return -s * smooth_derivative((std::abs(l) - 0.3) / 0.4) / 0.4;
  };
  return ScalarProfile{[bump](double l) { return 1.0 - 2.0 * bump(l); }, [dbump](double l) { return -2.0 * dbump(l); }};
}

const std::vector<FamilyEntry>& builtin_families() {
  static const std::vector<FamilyEntry> entries = {
      {"demo", "radial eversion surrogate p_{2s,3s}(|x|), s = -sin(pi lambda / 2)", [] { return radial_demo_family(); }},
      {"quadratic", "|x|^2 on R^2, no branch", [] { return quadratic_family(2); }},
      {"bump", "radial bridge family with equal endpoint slices and a closed loop of critical values",
       [] { return radial_bridge_family(bump_profile(), "bump"); }},
      {"ps-violation", "(1 + lambda/2) |x|^2 exp(-|x|^2): gradients vanish at infinity", [] { return ps_violation_family(); }},
      {"partf-unbounded", "sin(exp(lambda |x|^2) - 1): df/dlambda unbounded on bounded values",
       [] { return partf_unbounded_family(); }},
      {"galerkin", "strongly indefinite demo truncated to H_2",
       [] {
         auto f = galerkin::truncate(SymmetryOperator::interleaved(2), galerkin::rank_demo_perturbation(2, 2), 2);
         f.name = "galerkin";
         return f;
       }},
      {"two-minimum", "(x0^2 - 1)^2 + x1^2, independent of lambda", [] { return two_minimum_family(); }},
      {"saddle", "x0^2 - x1^2, independent of lambda", [] { return saddle_family(); }},
  };
  return entries;
}

FunctionalFamily resolve_family(const std::string& name_or_path) {
  for (const auto& e : builtin_families())
    if (e.name == name_or_path) return e.make();
  if (std::filesystem::exists(name_or_path)) return family_from_manifest_file(name_or_path);
  std::string known;
  for (const auto& e : builtin_families()) known += (known.empty() ? "" : ", ") + e.name;
  fail(ErrorCode::InvalidArgument, "unknown family '" + name_or_path + "' (built-in: " + known + ")");
}

}  // namespace critflow
