#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "critflow/error.hpp"
#include "critflow/expression.hpp"
#include "critflow/functional.hpp"
#include "critflow/registry.hpp"

using namespace critflow;

namespace {
Vec point(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}
}  // namespace

TEST_CASE("bridge polynomial coefficients") {
  for (double r : {0.0, 0.3, 1.0, 1.7, 2.5}) {
    CHECK(bridge_polynomial(2.0, 3.0, r) == doctest::Approx(4 * r * r - 3 * r * r * r + r * r * r * r).epsilon(1e-14));
    CHECK(bridge_polynomial(-2.0, -3.0, r) == doctest::Approx(-2 * r * r - r * r * r + r * r * r * r).epsilon(1e-14));
  }
  CHECK(bridge_polynomial(0.7, -1.3, 0.0) == 0.0);
  CHECK(bridge_polynomial_derivative(0.7, -1.3, 0.0) == 0.0);
}

TEST_CASE("bridge polynomial endpoint identities on random coefficients") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(bridge_polynomial(a, b, 0.0)) <= 1e-12);
    CHECK(std::abs(bridge_polynomial_derivative(a, b, 0.0)) <= 1e-12);
    CHECK(std::abs(bridge_polynomial(a, b, 1.0) - a) <= 1e-12);
    CHECK(std::abs(bridge_polynomial_derivative(a, b, 1.0) - b) <= 1e-12);
  }
}

TEST_CASE("demo family endpoint slices") {
  const auto f = radial_demo_family();
  CHECK(f.dim == 2);
  CHECK(f.domain.lo[0] == -3.0);
  CHECK(f.domain.hi[1] == 3.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const Vec x = point(u(rng), u(rng));
    const double r = x.norm();
    CHECK(f.eval(-1.0, x) == doctest::Approx(4 * r * r - 3 * r * r * r + r * r * r * r).epsilon(1e-13));
    CHECK(f.eval(1.0, x) == doctest::Approx(-2 * r * r - r * r * r + r * r * r * r).epsilon(1e-13));
  }
  for (double l = -1.0; l <= 1.0; l += 0.125) {
    CHECK(f.eval(l, Vec::Zero(2)) == 0.0);
    CHECK(f.grad(l, Vec::Zero(2)).norm() == 0.0);
  }
}

TEST_CASE("demo Hessian at the origin is (6s + 2) I") {
  const auto f = radial_demo_family();
  const auto s = demo_profile();
  for (double l = -1.0; l <= 1.0; l += 0.1) {
    const Mat H = f.hessian_at_origin(l);
    CHECK(H(0, 0) == doctest::Approx(6 * s(l) + 2).epsilon(1e-12));
    CHECK(H(1, 1) == doctest::Approx(6 * s(l) + 2).epsilon(1e-12));
    CHECK(std::abs(H(0, 1)) <= 1e-12);
  }
}

TEST_CASE("finite difference checks") {
  const auto rep = finite_difference_check(radial_demo_family(), 100, 1e-4);
  CHECK(rep.samples == 100);
  CHECK(rep.max_grad_deviation < 1e-6);
  CHECK(rep.max_hess_asymmetry <= 1e-10);
  CHECK(rep.max_lambda_deviation < 1e-6);

  const auto zero = finite_difference_check(zero_family(), 50, 1e-4);
  CHECK(zero.max_grad_deviation == 0.0);
  CHECK(zero.max_hess_deviation == 0.0);

  const auto quad = finite_difference_check(quadratic_family(2), 50, 1e-4);
  CHECK(quad.max_hess_deviation < 1e-8);
}

TEST_CASE("built-in families satisfy the derivative invariants") {
  for (const auto& e : builtin_families()) {
    CAPTURE(e.name);
    auto f = e.make();
    // oscillation frequency grows like exp(lambda |x|^2); keep it resolvable by the fixed step
    if (e.name == "partf-unbounded") f.domain = Box::cube(2, 1.0);
    const auto rep = finite_difference_check(f, 40, 1e-5);
    CHECK(rep.max_grad_deviation < 1e-5);
    CHECK(rep.max_hess_asymmetry <= 1e-10);
  }
}

TEST_CASE("finite difference check rejects non-finite values") {
  auto f = make_family("bad", 1, [](double, const Vec& x) { return 1.0 / x[0]; }, {}, {}, {}, Box::cube(1, 1.0));
  f.eval = [](double, const Vec&) { return std::nan(""); };
  CHECK_THROWS_AS(finite_difference_check(f, 10, 1e-4), Error);
}

TEST_CASE("make_family installs finite-difference derivatives") {
  auto f = make_family("cubic", 2, [](double l, const Vec& x) { return l * x[0] * x[0] * x[0] + x[1] * x[1]; });
  const Vec x = point(0.5, -0.25);
  CHECK(f.grad(2.0, x)[0] == doctest::Approx(6.0 * 0.25).epsilon(1e-7));
  CHECK(f.grad(2.0, x)[1] == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(f.hess(2.0, x)(0, 0) == doctest::Approx(12.0 * 0.5).epsilon(1e-4));
  CHECK(f.lambda_grad(2.0, x) == doctest::Approx(0.125).epsilon(1e-7));
}

TEST_CASE("reversed family") {
  const auto f = radial_demo_family();
  const auto g = reversed(f);
  const Vec x = point(0.4, 0.9);
  CHECK(g.eval(0.3, x) == f.eval(-0.3, x));
  CHECK(g.lambda_grad(0.3, x) == doctest::Approx(-f.lambda_grad(-0.3, x)));
}

TEST_CASE("scalar profile helpers") {
  const auto c = ScalarProfile::constant(2.5);
  CHECK(c(7.0) == 2.5);
  CHECK(c.derivative(7.0) == 0.0);
  const auto p = ScalarProfile::from([](double t) { return t * t * t; });
  CHECK(p.derivative(0.5) == doctest::Approx(0.75).epsilon(1e-7));
  CHECK(ScalarProfile::identity()(0.3) == 0.3);
}

TEST_CASE("manifest families") {
  nlohmann::json m = {
      {"name", "manifest-quad"},
      {"dim", 2},
      {"box", {{"lo", {-2, -2}}, {"hi", {2, 2}}}},
      {"f", {{"op", "+"}, {"args", {{{"op", "*"}, {"args", {"lambda", "x0", "x0"}}}, {{"op", "pow"}, {"args", {"norm", 4}}}}}}}};
  const auto f = family_from_manifest(m);
  CHECK(f.dim == 2);
  CHECK(f.name == "manifest-quad");
  const Vec x = point(1.0, 1.0);
  CHECK(f.eval(0.5, x) == doctest::Approx(0.5 + 4.0));
  CHECK(f.grad(0.5, x)[0] == doctest::Approx(1.0 + 8.0).epsilon(1e-6));

  nlohmann::json bad = {{"dim", 2}, {"f", {{"op", "frobnicate"}, {"args", {1}}}}};
  CHECK_THROWS_AS(family_from_manifest(bad), Error);
  nlohmann::json oob = {{"dim", 1}, {"f", "x3"}};
  CHECK_THROWS_AS(family_from_manifest(oob), Error);

  const auto path = std::filesystem::temp_directory_path() / "critflow_manifest_test.json";
  std::ofstream(path) << m.dump();
  const auto g = resolve_family(path.string());
  CHECK(g.eval(0.5, x) == doctest::Approx(4.5));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(resolve_family("no-such-family"), Error);
}
