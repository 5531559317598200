#include <doctest.h>

#include <cmath>
#include <random>

#include "critflow/eigen_sym.hpp"
#include "critflow/error.hpp"
#include "critflow/spectral.hpp"
#include "critflow/symmetry.hpp"
#include "generators.hpp"

using namespace critflow;
using namespace critflow::spectral;

namespace {
Mat diag(std::initializer_list<double> v) {
  Vec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d[i++] = x;
  return d.asDiagonal();
}

SymOperatorPath diag_lambda_one() {
  SymOperatorPath p;
  p.dim = 2;
  p.at = [](double l) { return diag({l, 1.0}); };
  return p;
}

SymOperatorPath constant_path() {
  SymOperatorPath p;
  p.dim = 3;
  p.at = [](double) { return diag({1.0, -2.0, 3.0}); };
  return p;
}

SymOperatorPath sub_path(const SymOperatorPath& p, double a, double b) {
  SymOperatorPath q = p;
  q.a = a;
  q.b = b;
  return q;
}
}  // namespace

TEST_CASE("jacobi eigen decomposition invariants") {
  std::mt19937_64 rng(1);
  for (int d = 1; d <= 12; ++d) {
    const Mat M = gen::random_symmetric(rng, d);
    const auto sd = jacobi_eigen(M);
    CHECK((sd.eigenvectors.transpose() * sd.eigenvectors - Mat::Identity(d, d)).norm() <= 1e-10);
    for (int k = 0; k < d; ++k) {
      CHECK((M * sd.eigenvectors.col(k) - sd.eigenvalues[k] * sd.eigenvectors.col(k)).norm() <= 1e-10 * (1 + M.norm()));
      if (k > 0) CHECK(sd.eigenvalues[k - 1] <= sd.eigenvalues[k]);
    }
  }
}

TEST_CASE("morse index examples") {
  CHECK(morse_index(Mat::Identity(5, 5)) == 0);
  CHECK(morse_index(-4.0 * Mat::Identity(2, 2)) == 2);
  CHECK(morse_index(diag({-1, -1, 2, 3})) == 2);
  CHECK_THROWS_AS(morse_index(diag({0.0, 1.0})), Error);
  CHECK(morse_index(diag({0.0, -1.0}), -1.0, true) == 1);
}

TEST_CASE("signature examples") {
  CHECK(signature(Mat::Identity(4, 4)) == 4);
  CHECK(signature(diag({1, -1})) == 0);
  CHECK(signature(diag({-1, -1, 2})) == -1);
}

TEST_CASE("morse index complement and scaling") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + static_cast<int>(rng() % 8);
    Mat M = gen::random_symmetric(rng, d);
    if (t % 5 == 0) {
      // plant an exact kernel vector
      const auto sd = jacobi_eigen(M);
      M -= sd.eigenvalues[0] * sd.eigenvectors.col(0) * sd.eigenvectors.col(0).transpose();
    }
    const auto sd = jacobi_eigen(M);
    CHECK(morse_index(M, -1, true) + morse_index(-M, -1, true) + sd.kernel_count() == d);
    if (sd.kernel_count() == 0) {
      CHECK(morse_index(M) == morse_index(3.7 * M));
      CHECK(morse_index(M) == morse_index(0.01 * M));
    }
  }
}

TEST_CASE("spectral flow from endpoints") {
  CHECK(spectral_flow_endpoints(diag({1, -2}), diag({1, -2})) == 0);
  CHECK(spectral_flow_endpoints(diag({-1, 1}), diag({1, 1})) == 1);
  CHECK(spectral_flow_endpoints(8.0 * Mat::Identity(2, 2), -4.0 * Mat::Identity(2, 2)) == -2);
  CHECK_THROWS_AS(spectral_flow_endpoints(diag({0, 1}), diag({1, 1})), Error);
}

TEST_CASE("spectral flow by crossing count") {
  CHECK(spectral_flow_crossings(constant_path()).spf == 0);
  const auto c = spectral_flow_crossings(diag_lambda_one());
  CHECK(c.spf == 1);
  REQUIRE(c.crossings.size() == 1);
  CHECK(std::abs(c.crossings[0].lambda) <= 1e-6);
  CHECK(c.crossings[0].direction == 1);

  const auto demo = spectral_flow_crossings(hessian_path(radial_demo_family()));
  CHECK(demo.spf == -2);
  for (const auto& x : demo.crossings) {
    CHECK(x.direction == -1);
    CHECK(x.lambda == doctest::Approx(0.2163468959).epsilon(1e-5));
  }
}

TEST_CASE("generalized signature") {
  const auto J = SymmetryOperator::interleaved(5);
  const auto zero = generalized_signature(J, Mat::Zero(10, 10), 5, 3);
  CHECK(zero.value == 0);
  for (int s : zero.history) CHECK(s == 0);

  Mat K = Mat::Zero(10, 10);
  K(SymmetryOperator::minus_index(0), SymmetryOperator::minus_index(0)) = 2.0;
  const auto one = generalized_signature(J, K, 5, 3);
  CHECK(one.value == 2);
  CHECK(one.stabilization_index == 1);
  for (int s : one.history) CHECK(s == 2);

  Mat K2 = Mat::Zero(10, 10);
  K2(SymmetryOperator::minus_index(0), SymmetryOperator::minus_index(0)) = 2.0;
  K2(SymmetryOperator::minus_index(1), SymmetryOperator::minus_index(1)) = 2.0;
  const auto two = generalized_signature(J, K2, 5, 3);
  CHECK(two.value == 4);
  CHECK(two.stabilization_index == 2);

  // Alternating growth never stabilizes over a window of 3 within n_max = 3.
  Mat K3 = Mat::Zero(6, 6);
  for (int k = 0; k < 3; ++k) K3(SymmetryOperator::minus_index(k), SymmetryOperator::minus_index(k)) = 2.0;
  CHECK_THROWS_AS(generalized_signature(SymmetryOperator::interleaved(3), K3, 3, 3), Error);
}

TEST_CASE("symmetry balance on every truncation") {
  const auto J = SymmetryOperator::interleaved(12);
  for (int n = 1; n <= 12; ++n) {
    const Mat M = J.matrix(n);
    CHECK(signature(M) == 0);
    CHECK((M * M - Mat::Identity(2 * n, 2 * n)).norm() == 0.0);
  }
}

TEST_CASE("degree relation examples") {
  const auto demo = degree_relation_check(hessian_path(radial_demo_family()));
  CHECK(demo.spf == -2);
  CHECK(demo.det_sign_a == 1);
  CHECK(demo.det_sign_b == 1);
  CHECK(demo.lhs == 1);
  CHECK(demo.holds);
  const auto d = degree_relation_check(diag_lambda_one());
  CHECK(d.spf == 1);
  CHECK(d.lhs == -1);
  CHECK(d.rhs == -1);
  CHECK(degree_relation_check(constant_path()).holds);
}

TEST_CASE("three spectral flow algorithms agree on random paths") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 120; ++t) {
    const int d = 1 + static_cast<int>(rng() % 8);
    const auto p = gen::random_path(rng, d);
    const Mat La = p.at(-1.0), Lb = p.at(1.0);
    const int e = spectral_flow_endpoints(La, Lb);
    CHECK(spectral_flow_crossings(p).spf == e);
    CHECK(spectral_flow_signature(La, Lb) == e);
    CHECK(morse_index(La) - morse_index(Lb) == e);
    CHECK(degree_relation_check(p).holds);
  }
}

TEST_CASE("concatenation additivity") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int t = 0; t < 60; ++t) {
    const auto p = gen::random_path(rng, 1 + static_cast<int>(rng() % 6));
    double c = u(rng);
    while (symmetric_eigenvalues(p.at(c)).cwiseAbs().minCoeff() < 1e-3) c = u(rng);
    const int whole = spectral_flow_crossings(p).spf;
    const int left = spectral_flow_crossings(sub_path(p, -1.0, c)).spf;
    const int right = spectral_flow_crossings(sub_path(p, c, 1.0)).spf;
    CHECK(whole == left + right);
  }
}

TEST_CASE("interior perturbations keep the crossing count") {
  std::mt19937_64 rng(44);
  for (int fixture = 0; fixture < 3; ++fixture) {
    const auto p = gen::random_path(rng, 3 + fixture, 0.2);
    const double gap = std::min(symmetric_eigenvalues(p.at(-1.0)).cwiseAbs().minCoeff(),
                                symmetric_eigenvalues(p.at(1.0)).cwiseAbs().minCoeff());
    const int base = spectral_flow_crossings(p).spf;
    for (int trial = 0; trial < 100; ++trial) {
      Mat N = gen::random_symmetric(rng, p.dim);
      N *= 0.49 * gap / N.norm();
      SymOperatorPath q = p;
      // the bump vanishes at both ends, keeping the endpoints fixed
      q.at = [p, N](double l) { return Mat(p.at(l) + (1.0 - l * l) * N); };
      CHECK(spectral_flow_crossings(q).spf == base);
    }
  }
}

TEST_CASE("path variation shrinks under refinement") {
  const auto p = hessian_path(radial_demo_family());
  const double coarse = path_variation(p, 51), fine = path_variation(p, 101);
  CHECK(fine < coarse);
  CHECK(fine <= 0.55 * coarse);
}

TEST_CASE("eigenvalue trace") {
  const auto tr = eigenvalue_trace(diag_lambda_one());
  CHECK(tr.lambda.size() == 201);
  CHECK(tr.eigenvalues.front()[0] == doctest::Approx(-1.0));
  CHECK(tr.eigenvalues.back()[1] == doctest::Approx(1.0));
}
