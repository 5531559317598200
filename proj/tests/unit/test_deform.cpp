#include <doctest.h>

#include <cmath>
#include <random>

#include "critflow/bifurcate.hpp"
#include "critflow/deform.hpp"
#include "critflow/error.hpp"
#include "critflow/registry.hpp"

using namespace critflow;
using namespace critflow::deform;

namespace {

FunctionalFamily shifted_quadratic() {
  return make_family(
      "shifted", 2, [](double l, const Vec& x) { return x.squaredNorm() + 0.25 * l; },
      [](double, const Vec& x) { return Vec(2.0 * x); }, [](double, const Vec&) { return Mat(2.0 * Mat::Identity(2, 2)); },
      [](double, const Vec&) { return 0.25; }, Box::cube(2, 3.0));
}

SampleSpec coarse(int samples = 21, double h = 0.05) {
  SampleSpec s;
  s.lambda_samples = samples;
  s.h = h;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("level band") {
  LevelBand b{0.0, 1.0, 0.1};
  CHECK(b.levels().size() == 2);
  CHECK(b.contains(0.05));
  CHECK(b.contains(0.95));
  CHECK_FALSE(b.contains(0.5));
  CHECK(b.distance(0.3) == doctest::Approx(0.3));
  LevelBand single{2.0, std::nullopt, 0.5};
  CHECK(single.levels().size() == 1);
}

TEST_CASE("cutoff shape") {
  CHECK(cutoff(0.0, 0.2) == 1.0);
  CHECK(cutoff(0.1, 0.2) == 1.0);
  CHECK(cutoff(0.2, 0.2) == 0.0);
  CHECK(cutoff(0.5, 0.2) == 0.0);
  double prev = 1.0;
  for (int k = 0; k <= 100; ++k) {
    const double c = cutoff(0.1 + 0.001 * k, 0.2);
    CHECK(c <= prev);
    CHECK(c >= 0.0);
    prev = c;
  }
}

TEST_CASE("gradient floor examples") {
  const double floor = gradient_floor(quadratic_family(2), -1.0, 1.0, 1.0, 0.1, coarse(5, 0.02));
  CHECK(floor >= 2.0 * std::sqrt(0.9) - 1e-9);
  CHECK(floor == doctest::Approx(2.0 * std::sqrt(0.9)).epsilon(0.01));
  CHECK(code_of([] { gradient_floor(quadratic_family(2), -1.0, 1.0, 0.0, 0.1, coarse(5)); }) ==
        ErrorCode::SingularLevel);
}

TEST_CASE("demo level -0.05 is regular before the branch reaches it") {
  // The outer branch value passes -0.05 at lambda = 0.0155190781.
  const auto f = radial_demo_family();
  const double floor = gradient_floor(f, -1.0, 0.0, -0.05, 0.01, coarse(41));
  CHECK(floor > 0.01);
  const auto st = band_statistics(f, -1.0, 1.0, LevelBand{-0.05, std::nullopt, 0.01}, coarse(201));
  CHECK(st.floor < 1e-6);
  CHECK(std::abs(st.worst_lambda - 0.0155190781) <= 0.011);
}

TEST_CASE("a level crossing the branch is singular at the crossing") {
  // The branch value equals -1 at lambda = 0.2622811284.
  const auto f = radial_demo_family();
  const auto st = band_statistics(f, -1.0, 1.0, LevelBand{-1.0, std::nullopt, 0.05}, coarse(101));
  CHECK(st.floor < 1e-6);
  CHECK(std::abs(st.worst_lambda - 0.2622811284) <= 0.021);
  CHECK(code_of([&] {
          pair_transport(f, ScalarProfile::constant(-1.0), ScalarProfile::constant(0.5), TransportOptions{});
        }) == ErrorCode::SingularLevel);
}

TEST_CASE("transport field examples") {
  const auto q = quadratic_family(2);
  const auto field = transport_field(q, LevelBand{1.0, std::nullopt, 0.2}, 1.5, 0.0);
  const Vec on = (Vec(2) << 1.0, 0.0).finished();
  CHECK(field.descent(0.3, on) == doctest::Approx(-1.0));
  const Vec v = field(0.3, on);
  CHECK(v[0] == doctest::Approx(-0.5));
  const Vec far = (Vec(2) << 2.0, 0.0).finished();
  CHECK(field(0.3, far).norm() == 0.0);

  const auto s = shifted_quadratic();
  const auto fs = transport_field(s, LevelBand{1.0, std::nullopt, 0.2}, 1.5, 0.25);
  for (double l : {-0.5, 0.0, 0.5}) {
    const Vec x = (Vec(2) << std::sqrt(1.0 - 0.25 * l), 0.0).finished();
    CHECK(fs.descent(l, x) <= -1.0 + 1e-12);
  }
}

TEST_CASE("floor violations inside the band are detected") {
  const auto q = quadratic_family(2);
  const auto field = transport_field(q, LevelBand{0.01, std::nullopt, 0.02}, 1.0, 0.0);
  CHECK(code_of([&] { field(0.0, (Vec(2) << 0.05, 0.0).finished()); }) == ErrorCode::FloorViolated);
}

TEST_CASE("descent certificate and field bound on the demo band") {
  const auto f = radial_demo_family();
  const LevelBand band{-3.5, 0.5, 0.1};
  const auto spec = coarse(41, 0.05);
  const auto field = transport_field(f, band, spec);
  const double cert = descent_certificate(field, spec);
  CHECK(cert <= -0.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0), l(-1.0, 1.0);
  double vmax = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const Vec x = (Vec(2) << u(rng), u(rng)).finished();
    try {
      vmax = std::max(vmax, field(l(rng), x).norm());
    } catch (const Error&) {
    }
  }
  CHECK(vmax <= field.bound + 1e-9);
}

TEST_CASE("flows below the band do not move") {
  const auto q = quadratic_family(2);
  const auto field = transport_field(q, LevelBand{1.0, std::nullopt, 0.2}, 1.5, 0.0);
  const Vec x0 = (Vec(2) << 0.3, 0.2).finished();
  const auto tr = flow_integrate(field, -1.0, x0, 2.0, 0.01);
  CHECK((tr.end().x - x0).norm() == 0.0);
  CHECK(tr.max_overshoot == 0.0);
}

TEST_CASE("RK4 order: composition and halving") {
  const auto s = shifted_quadratic();
  const auto field = transport_field(s, LevelBand{1.0, std::nullopt, 0.5}, 1.0, 0.25);
  const Vec x0 = (Vec(2) << 1.1, 0.3).finished();
  const double h = 0.01, T = 1.5;
  const auto whole = flow_integrate(field, -0.5, x0, T, h, 0);
  const auto first = flow_integrate(field, -0.5, x0, 0.537, h, 0);
  const auto second = flow_integrate(field, -0.5 + 0.537, first.end().x, T - 0.537, h, 0);
  CHECK((whole.end().x - second.end().x).norm() <= 10.0 * std::pow(h, 4) * T);
  const auto half = flow_integrate(field, -0.5, x0, T, h / 2, 0);
  const double e1 = (whole.end().x - half.end().x).norm();
  const auto quarter = flow_integrate(field, -0.5, x0, T, h / 4, 0);
  const double e2 = (half.end().x - quarter.end().x).norm();
  CHECK(e1 <= 10.0 * std::pow(h, 4) * T);
  if (e2 > 1e-14) CHECK(e1 / e2 > 8.0);
}

TEST_CASE("demo transport between fixed regular levels") {
  const auto f = radial_demo_family();
  TransportOptions opts;
  opts.starts = 40;
  opts.spec = coarse(41, 0.05);
  const auto w = pair_transport(f, ScalarProfile::constant(-3.5), ScalarProfile::constant(0.75), opts);
  CHECK(w.violations() == 0);
  CHECK(w.max_overshoot() <= kFlowTolerance);
  CHECK(w.forward.flows == 40);
  CHECK(w.flow_count() == 40 * 2 + 2 * 40 * 2 * 4);
}

TEST_CASE("lambda-independent family with constant levels") {
  TransportOptions opts;
  opts.starts = 30;
  opts.spec = coarse(11, 0.05);
  const auto w = pair_transport(quadratic_family(2), ScalarProfile::constant(0.5), ScalarProfile::constant(2.0), opts);
  CHECK(w.violations() == 0);
}

TEST_CASE("transport along separating curves of the closed loop family") {
  const auto f = resolve_family("bump");
  bifurcate::ScanOptions so;
  so.slices = 201;
  so.strict_window = false;
  const auto br = bifurcate::scan_critical_pairs(f, so);
  const auto curves = bifurcate::separating_curves(br, 0.05);
  REQUIRE(curves.has_value());
  TransportOptions opts;
  opts.starts = 30;
  opts.spec = coarse(81, 0.05);
  const auto w = pair_transport(f, curves->a, curves->b, opts);
  CHECK(w.violations() == 0);
}

TEST_CASE("rescaled family") {
  const auto f = radial_demo_family();
  const auto a = ScalarProfile::from([](double l) { return -1.0 + 0.2 * l; });
  const auto b = ScalarProfile::from([](double l) { return 1.0 + 0.1 * l * l; });
  const auto g = rescaled_family(f, a, b);
  const Vec x = (Vec(2) << 0.7, -0.2).finished();
  const double l = 0.3;
  CHECK(g.eval(l, x) == doctest::Approx((f.eval(l, x) - a(l)) / (b(l) - a(l))));
  const double fd = (g.eval(l + 1e-6, x) - g.eval(l - 1e-6, x)) / 2e-6;
  CHECK(g.lambda_grad(l, x) == doctest::Approx(fd).epsilon(1e-6));
}
