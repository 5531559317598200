#include <doctest.h>

#include <cmath>
#include <random>

#include "critflow/critical_points.hpp"
#include "critflow/error.hpp"
#include "critflow/registry.hpp"
#include "critflow/topology.hpp"

using namespace critflow;
using namespace critflow::topology;

namespace {
GridParams params(double h) {
  GridParams p;
  p.h = h;
  return p;
}

std::function<double(const Vec&)> slice(const FunctionalFamily& f, double l) {
  return [f, l](const Vec& x) { return f.eval(l, x); };
}

BettiVector betti(std::initializer_list<int> v) { return BettiVector{std::vector<int>(v)}; }

Vec recentre(const FunctionalFamily& f, double l) {
  const auto cp = bifurcate::newton_critical_point(f, l, Vec::Zero(f.dim));
  REQUIRE(cp.has_value());
  return cp->x;
}
}  // namespace

TEST_CASE("sublevel complex extremes and face closure") {
  const auto g = CubicalGrid::sample([](const Vec& x) { return x.squaredNorm(); }, Box::cube(2, 2.0), 0.1);
  CHECK(sublevel_complex(g, -1.0).size() == 0);
  const auto full = sublevel_complex(g, 100.0);
  CHECK(full.size() == g.cell_count());
  const auto disk = sublevel_complex(g, 1.005);
  CHECK(is_face_closed(g, disk));
  CHECK(is_face_closed(g, full));
  CubicalPair p{&g, -std::numeric_limits<double>::infinity(), 1.005};
  CHECK(relative_betti(p).betti == betti({1, 0, 0}));
}

TEST_CASE("full pair has trivial homology") {
  const auto g = CubicalGrid::sample([](const Vec& x) { return x[0]; }, Box::cube(2, 1.0), 0.1);
  CubicalPair p{&g, 10.0, 20.0};
  const auto rh = relative_betti(p);
  CHECK(rh.betti == betti({0, 0, 0}));
}

TEST_CASE("demo sublevel pairs at both ends") {
  const auto f = radial_demo_family();
  const auto minus = sublevel_pair_homology(slice(f, -1.0), f.domain, -0.05, 0.05, params(0.01));
  const auto plus = sublevel_pair_homology(slice(f, 1.0), f.domain, -0.05, 0.05, params(0.01));
  CHECK(minus.betti == betti({1, 0, 0}));
  CHECK(plus.betti == betti({0, 0, 1}));
  CHECK(minus.betti.euler() == minus.cell_euler());
  CHECK(plus.betti.euler() == plus.cell_euler());
}

TEST_CASE("mesh halving leaves Betti vectors unchanged") {
  const auto f = radial_demo_family();
  for (double l : {-1.0, 1.0}) {
    const auto a = sublevel_pair_homology(slice(f, l), f.domain, -0.05, 0.05, params(0.02));
    const auto b = sublevel_pair_homology(slice(f, l), f.domain, -0.05, 0.05, params(0.01));
    CHECK(a.betti == b.betti);
  }
  const auto two = resolve_family("two-minimum");
  const auto s = resolve_family("saddle");
  for (double h : {0.04, 0.02}) {
    CHECK(sublevel_pair_homology(slice(two, 0.0), two.domain, -0.1, 0.1, params(h)).betti == betti({2, 0, 0}));
    CHECK(sublevel_pair_homology(slice(s, 0.0), Box::cube(2, 1.0), -0.1, 0.1, params(h)).betti == betti({0, 1, 0}));
  }
}

TEST_CASE("direct sum over two minima") {
  const auto two = resolve_family("two-minimum");
  const auto rh = sublevel_pair_homology(slice(two, 0.0), two.domain, -0.1, 0.1, params(0.01));
  CHECK(rh.betti == betti({2, 0, 0}));
  const Vec left = (Vec(2) << -1.0, 0.0).finished();
  const Vec right = (Vec(2) << 1.0, 0.0).finished();
  const auto cl = critical_groups_local(two, 0.0, left, 0.4, 0.05, 0.01);
  const auto cr = critical_groups_local(two, 0.0, right, 0.4, 0.05, 0.01);
  CHECK(cl[0] + cr[0] == rh.betti[0]);
  CHECK(cl[1] + cr[1] == rh.betti[1]);
}

TEST_CASE("critical groups of Morse points") {
  const Vec o = Vec::Zero(2);
  CHECK(critical_groups_local(quadratic_family(2), 0.0, o, 0.5, 0.05, 0.01) == betti({1, 0, 0}));
  CHECK(critical_groups_local(resolve_family("saddle"), 0.0, o, 0.5, 0.05, 0.01) == betti({0, 1, 0}));
  CHECK(critical_groups_local(radial_demo_family(), 1.0, o, 0.5, 0.05, 0.01) == betti({0, 0, 1}));
}

TEST_CASE("critical groups are stable under small bumps") {
  auto bumped = [](const FunctionalFamily& f, double delta) {
    return make_family(
        f.name + "-bumped", f.dim,
        [f, delta](double l, const Vec& x) {
          const Vec c = (Vec(2) << 0.1, -0.05).finished();
          return f.eval(l, x) + delta * std::exp(-(x - c).squaredNorm() / 0.05);
        },
        {}, {}, {}, f.domain);
  };
  const Vec o = Vec::Zero(2);
  for (const auto& f : {quadratic_family(2), resolve_family("saddle"), radial_demo_family()}) {
    CAPTURE(f.name);
    const double l = 1.0;
    const auto base = critical_groups_local(f, l, o, 0.5, 0.05, 0.01);
    const auto g = bumped(f, 1e-3);
    // the critical point moves slightly; recentre on it
    const auto cp = recentre(g, l);
    CHECK(critical_groups_local(g, l, cp, 0.5, 0.05, 0.01) == base);
  }
}

TEST_CASE("critical groups detect non-isolated points and wide bands") {
  const auto f = radial_demo_family();
  const Vec on_circle = (Vec(2) << 1.4430004681646913, 0.0).finished();
  CHECK_THROWS_AS(critical_groups_local(f, 1.0, on_circle, 0.3, 0.05, 0.01), Error);
  try {
    critical_groups_local(f, 1.0, on_circle, 0.3, 0.05, 0.01);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotIsolated);
  }
  const auto two = resolve_family("two-minimum");
  const Vec left = (Vec(2) << -1.0, 0.0).finished();
  try {
    // the saddle at the origin has value 1 at distance 1
    critical_groups_local(two, 0.0, left, 0.6, 1.0, 0.01);
    FAIL("expected EpsilonTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EpsilonTooLarge);
  }
}

TEST_CASE("pair inequivalence certificate") {
  const auto f = radial_demo_family();
  const auto c = pair_inequivalence_certificate(f, -1.0, 1.0, 0.05, params(0.01));
  CHECK(c.verdict == PairVerdict::Inequivalent);
  CHECK(c.betti_first == betti({1, 0, 0}));
  CHECK(c.betti_second == betti({0, 0, 1}));
  CHECK(pair_inequivalence_certificate(f, 1.0, 1.0, 0.05, params(0.02)).verdict == PairVerdict::Indistinguishable);
  CHECK(pair_inequivalence_certificate(quadratic_family(2), -1.0, 1.0, 0.05, params(0.02)).verdict ==
        PairVerdict::Indistinguishable);
}

TEST_CASE("cell budget guard") {
  const auto f = radial_demo_family();
  GridParams p = params(0.01);
  p.cell_budget = 1000;
  try {
    sublevel_pair_homology(slice(f, -1.0), f.domain, -0.05, 0.05, p);
    FAIL("expected OutOfMemory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfMemory);
  }
}

TEST_CASE("thresholds on grid values shift the grid") {
  // x0 takes the value 0 exactly on a grid column; the retry shifts it away.
  const auto rh = sublevel_pair_homology([](const Vec& x) { return x[0] * x[0] + x[1] * x[1] - 0.25; },
                                         Box::cube(2, 1.0), -1.0, 0.0, params(0.05));
  CHECK(rh.betti == betti({1, 0, 0}));
  GridParams none = params(0.05);
  none.shift_retries = 0;
  try {
    sublevel_pair_homology([](const Vec& x) { return x[0]; }, Box::cube(2, 1.0), -1.5, 0.0, none);
    FAIL("expected ThresholdOnGrid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ThresholdOnGrid);
  }
}

TEST_CASE("three-dimensional pairs") {
  GridParams p = params(0.1);
  const Box box = Box::cube(3, 1.0);
  const auto min3 = sublevel_pair_homology([](const Vec& x) { return x.squaredNorm(); }, box, -0.05, 0.05, p);
  CHECK(min3.betti == betti({1, 0, 0, 0}));
  const auto max3 = sublevel_pair_homology([](const Vec& x) { return -x.squaredNorm(); }, box, -0.05, 0.05, p);
  CHECK(max3.betti == betti({0, 0, 0, 1}));
  const auto sad = sublevel_pair_homology(
      [](const Vec& x) { return x[0] * x[0] + x[1] * x[1] - x[2] * x[2]; }, box, -0.05, 0.05, p);
  CHECK(sad.betti == betti({0, 1, 0, 0}));
  const auto sad2 = sublevel_pair_homology(
      [](const Vec& x) { return x[0] * x[0] - x[1] * x[1] - x[2] * x[2]; }, box, -0.05, 0.05, p);
  CHECK(sad2.betti == betti({0, 0, 1, 0}));
  CHECK(sad2.betti.euler() == sad2.cell_euler());
}

TEST_CASE("union-find ranks agree with column reduction on random functions") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const double c[6] = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    auto fn = [c](const Vec& x) {
      return std::sin(3 * c[0] * x[0] + c[1]) * std::cos(3 * c[2] * x[1] + c[3]) + c[4] * x[0] * x[1] + 0.2 * c[5];
    };
    const auto g = CubicalGrid::sample(fn, Box::cube(2, 1.0), 0.05);
    const double a = u(rng) * 0.5 - 0.0123, b = a + 0.3 + 0.5 * std::abs(u(rng));
    CubicalPair p{&g, a, b};
    const auto fast = relative_betti(p);
    const auto slow = relative_betti(p, kDefaultCellBudget, true);
    CHECK(fast.betti == slow.betti);
    CHECK(fast.betti.euler() == fast.cell_euler());
  }
}

TEST_CASE("gf2 rank") {
  CHECK(gf2_rank({}) == 0);
  CHECK(gf2_rank({{0, 1}, {1, 2}, {0, 2}}) == 2);
  CHECK(gf2_rank({{0}, {1}, {2}}) == 3);
  CHECK(gf2_rank({{0, 1}, {0, 1}}) == 1);
}

TEST_CASE("non-finite values are rejected") {
  try {
    sublevel_pair_homology([](const Vec& x) { return x[0] > 0.5 ? std::nan("") : 0.3; }, Box::cube(2, 1.0), -0.1,
                           0.1, params(0.1));
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
  }
}

TEST_CASE("pair svg") {
  const auto f = radial_demo_family();
  const auto g = CubicalGrid::sample(slice(f, 1.0), f.domain, 0.05);
  const auto svg = render_pair_svg(g, -0.05, 0.05);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}
