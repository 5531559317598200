#include <doctest.h>

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>

#include "critflow/error.hpp"
#include "critflow/plane.hpp"
#include "generators.hpp"

using namespace critflow;
using namespace critflow::plane;

namespace {

// Independent breadth-first oracles for the two alternatives.
bool occupied_crossing(const RectGrid& g) {
  std::vector<char> seen(g.occupied.size(), 0);
  std::deque<std::array<int, 2>> q;
  for (int i = 0; i < g.nx; ++i)
    if (g.at(i, 0)) {
      seen[g.index(i, 0)] = 1;
      q.push_back({i, 0});
    }
  while (!q.empty()) {
    const auto [i, j] = q.front();
    q.pop_front();
    if (j == g.ny - 1) return true;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= g.nx || b >= g.ny || !g.at(a, b) || seen[g.index(a, b)]) continue;
        seen[g.index(a, b)] = 1;
        q.push_back({a, b});
      }
  }
  return false;
}

bool free_crossing(const RectGrid& g) {
  std::vector<char> seen(g.occupied.size(), 0);
  std::deque<std::array<int, 2>> q;
  for (int j = 0; j < g.ny; ++j)
    if (!g.at(0, j)) {
      seen[g.index(0, j)] = 1;
      q.push_back({0, j});
    }
  const int step[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!q.empty()) {
    const auto [i, j] = q.front();
    q.pop_front();
    if (i == g.nx - 1) return true;
    for (const auto& s : step) {
      const int a = i + s[0], b = j + s[1];
      if (a < 0 || b < 0 || a >= g.nx || b >= g.ny || g.at(a, b) || seen[g.index(a, b)]) continue;
      seen[g.index(a, b)] = 1;
      q.push_back({a, b});
    }
  }
  return false;
}

void check_alternative(const RectGrid& g) {
  const bool occ = occupied_crossing(g), fr = free_crossing(g);
  CHECK(occ != fr);
  const auto sep = component_or_curve(g);
  if (sep.kind == Separation::Kind::Component) {
    CHECK(occ);
    CHECK(verify_component(g, sep.component));
    CHECK(sep.curve.points.empty());
  } else {
    CHECK(fr);
    CHECK(verify_curve(g, sep.curve));
    CHECK(sep.component.empty());
  }
}

}  // namespace

TEST_CASE("exactly one alternative on random masks") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 30);
  std::uniform_real_distribution<double> dens(0.2, 0.8);
  for (int t = 0; t < 1000; ++t) {
    const auto g = gen::random_mask(rng, size(rng), size(rng), dens(rng));
    CAPTURE(t);
    check_alternative(g);
  }
}

TEST_CASE("mask examples") {
  const auto empty = RectGrid::empty(7, 5);
  const auto se = component_or_curve(empty);
  CHECK(se.kind == Separation::Kind::Curve);
  CHECK(verify_curve(empty, se.curve));
  CHECK(se.curve.points.front()[0] == doctest::Approx(-1.0));
  CHECK(se.curve.points.back()[0] == doctest::Approx(1.0));

  const auto strip = mask_from_text("0010\n0010\n0100\n0100\n");
  const auto ss = component_or_curve(strip);
  CHECK(ss.kind == Separation::Kind::Component);
  CHECK(ss.component.size() == 4);

  // Two blobs, one touching each B-side, with a free corridor between them.
  const auto blobs = mask_from_text(
      "0011100\n"
      "0011100\n"
      "0000000\n"
      "1100011\n"
      "1100011\n");
  const auto sb = component_or_curve(blobs);
  CHECK(sb.kind == Separation::Kind::Curve);
  CHECK(verify_curve(blobs, sb.curve));
  for (const auto& p : sb.curve.points) {
    const auto c = blobs.cell_of(p);
    CHECK_FALSE(blobs.at(c[0], c[1]));
  }

  // A diagonal chain counts as 8-connected.
  const auto diag = mask_from_text("001\n010\n100\n");
  CHECK(component_or_curve(diag).kind == Separation::Kind::Component);
  CHECK(render_svg(diag, component_or_curve(diag)).find("<svg") == 0);
}

TEST_CASE("verifiers reject wrong witnesses") {
  const auto strip = mask_from_text("010\n010\n010\n");
  CHECK_FALSE(verify_component(strip, {strip.index(1, 0), strip.index(1, 1)}));
  CHECK_FALSE(verify_component(strip, {strip.index(0, 0), strip.index(0, 1), strip.index(0, 2)}));
  PlanarCurve through{{Point{-1.0, 0.0}, Point{0.0, 0.0}, Point{1.0, 0.0}}};
  CHECK_FALSE(verify_curve(strip, through));
  const auto empty = RectGrid::empty(3, 3);
  PlanarCurve jump{{Point{-1.0, 0.0}, Point{1.0, 0.0}}};
  CHECK_FALSE(verify_curve(empty, jump));
  PlanarCurve edge{{Point{-1.0, -1.0}, Point{-1.0 / 3.0, -1.0}, Point{1.0 / 3.0, -1.0}, Point{1.0, -1.0}}};
  CHECK_FALSE(verify_curve(empty, edge));
}

TEST_CASE("mask loaders") {
  const auto t = mask_from_text("10\n01\n00\n");
  CHECK(t.nx == 2);
  CHECK(t.ny == 3);
  CHECK(t.at(0, 2));
  CHECK(t.at(1, 1));
  CHECK_FALSE(t.at(0, 0));
  const auto j = mask_from_json(R"({"nx":2,"ny":3,"cells":[[0,2],[1,1]],"rect":[0,4,0,6]})");
  CHECK(j.occupied == t.occupied);
  CHECK(j.x1 == 4.0);
  CHECK_THROWS_AS(mask_from_text("10\n1\n"), Error);
  CHECK_THROWS_AS(mask_from_text("1x\n"), Error);
  CHECK_THROWS_AS(mask_from_json(R"({"nx":2,"ny":2,"cells":[[2,0]]})"), Error);
  CHECK_THROWS_AS(mask_from_json("{nope"), Error);

  const auto dir = std::filesystem::temp_directory_path() / "critflow-plane-test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "m.txt") << "10\n01\n00\n";
  std::ofstream(dir / "m.json") << R"(  {"nx":2,"ny":3,"cells":[[0,2],[1,1]]})";
  CHECK(load_mask((dir / "m.txt").string()).occupied == t.occupied);
  CHECK(load_mask((dir / "m.json").string()).occupied == t.occupied);
  std::filesystem::remove_all(dir);
}

namespace {

void check_reparam(const ScalarProfile& a, const ScalarProfile& b, double eps) {
  const auto r = common_value_reparametrization(a, b, eps);
  CHECK(r.residual <= 1e-6);
  CHECK(r.perturbation_a < eps);
  CHECK(r.perturbation_b < eps);
  CHECK(r.a_tilde(-1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.a_tilde(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.b_tilde(-1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.b_tilde(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(!r.path.empty());
  CHECK(r.path.front()[0] == doctest::Approx(-1.0));
  CHECK(r.path.front()[1] == doctest::Approx(-1.0));
  CHECK(r.path.back()[0] == doctest::Approx(1.0));
  CHECK(r.path.back()[1] == doctest::Approx(1.0));
  REQUIRE(r.t.size() == r.c.size());
  REQUIRE(r.t.size() == r.d.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    CHECK(std::abs(r.c[i]) <= 1.0 + 1e-12);
    CHECK(std::abs(r.d[i]) <= 1.0 + 1e-12);
    worst = std::max(worst, std::abs(r.a_tilde(r.c[i]) - r.b_tilde(r.d[i])));
  }
  CHECK(worst <= 1e-6);
}

}  // namespace

TEST_CASE("common value reparametrization fixtures") {
  SUBCASE("identity") { check_reparam(ScalarProfile::identity(), ScalarProfile::identity(), 0.05); }
  SUBCASE("t against t^3") {
    check_reparam(ScalarProfile::identity(), ScalarProfile::from([](double x) { return x * x * x; }), 0.05);
  }
  SUBCASE("non-monotone profiles") {
    // Both stay inside [-1, 1] and have interior extrema.
    check_reparam(ScalarProfile::from([](double x) { return x + 0.3 * std::sin(2 * M_PI * x); }),
                  ScalarProfile::from([](double x) { return x - 0.25 * std::sin(3 * M_PI * x); }), 0.05);
  }
  SUBCASE("random monotone profiles") {
    std::mt19937_64 rng(41);
    for (int k = 0; k < 20; ++k) {
      CAPTURE(k);
      check_reparam(gen::random_monotone(rng), gen::random_monotone(rng), 0.02);
    }
  }
}
