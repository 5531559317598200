#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "critflow/bifurcate.hpp"
#include "critflow/error.hpp"
#include "critflow/registry.hpp"

using namespace critflow;
using namespace critflow::bifurcate;

namespace {

// mpmath oracles for the radial demo family.
constexpr double kCircleRadius = 1.44300046816469139598;  // (3 + sqrt(73)) / 8
constexpr double kTerminalValue = -2.83342240900035112354;
constexpr double kBifurcation = 0.216346895938785459658;  // (2 / pi) arcsin(1 / 3)
constexpr double kFoldLambda = -0.0429069146226788019646;
constexpr double kFoldValue = 0.12040855292336061322;

const BranchSet& demo_scan() {
  static const BranchSet br = [] {
    ScanOptions o;
    o.slices = 400;
    return scan_critical_pairs(radial_demo_family(), o);
  }();
  return br;
}

const Component& main_component(const BranchSet& br) {
  const Component* best = nullptr;
  for (const auto& c : br.components)
    if (c.touches_trivial && (!best || c.nontrivial > best->nontrivial)) best = &c;
  REQUIRE(best != nullptr);
  return *best;
}

}  // namespace

TEST_CASE("demo slices") {
  const auto f = radial_demo_family();
  const auto seeds = ring_seeds(2);
  SUBCASE("lambda = -1 has only the origin") {
    const auto s = critical_points_slice(f, -1.0, seeds);
    REQUIRE(s.points.size() == 1);
    CHECK(s.points[0].x.norm() <= 1e-8);
  }
  SUBCASE("lambda = 1 has the origin and a circle of radius R") {
    const auto s = critical_points_slice(f, 1.0, seeds);
    int on_circle = 0;
    for (const auto& cp : s.points) {
      if (cp.x.norm() < 1e-6) continue;
      ++on_circle;
      CHECK(cp.x.norm() == doctest::Approx(kCircleRadius).epsilon(1e-9));
      CHECK(cp.value == doctest::Approx(kTerminalValue).epsilon(1e-9));
    }
    CHECK(on_circle >= 8);
  }
  SUBCASE("newton from a single seed") {
    const auto cp = newton_critical_point(f, 1.0, (Vec(2) << 1.0, 1.0).finished());
    REQUIRE(cp.has_value());
    CHECK(cp->grad_norm <= 1e-9);
    CHECK(cp->x.norm() == doctest::Approx(kCircleRadius).epsilon(1e-9));
  }
}

TEST_CASE("ring and ball seeds") {
  const auto r2 = ring_seeds(2, 16, 0.25, 10);
  CHECK(r2.size() == 1 + 16 * 10);
  CHECK(r2.front().norm() == 0.0);
  const auto r3 = ring_seeds(3, 8, 0.5, 2);
  CHECK(r3.size() == 1 + 8 * 2 + 2 * 3 * 2);
  const auto b = ball_seeds(Vec::Zero(3), 0.7, 50, 9);
  CHECK(b.size() == 50);
  for (const auto& x : b) CHECK(x.norm() <= 0.7);
  CHECK(ball_seeds(Vec::Zero(3), 0.7, 50, 9).front() == b.front());
}

TEST_CASE("scan invariants on the demo") {
  const auto f = radial_demo_family();
  const auto& br = demo_scan();
  CHECK(br.lambdas.size() == 400);
  CHECK(br.nontrivial_count() > 0);
  std::set<int> trivial_slices;
  for (std::size_t i = 0; i < br.pairs.size(); ++i) {
    const auto& p = br.pairs[i];
    CHECK(p.grad_norm <= 1e-8);
    CHECK(std::abs(f.eval(p.lambda, p.witness) - p.y) <= 1e-10);
    CHECK(p.lambda == br.lambdas[static_cast<std::size_t>(p.slice)]);
    if (p.kind == PairKind::Trivial) {
      trivial_slices.insert(p.slice);
      CHECK(p.y == 0.0);
    } else {
      CHECK(p.witness.norm() > 1e-5);
    }
    if (i > 0) {
      const auto& q = br.pairs[i - 1];
      CHECK((q.slice < p.slice || (q.slice == p.slice && q.y <= p.y)));
    }
  }
  // The origin is critical with value 0 on every slice.
  CHECK(trivial_slices.size() == br.lambdas.size());

  const double dl = br.step;
  for (const auto& [i, j] : br.links) {
    const auto& p = br.pairs[i];
    const auto& q = br.pairs[j];
    CHECK(std::abs(p.slice - q.slice) <= 1);
    const double slope = std::max(std::abs(p.slope), std::abs(q.slope));
    CHECK(std::abs(p.y - q.y) <= 2.0 * dl * (1.0 + slope) + 1e-12);
  }
  // Components are the connected classes of the (undirected) link graph.
  std::map<std::size_t, int> comp_of;
  for (const auto& c : br.components)
    for (auto m : c.members) comp_of[m] = c.id;
  for (const auto& [i, j] : br.links) {
    if (br.pairs[i].kind == PairKind::NonTrivial && br.pairs[j].kind == PairKind::NonTrivial) {
      CHECK(comp_of.at(i) == comp_of.at(j));
    }
  }
  for (std::size_t i = 0; i < br.pairs.size(); ++i) {
    if (br.pairs[i].kind == PairKind::NonTrivial) CHECK(comp_of.count(i) == 1);
  }
}

TEST_CASE("demo landmarks") {
  const auto f = radial_demo_family();
  const auto& br = demo_scan();
  const auto lm = landmarks(f, br, main_component(br));
  REQUIRE(lm.bifurcations.size() == 1);
  CHECK(std::abs(lm.bifurcations[0].lambda - kBifurcation) <= 2e-3);
  CHECK(lm.bifurcations[0].bracket_lo <= kBifurcation + 1e-9);
  CHECK(lm.bifurcations[0].bracket_hi >= kBifurcation - 1e-9);
  REQUIRE(lm.folds.size() == 1);
  CHECK(std::abs(lm.folds[0].lambda - kFoldLambda) <= 2e-3);
  CHECK(std::abs(lm.folds[0].y - kFoldValue) <= 2e-3);
  REQUIRE(!lm.zero_crossings.empty());
  bool unit_radius = false;
  for (const auto& z : lm.zero_crossings) {
    if (std::abs(z.lambda) <= 2e-3 && std::abs(z.witness_norm - 1.0) <= 1e-3) unit_radius = true;
  }
  CHECK(unit_radius);
  REQUIRE(!lm.terminal.empty());
  CHECK(std::abs(lm.terminal.front().y - kTerminalValue) <= 1e-3);
}

TEST_CASE("landmark brackets shrink with the slice step") {
  const auto f = radial_demo_family();
  ScanOptions o;
  o.slices = 101;
  const auto coarse = scan_critical_pairs(f, o);
  o.slices = 201;
  const auto fine = scan_critical_pairs(f, o);
  const auto lc = landmarks(f, coarse, main_component(coarse));
  const auto lf = landmarks(f, fine, main_component(fine));
  REQUIRE(lc.bifurcations.size() == 1);
  REQUIRE(lf.bifurcations.size() == 1);
  const double wc = lc.bifurcations[0].bracket_hi - lc.bifurcations[0].bracket_lo;
  const double wf = lf.bifurcations[0].bracket_hi - lf.bifurcations[0].bracket_lo;
  CHECK(wf <= 0.5 * wc + 1e-12);
  CHECK(std::abs(lf.bifurcations[0].lambda - kBifurcation) <= std::abs(lc.bifurcations[0].lambda - kBifurcation) + 1e-6);
}

TEST_CASE("classification examples") {
  ScanOptions o;
  o.slices = 200;
  const auto demo = classify_alternatives(radial_demo_family(), o);
  CHECK(demo.overall == Alternative::IntersectsLambdaBoundary);
  CHECK(demo.window_doublings == 0);
  CHECK(classify_alternatives(quadratic_family(2), o).overall == Alternative::NoBranch);
  const auto bump = classify_alternatives(resolve_family("bump"), o);
  CHECK(bump.overall == Alternative::Neither);
  CHECK(to_string(Alternative::UnboundedInWindow) == "UnboundedInWindow");
}

TEST_CASE("small windows grow or raise") {
  ScanOptions o;
  o.slices = 100;
  o.window = 2.0;
  try {
    scan_critical_pairs(radial_demo_family(), o);
    FAIL("expected WindowTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowTooSmall);
  }
  const auto c = classify_alternatives(radial_demo_family(), o);
  CHECK(c.window_doublings == 1);
  CHECK(c.branch.window == 4.0);
  CHECK(c.overall == Alternative::IntersectsLambdaBoundary);
}

TEST_CASE("component classification on synthetic branches") {
  BranchSet br;
  for (int k = 0; k <= 10; ++k) br.lambdas.push_back(-1.0 + 0.2 * k);
  br.step = 0.2;
  br.window = 5.0;
  Component c;
  c.nontrivial = 3;
  c.lambda_min = -0.4;
  c.lambda_max = 0.4;
  CHECK(classify_component(br, c) == Alternative::Neither);
  c.touches_window = true;
  CHECK(classify_component(br, c) == Alternative::UnboundedInWindow);
  c.lambda_max = 1.0;
  CHECK(classify_component(br, c) == Alternative::IntersectsLambdaBoundary);
  c.nontrivial = 0;
  CHECK(classify_component(br, c) == Alternative::NoBranch);
}

TEST_CASE("hypothesis verification") {
  HypothesisConfig cfg;
  const auto demo = verify_hypotheses(radial_demo_family(), cfg);
  CHECK(demo.ps_ok);
  CHECK(demo.partf_bounded_ok);
  CHECK(demo.nonbif_endpoints_ok);
  CHECK(demo.pair_inequivalent_ok);
  CHECK(demo.all());
  CHECK(demo.pair_method == "homology");

  const auto quad = verify_hypotheses(quadratic_family(2), cfg);
  CHECK_FALSE(quad.pair_inequivalent_ok);
  CHECK(quad.ps_ok);

  CHECK_FALSE(verify_hypotheses(resolve_family("partf-unbounded"), cfg).partf_bounded_ok);
  CHECK_FALSE(verify_hypotheses(resolve_family("ps-violation"), cfg).ps_ok);
}

TEST_CASE("hypotheses imply a global alternative on the built-in families") {
  ScanOptions o;
  o.slices = 200;
  for (const auto& e : builtin_families()) {
    CAPTURE(e.name);
    const auto f = e.make();
    if (!verify_hypotheses(f).all()) continue;
    CHECK(classify_alternatives(f, o).overall != Alternative::Neither);
  }
}

TEST_CASE("separating curves and the global certificate") {
  ScanOptions o;
  o.slices = 201;
  o.strict_window = false;
  SUBCASE("demo branch reaches lambda = 1") {
    const auto br = scan_critical_pairs(radial_demo_family(), o);
    CHECK_FALSE(separating_curves(br, 0.05).has_value());
    const auto cert = global_branch_certificate(br, 0.05);
    CHECK(cert.global_branch);
    CHECK(cert.lower.kind == plane::Separation::Kind::Component);
  }
  SUBCASE("bump branch is enclosed") {
    const auto br = scan_critical_pairs(resolve_family("bump"), o);
    const auto sc = separating_curves(br, 0.05);
    REQUIRE(sc.has_value());
    for (double l : {-1.0, 1.0}) {
      CHECK(sc->a(l) == doctest::Approx(-0.05));
      CHECK(sc->b(l) == doctest::Approx(0.05));
    }
    for (const auto& p : br.pairs) {
      if (p.kind != PairKind::NonTrivial || p.component < 0) continue;
      CHECK(sc->a(p.lambda) < p.y);
      CHECK(p.y < sc->b(p.lambda));
    }
    const auto cert = global_branch_certificate(br, 0.05);
    CHECK_FALSE(cert.global_branch);
    CHECK(cert.upper.kind == plane::Separation::Kind::Curve);
    CHECK(cert.lower.kind == plane::Separation::Kind::Curve);
  }
}

TEST_CASE("eversion report") {
  EversionOptions o;
  o.slices = 400;
  const auto r = demo_eversion_report(o);
  CHECK(r.spf_endpoints == -2);
  CHECK(r.spf_crossings == -2);
  CHECK(r.spf_signature == -2);
  CHECK(r.degree_product == 1);
  CHECK(r.morse_minus == 0);
  CHECK(r.morse_plus == 2);
  CHECK(r.circle_radius > 1.0);
  CHECK(r.circle_radius < 2.0);
  CHECK(std::abs(r.circle_radius - kCircleRadius) <= 1e-6);
  CHECK(std::abs(r.circle_radius - (3.0 + std::sqrt(73.0)) / 8.0) <= 1e-6);
  CHECK(r.circle_value == doctest::Approx(kTerminalValue).epsilon(1e-9));
  CHECK(r.classification == Alternative::IntersectsLambdaBoundary);
  CHECK(r.betti_minus == topology::BettiVector{{1, 0, 0}});
  CHECK(r.betti_plus == topology::BettiVector{{0, 0, 1}});
}
