#include "critflow/bifurcate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "critflow/eigen_sym.hpp"
#include "critflow/error.hpp"
#include "critflow/parallel.hpp"
#include "critflow/spectral.hpp"

namespace critflow::bifurcate {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double max_abs_coord(const Box& box) { return std::max(box.lo.cwiseAbs().maxCoeff(), box.hi.cwiseAbs().maxCoeff()); }

/// Morse index of the Hessian at the origin, nudged off a kernel.
int origin_morse(const FunctionalFamily& family, double lambda) {
  for (int k = 0; k < 8; ++k) {
    const Mat L = family.hessian_at_origin(lambda + 1e-9 * k);
    const auto sd = jacobi_eigen(L);
    if (sd.kernel_count() == 0) return sd.negative_count();
  }
  return jacobi_eigen(family.hessian_at_origin(lambda)).negative_count();
}

/// Bisection on a change of the origin Morse index inside [lo, hi].
double refine_kernel_crossing(const FunctionalFamily& family, double lo, double hi) {
  const int mlo = origin_morse(family, lo);
  for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (origin_morse(family, mid) == mlo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

bool nontrivial_point(const CriticalPoint& cp, const ScanOptions& o) {
  return cp.x.norm() > o.trivial_radius || std::abs(cp.value) > o.value_tol;
}

}  // namespace

std::size_t BranchSet::nontrivial_count() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const CriticalPair& p) {
    return p.kind == PairKind::NonTrivial;
  }));
}

BranchSet scan_critical_pairs(const FunctionalFamily& family, const ScanOptions& opts) {
  require(opts.slices >= 2, "scan needs at least two slices");
  require(opts.lambda_lo < opts.lambda_hi, "lambda interval must satisfy lo < hi");
  require(opts.window > 0.0, "window must be positive");
  BranchSet out;
  out.options = opts;
  out.window = opts.window;
  out.step = (opts.lambda_hi - opts.lambda_lo) / (opts.slices - 1);
  for (int i = 0; i < opts.slices; ++i) out.lambdas.push_back(opts.lambda_lo + out.step * i);
  out.lambdas.back() = opts.lambda_hi;
  const auto seeds = opts.seeds.empty() ? ring_seeds(family.dim) : opts.seeds;

  std::vector<std::vector<CriticalPair>> per(out.lambdas.size());
  std::vector<int> dropped(out.lambdas.size(), 0);
  parallel_for(out.lambdas.size(), opts.jobs, [&](std::size_t i) {
    const double lambda = out.lambdas[i];
    const auto slice = critical_points_slice(family, lambda, seeds, opts.newton);
    dropped[i] = slice.dropped;
    std::vector<CriticalPair> pairs;
    bool has_trivial = false;
    for (const auto& cp : slice.points) {
      CriticalPair p;
      p.lambda = lambda;
      p.y = cp.value;
      p.witness = cp.x;
      p.grad_norm = cp.grad_norm;
      p.slope = family.lambda_grad(lambda, cp.x);
      p.kind = nontrivial_point(cp, opts) ? PairKind::NonTrivial : PairKind::Trivial;
      p.slice = static_cast<int>(i);
      has_trivial = has_trivial || p.kind == PairKind::Trivial;
      pairs.push_back(std::move(p));
    }
    const Vec origin = Vec::Zero(family.dim);
    const Vec g0 = family.grad(lambda, origin);
    if (!has_trivial && g0.norm() <= opts.newton.newton_tol && std::abs(family.eval(lambda, origin)) <= opts.value_tol) {
      pairs.push_back({lambda, family.eval(lambda, origin), origin, g0.norm(), family.lambda_grad(lambda, origin),
                       PairKind::Trivial, static_cast<int>(i), -1});
    }
    std::sort(pairs.begin(), pairs.end(), [](const CriticalPair& a, const CriticalPair& b) {
      if (a.kind != b.kind) return a.kind < b.kind;
      if (a.y != b.y) return a.y < b.y;
      return a.witness.norm() < b.witness.norm();
    });
    std::vector<CriticalPair> kept;
    for (auto& p : pairs) {
      const bool dup = !kept.empty() && kept.back().kind == p.kind &&
                       std::abs(kept.back().y - p.y) <= std::max(opts.value_tol, 1e-9 * (1.0 + std::abs(p.y)));
      if (!dup) kept.push_back(std::move(p));
    }
    std::sort(kept.begin(), kept.end(), [](const CriticalPair& a, const CriticalPair& b) { return a.y < b.y; });
    per[i] = std::move(kept);
  });
  for (std::size_t i = 0; i < per.size(); ++i) {
    out.dropped_seeds += dropped[i];
    for (auto& p : per[i]) out.pairs.push_back(std::move(p));
  }

  // Linking within the same and adjacent slices.
  std::vector<std::size_t> slice_start(out.lambdas.size() + 1, out.pairs.size());
  for (std::size_t k = out.pairs.size(); k-- > 0;) slice_start[static_cast<std::size_t>(out.pairs[k].slice)] = k;
  for (std::size_t s = out.lambdas.size(); s-- > 0;) slice_start[s] = std::min(slice_start[s], slice_start[s + 1]);

  UnionFind uf(out.pairs.size());
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    const auto& p = out.pairs[i];
    const auto s = static_cast<std::size_t>(p.slice);
    const std::size_t end = s + 2 < slice_start.size() ? slice_start[s + 2] : out.pairs.size();
    for (std::size_t j = i + 1; j < end; ++j) {
      const auto& q = out.pairs[j];
      if (p.kind == PairKind::Trivial && q.kind == PairKind::Trivial) continue;
      const double radius = 2.0 * out.step * (1.0 + std::max(std::abs(p.slope), std::abs(q.slope)));
      if (std::abs(p.y - q.y) <= radius) {
        uf.unite(i, j);
        out.links.emplace_back(i, j);
      }
    }
  }

  std::map<std::size_t, int> comp_of_root;
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    if (out.pairs[i].kind != PairKind::NonTrivial) continue;
    const auto r = uf.find(i);
    if (!comp_of_root.count(r)) {
      comp_of_root[r] = static_cast<int>(out.components.size());
      Component c;
      c.id = static_cast<int>(out.components.size());
      out.components.push_back(c);
    }
  }
  for (auto& c : out.components) {
    c.lambda_min = c.y_min = std::numeric_limits<double>::infinity();
    c.lambda_max = c.y_max = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    auto it = comp_of_root.find(uf.find(i));
    if (it == comp_of_root.end()) continue;
    auto& p = out.pairs[i];
    auto& c = out.components[static_cast<std::size_t>(it->second)];
    p.component = c.id;
    c.members.push_back(i);
    if (p.kind == PairKind::Trivial) {
      c.touches_trivial = true;
      continue;
    }
    ++c.nontrivial;
    c.lambda_min = std::min(c.lambda_min, p.lambda);
    c.lambda_max = std::max(c.lambda_max, p.lambda);
    c.y_min = std::min(c.y_min, p.y);
    c.y_max = std::max(c.y_max, p.y);
    c.touches_window = c.touches_window || std::abs(p.y) >= opts.window;
  }
  if (opts.strict_window) {
    for (const auto& c : out.components) {
      if (c.touches_window) {
        fail(ErrorCode::WindowTooSmall, "a branch component reaches |y| = " + std::to_string(opts.window));
      }
    }
  }
  return out;
}

BranchLandmarks landmarks(const FunctionalFamily& family, const BranchSet& branch, const Component& comp) {
  BranchLandmarks lm;
  const double dl = branch.step;
  const double lo = branch.lambdas.front(), hi = branch.lambdas.back();
  std::vector<std::size_t> nontrivial;
  for (auto i : comp.members)
    if (branch.pairs[i].kind == PairKind::NonTrivial) nontrivial.push_back(i);
  if (nontrivial.empty()) return lm;

  // Bifurcation from the trivial line: a kernel of the origin Hessian next to
  // a nontrivial pair with a small witness that is linked to a trivial pair.
  std::vector<double> seen;
  for (const auto& [i, j] : branch.links) {
    const auto& p = branch.pairs[i];
    const auto& q = branch.pairs[j];
    if (p.component != comp.id || (p.kind == PairKind::Trivial) == (q.kind == PairKind::Trivial)) continue;
    const auto& nt = p.kind == PairKind::NonTrivial ? p : q;
    if (nt.witness.norm() > 0.3) continue;
    const int s = nt.slice;
    const int s0 = std::max(0, s - 2), s1 = std::min(static_cast<int>(branch.lambdas.size()) - 1, s + 2);
    for (int k = s0; k < s1; ++k) {
      const double a = branch.lambdas[static_cast<std::size_t>(k)], b = branch.lambdas[static_cast<std::size_t>(k + 1)];
      if (origin_morse(family, a) == origin_morse(family, b)) continue;
      if (std::any_of(seen.begin(), seen.end(), [&](double x) { return std::abs(x - a) < 0.5 * dl; })) continue;
      seen.push_back(a);
      Landmark m;
      m.lambda = refine_kernel_crossing(family, a, b);
      m.y = 0.0;
      m.witness_norm = 0.0;
      m.bracket_lo = a;
      m.bracket_hi = b;
      lm.bifurcations.push_back(m);
    }
  }
  std::sort(lm.bifurcations.begin(), lm.bifurcations.end(), [](const Landmark& a, const Landmark& b) { return a.lambda < b.lambda; });

  // Folds: extreme-lambda pairs away from the parameter ends and the trivial line.
  auto fold_at = [&](std::size_t idx, double dir) {
    const auto& p = branch.pairs[idx];
    if (p.witness.norm() <= 0.05) return;
    double inside = p.lambda, outside = p.lambda + dir * dl;
    Vec w = p.witness;
    double y = p.y;
    auto accept = [&](double l) -> std::optional<CriticalPoint> {
      auto cp = newton_critical_point(family, l, w);
      if (!cp || cp->x.norm() <= 0.05 || (cp->x - w).norm() > 0.25 || std::abs(cp->value - y) > 0.25) return std::nullopt;
      return cp;
    };
    for (int it = 0; it < 60 && std::abs(outside - inside) > 1e-12; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (auto cp = accept(mid)) {
        inside = mid;
        w = cp->x;
        y = cp->value;
      } else {
        outside = mid;
      }
    }
    // A witness shrinking onto the trivial line marks a bifurcation, not a turning point.
    if (w.norm() < 0.1) return;
    Landmark m;
    m.lambda = inside;
    m.y = y;
    m.witness_norm = w.norm();
    m.bracket_lo = std::min(p.lambda, p.lambda + dir * dl);
    m.bracket_hi = std::max(p.lambda, p.lambda + dir * dl);
    lm.folds.push_back(m);
  };
  auto by_lambda = [&](std::size_t a, std::size_t b) { return branch.pairs[a].lambda < branch.pairs[b].lambda; };
  const auto lmin = *std::min_element(nontrivial.begin(), nontrivial.end(), by_lambda);
  const auto lmax = *std::max_element(nontrivial.begin(), nontrivial.end(), by_lambda);
  if (branch.pairs[lmin].lambda > lo + 0.5 * dl) fold_at(lmin, -1.0);
  if (branch.pairs[lmax].lambda < hi - 0.5 * dl) fold_at(lmax, 1.0);

  // Zero crossings of the value along links between nontrivial pairs.
  for (const auto& [i, j] : branch.links) {
    const auto& p = branch.pairs[i];
    const auto& q = branch.pairs[j];
    if (p.component != comp.id || p.kind != PairKind::NonTrivial || q.kind != PairKind::NonTrivial) continue;
    if (p.slice == q.slice || !(p.y * q.y < 0.0)) continue;
    double la = p.lambda, lb = q.lambda, ya = p.y, yb = q.y;
    Vec wa = p.witness, wb = q.witness;
    double l = la - ya * (lb - la) / (yb - ya);
    Vec w = wa + (l - la) / (lb - la) * (wb - wa);
    for (int it = 0; it < 40; ++it) {
      auto cp = newton_critical_point(family, l, w);
      if (!cp) break;
      w = cp->x;
      if (std::abs(cp->value) <= 1e-13) break;
      if ((cp->value > 0) == (ya > 0)) {
        la = l;
        ya = cp->value;
        wa = cp->x;
      } else {
        lb = l;
        yb = cp->value;
        wb = cp->x;
      }
      l = la - ya * (lb - la) / (yb - ya);
      w = wa + (l - la) / (lb - la) * (wb - wa);
    }
    if (std::any_of(lm.zero_crossings.begin(), lm.zero_crossings.end(), [&](const Landmark& m) {
          return std::abs(m.lambda - l) < 1e-6 && std::abs(m.witness_norm - w.norm()) < 1e-4;
        })) {
      continue;
    }
    Landmark m;
    m.lambda = l;
    m.y = family.eval(l, w);
    m.witness_norm = w.norm();
    m.bracket_lo = std::min(p.lambda, q.lambda);
    m.bracket_hi = std::max(p.lambda, q.lambda);
    lm.zero_crossings.push_back(m);
  }
  std::sort(lm.zero_crossings.begin(), lm.zero_crossings.end(), [](const Landmark& a, const Landmark& b) { return a.lambda < b.lambda; });

  const int last = static_cast<int>(branch.lambdas.size()) - 1;
  for (auto i : nontrivial) {
    const auto& p = branch.pairs[i];
    if (p.slice == last) lm.terminal.push_back({p.lambda, p.y, p.witness.norm(), p.lambda, p.lambda});
  }
  std::sort(lm.terminal.begin(), lm.terminal.end(), [](const Landmark& a, const Landmark& b) { return a.y < b.y; });
  return lm;
}

std::string to_string(Alternative a) {
  switch (a) {
    case Alternative::IntersectsLambdaBoundary: return "IntersectsLambdaBoundary";
    case Alternative::UnboundedInWindow: return "UnboundedInWindow";
    case Alternative::Neither: return "Neither";
    case Alternative::NoBranch: return "NoBranch";
  }
  return "NoBranch";
}

Alternative classify_component(const BranchSet& branch, const Component& comp) {
  if (comp.nontrivial == 0) return Alternative::NoBranch;
  const double lo = branch.lambdas.front(), hi = branch.lambdas.back();
  if (comp.lambda_min <= lo + 0.5 * branch.step || comp.lambda_max >= hi - 0.5 * branch.step) {
    return Alternative::IntersectsLambdaBoundary;
  }
  if (comp.touches_window) return Alternative::UnboundedInWindow;
  return Alternative::Neither;
}

Classification classify_alternatives(const FunctionalFamily& family, ScanOptions opts) {
  opts.strict_window = false;
  Classification out;
  for (;;) {
    out.branch = scan_critical_pairs(family, opts);
    const bool grows = std::any_of(out.branch.components.begin(), out.branch.components.end(),
                                   [](const Component& c) { return c.touches_trivial && c.touches_window; });
    if (!grows || out.window_doublings >= 3) break;
    opts.window *= 2.0;
    ++out.window_doublings;
  }
  bool any_intersects = false, any_unbounded = false;
  for (const auto& c : out.branch.components) {
    const auto a = classify_component(out.branch, c);
    out.per_component.push_back(a);
    if (!c.touches_trivial) continue;
    any_intersects = any_intersects || a == Alternative::IntersectsLambdaBoundary;
    any_unbounded = any_unbounded || a == Alternative::UnboundedInWindow;
  }
  if (out.branch.components.empty()) {
    out.overall = Alternative::NoBranch;
  } else if (any_intersects) {
    out.overall = Alternative::IntersectsLambdaBoundary;
  } else if (any_unbounded) {
    out.overall = Alternative::UnboundedInWindow;
  } else {
    out.overall = Alternative::Neither;
  }
  return out;
}

HypothesisReport verify_hypotheses(const FunctionalFamily& family, const HypothesisConfig& cfg) {
  HypothesisReport rep;
  const Box& box = family.domain;
  const double radius = max_abs_coord(box) * std::sqrt(static_cast<double>(family.dim));
  const double N = cfg.value_bound;

  // (i) Sequences driving |grad f| down from random starts; a sequence whose
  // gradient vanishes with bounded values while it runs off has no cluster point.
  {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, Vec>> starts;
    for (int k = 0; k < cfg.ps_starts; ++k) {
      Vec x(family.dim);
      for (int i = 0; i < family.dim; ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
      starts.emplace_back(-1.0 + 2.0 * unit(rng), x);
    }
    std::vector<double> final_norm(starts.size(), 0.0);
    std::vector<char> small(starts.size(), 0);
    parallel_for(starts.size(), cfg.jobs, [&](std::size_t k) {
      const double lambda = starts[k].first;
      Vec x = starts[k].second;
      Vec g = family.grad(lambda, x);
      double gn = g.norm();
      for (int it = 0; it < 150 && gn > 0.0 && x.norm() < 1e3; ++it) {
        const Mat H = family.hess(lambda, x);
        const auto sd = jacobi_eigen(H, 0.0);
        const double cut = std::max(1e-10 * sd.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
        Vec p = Vec::Zero(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
          if (std::abs(sd.eigenvalues[i]) > cut) p -= (sd.eigenvectors.col(i).dot(g) / sd.eigenvalues[i]) * sd.eigenvectors.col(i);
        if (p.norm() > 1.0) p /= p.norm();
        bool moved = false;
        for (const Vec& dir : {p, Vec(-(H * g))}) {
          if (!(dir.norm() > 1e-14)) continue;
          Vec d = dir.norm() > 1.0 ? Vec(dir / dir.norm()) : dir;
          for (double a = 1.0; a > 1e-8 && !moved; a *= 0.5) {
            const Vec y = x + a * d;
            const Vec gy = family.grad(lambda, y);
            if (std::isfinite(gy.norm()) && gy.norm() < gn) {
              moved = (y - x).norm() > 1e-13;
              x = y;
              g = gy;
              gn = gy.norm();
              break;
            }
          }
          if (moved) break;
        }
        if (!moved) break;
      }
      const double f = family.eval(lambda, x);
      final_norm[k] = x.norm();
      small[k] = gn <= 1e-4 && std::isfinite(f) && std::abs(f) <= N;
    });
    for (std::size_t k = 0; k < starts.size(); ++k) {
      if (!small[k]) continue;
      ++rep.ps_sequences;
      rep.ps_worst_norm = std::max(rep.ps_worst_norm, final_norm[k]);
      if (final_norm[k] > 2.0 * radius) ++rep.ps_escaping;
    }
    rep.ps_ok = rep.ps_escaping == 0;
  }

  // (ii) sup |df/dlambda| on {|f| <= N}, sampled on growing boxes.
  {
    bool finite = true;
    for (double scale : {1.0, 2.0, 4.0}) {
      const Box b = box.scaled(scale);
      std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(scale * 10));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      double sup = 0.0;
      for (int k = 0; k < cfg.partf_samples; ++k) {
        Vec x(family.dim);
        for (int i = 0; i < family.dim; ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * unit(rng);
        const double lambda = -1.0 + 2.0 * unit(rng);
        const double f = family.eval(lambda, x);
        if (!std::isfinite(f) || std::abs(f) > N) continue;
        const double d = std::abs(family.lambda_grad(lambda, x));
        if (!std::isfinite(d)) finite = false;
        sup = std::max(sup, std::isfinite(d) ? d : std::numeric_limits<double>::infinity());
      }
      rep.partf_sup.push_back(sup);
    }
    rep.partf_bounded_ok = finite && std::isfinite(rep.partf_sup.back()) &&
                           rep.partf_sup.back() <= 10.0 * (1.0 + rep.partf_sup.front());
  }

  // (iii) Nontrivial pairs inside the balls around (+-1, 0).
  {
    const double e = cfg.endpoint_eps;
    auto seeds = ring_seeds(family.dim);
    for (const auto& s : ball_seeds(Vec::Zero(family.dim), 0.5, 64, cfg.seed)) seeds.push_back(s);
    rep.endpoint_closest = std::numeric_limits<double>::infinity();
    std::vector<double> lambdas;
    for (double c : {-1.0, 1.0})
      for (int k = 0; k <= 20; ++k) lambdas.push_back(c - e + 2.0 * e * k / 20.0);
    std::vector<std::vector<double>> found(lambdas.size());
    ScanOptions so;
    parallel_for(lambdas.size(), cfg.jobs, [&](std::size_t k) {
      for (const auto& cp : critical_points_slice(family, lambdas[k], seeds).points) {
        if (nontrivial_point(cp, so)) found[k].push_back(cp.value);
      }
    });
    for (const auto& v : found)
      for (double y : v) {
        rep.endpoint_closest = std::min(rep.endpoint_closest, std::abs(y));
        if (std::abs(y) < e) ++rep.endpoint_nontrivial;
      }
    rep.nonbif_endpoints_ok = rep.endpoint_nontrivial == 0;
  }

  // (iv) Sublevel pairs at lambda = -1 and 1.
  if (family.dim <= 3) {
    rep.pair_method = "homology";
    topology::GridParams grid = cfg.grid;
    grid.jobs = cfg.jobs;
    const auto cert = topology::pair_inequivalence_certificate(family, -1.0, 1.0, cfg.pair_eps, grid);
    rep.betti_minus = cert.betti_first;
    rep.betti_plus = cert.betti_second;
    rep.pair_detail = topology::to_string(cert.verdict) + ": " + cert.detail;
    rep.pair_inequivalent_ok = cert.verdict == topology::PairVerdict::Inequivalent;
  } else {
    // Beyond grid dimensions: with the origin the only critical point whose
    // value lies in [-eps, eps] and nondegenerate, the pair homology is that
    // of a point of the given Morse index.
    rep.pair_method = "morse";
    bool clean = true;
    std::string why;
    for (double lambda : {-1.0, 1.0}) {
      const auto sd = jacobi_eigen(family.hessian_at_origin(lambda));
      if (sd.kernel_count() > 0) {
        clean = false;
        why = "degenerate origin Hessian";
      }
      (lambda < 0 ? rep.morse_minus : rep.morse_plus) = sd.negative_count();
      for (const auto& cp : critical_points_slice(family, lambda, ring_seeds(family.dim)).points) {
        if (cp.x.norm() > 1e-5 && std::abs(cp.value) <= cfg.pair_eps) {
          clean = false;
          why = "another critical value in [-eps, eps]";
        }
      }
    }
    rep.pair_inequivalent_ok = clean && rep.morse_minus != rep.morse_plus;
    rep.pair_detail = clean ? "Morse indices " + std::to_string(rep.morse_minus) + " and " + std::to_string(rep.morse_plus)
                            : why;
  }
  return rep;
}

std::optional<SeparatingCurves> separating_curves(const BranchSet& branch, double eps) {
  require(eps > 0.0, "eps must be positive");
  const double lo = branch.lambdas.front(), hi = branch.lambdas.back();
  double l0 = std::numeric_limits<double>::infinity(), l1 = -l0, y0 = 0.0, y1 = 0.0;
  for (const auto& c : branch.components) {
    if (!c.touches_trivial || c.nontrivial == 0) continue;
    if (classify_component(branch, c) == Alternative::IntersectsLambdaBoundary) return std::nullopt;
    l0 = std::min(l0, c.lambda_min);
    l1 = std::max(l1, c.lambda_max);
    y0 = std::min(y0, c.y_min);
    y1 = std::max(y1, c.y_max);
  }
  SeparatingCurves sc;
  // Wide enough that critical values stay outside the default transport band.
  const double gap = 0.25 * (1.0 + y1 - y0);
  if (!std::isfinite(l0)) {
    sc.plateau_lo = sc.plateau_hi = 0.5 * (lo + hi);
    l0 = l1 = sc.plateau_lo;
  } else {
    sc.depth_a = std::max(0.0, -y0 - eps) + gap;
    sc.height_b = std::max(0.0, y1 - eps) + gap;
  }
  const double margin = 2.0 * branch.step + 0.05;
  sc.plateau_lo = l0 - margin;
  sc.plateau_hi = l1 + margin;
  const double taper = std::min({0.2, 0.5 * (sc.plateau_lo - lo), 0.5 * (hi - sc.plateau_hi)});
  if (!(taper > 2.0 * branch.step)) return std::nullopt;

  const double pl = sc.plateau_lo, ph = sc.plateau_hi;
  auto bump = [pl, ph, taper](double l) {
    auto smooth = [](double t) { return t <= 0 ? 0.0 : t >= 1 ? 1.0 : t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); };
    return smooth((l - (pl - taper)) / taper) * smooth(((ph + taper) - l) / taper);
  };
  auto dbump = [bump](double l) { return (bump(l + 1e-6) - bump(l - 1e-6)) / 2e-6; };
  const double A = sc.depth_a, B = sc.height_b;
  sc.a = ScalarProfile{[=](double l) { return -eps - A * bump(l); }, [=](double l) { return -A * dbump(l); }};
  sc.b = ScalarProfile{[=](double l) { return eps + B * bump(l); }, [=](double l) { return B * dbump(l); }};

  for (const auto& p : branch.pairs) {
    if (p.kind != PairKind::NonTrivial) continue;
    const double tol = std::abs(p.slope) * branch.step + 0.01;
    if (std::abs(p.y - sc.a(p.lambda)) <= tol || std::abs(p.y - sc.b(p.lambda)) <= tol) return std::nullopt;
  }
  return sc;
}

GlobalCertificate global_branch_certificate(const BranchSet& branch, double eps, int rows) {
  require(eps > 0.0 && eps < branch.window, "eps must lie in (0, R)");
  const double lo = branch.lambdas.front(), hi = branch.lambdas.back();
  const int nx = static_cast<int>(branch.lambdas.size());
  const int ny = rows > 0 ? rows : std::max(8, static_cast<int>(std::ceil(4.0 * branch.window / eps)));
  GlobalCertificate cert;
  cert.upper_grid = plane::RectGrid::empty(nx, ny, lo, hi, 0.0, branch.window);
  cert.lower_grid = plane::RectGrid::empty(nx, ny, lo, hi, 0.0, branch.window);

  auto draw = [&](const CriticalPair& p, const CriticalPair& q) {
    // The upper half sees y >= 0, the lower half the mirror image of y <= 0.
    for (int side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? 1.0 : -1.0;
      const double yp = sgn * p.y, yq = sgn * q.y;
      if (yp < 0 && yq < 0) continue;
      plane::Point a{p.lambda, yp}, b{q.lambda, yq};
      if (yp < 0 || yq < 0) {
        const double t = yp / (yp - yq);
        const plane::Point z{p.lambda + t * (q.lambda - p.lambda), 0.0};
        (yp < 0 ? a : b) = z;
      }
      (side == 0 ? cert.upper_grid : cert.lower_grid).occupy_segment(a, b);
    }
  };
  std::vector<char> linked(branch.pairs.size(), 0);
  for (const auto& [i, j] : branch.links) {
    const auto& p = branch.pairs[i];
    const auto& q = branch.pairs[j];
    if (p.kind == PairKind::Trivial && q.kind == PairKind::Trivial) continue;
    linked[i] = linked[j] = 1;
    draw(p, q);
  }
  for (std::size_t i = 0; i < branch.pairs.size(); ++i) {
    const auto& p = branch.pairs[i];
    if (p.kind == PairKind::NonTrivial && !linked[i]) draw(p, p);
  }
  for (auto* g : {&cert.upper_grid, &cert.lower_grid}) {
    for (int j = 0; j < g->ny; ++j) {
      if (g->centre(0, j)[1] - 0.5 * g->cell_height() <= eps) continue;
      g->set(0, j);
      g->set(g->nx - 1, j);
    }
  }
  cert.upper = plane::component_or_curve(cert.upper_grid);
  cert.lower = plane::component_or_curve(cert.lower_grid);
  cert.global_branch = cert.upper.kind == plane::Separation::Kind::Component ||
                       cert.lower.kind == plane::Separation::Kind::Component;
  return cert;
}

EversionReport demo_eversion_report(const EversionOptions& opts) {
  EversionReport rep;
  const FunctionalFamily f = radial_demo_family();
  const Mat La = f.hessian_at_origin(-1.0), Lb = f.hessian_at_origin(1.0);
  rep.spf_endpoints = spectral::spectral_flow_endpoints(La, Lb);
  rep.spf_crossings = spectral::spectral_flow_crossings(spectral::hessian_path(f, -1.0, 1.0, 201), -1.0, opts.jobs).spf;
  rep.spf_signature = spectral::spectral_flow_signature(La, Lb);
  rep.degree_product = spectral::determinant_sign(La) * spectral::determinant_sign(Lb);
  rep.morse_minus = spectral::morse_index(La);
  rep.morse_plus = spectral::morse_index(Lb);

  const auto circle = critical_points_slice(f, 1.0, ring_seeds(2));
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0, rsum = 0.0, vsum = 0.0;
  for (const auto& cp : circle.points) {
    if (cp.x.norm() <= 1e-5) continue;
    ++rep.circle_points;
    rsum += cp.x.norm();
    vsum += cp.value;
    rmin = std::min(rmin, cp.x.norm());
    rmax = std::max(rmax, cp.x.norm());
  }
  if (rep.circle_points > 0) {
    rep.circle_radius = rsum / rep.circle_points;
    rep.circle_value = vsum / rep.circle_points;
    rep.circle_radius_spread = rmax - rmin;
  }

  ScanOptions so;
  so.slices = opts.slices;
  so.jobs = opts.jobs;
  auto cls = classify_alternatives(f, so);
  rep.classification = cls.overall;
  const Component* main = nullptr;
  for (const auto& c : cls.branch.components)
    if (c.touches_trivial && (!main || c.nontrivial > main->nontrivial)) main = &c;
  if (main) rep.landmarks = landmarks(f, cls.branch, *main);
  rep.branch = std::move(cls.branch);

  topology::GridParams gp;
  gp.h = opts.grid_h;
  gp.jobs = opts.jobs;
  gp.cell_budget = topology::cell_budget_from_env();
  const auto cert = topology::pair_inequivalence_certificate(f, -1.0, 1.0, opts.eps, gp);
  if (cert.error) fail(*cert.error, "sublevel pair homology: " + cert.detail);
  rep.betti_minus = cert.betti_first;
  rep.betti_plus = cert.betti_second;
  rep.pair_verdict = topology::to_string(cert.verdict);
  return rep;
}

}  // namespace critflow::bifurcate
