#include "critflow/deform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include "critflow/critical_points.hpp"
#include "critflow/error.hpp"
#include "critflow/parallel.hpp"

namespace critflow::deform {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSlicePoints = 40'000;

std::vector<double> lambda_samples(double lo, double hi, int n) {
  require(lo <= hi, "lambda interval must satisfy lo <= hi");
  if (lo == hi || n <= 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

/// Sample points of the box: a uniform grid when it has at most
/// kMaxSlicePoints vertices, otherwise a fixed pseudo-random cloud.
std::vector<Vec> box_points(const Box& box, double h) {
  const int d = box.dim();
  std::vector<int> counts(static_cast<std::size_t>(d));
  double total = 1.0;
  for (int k = 0; k < d; ++k) {
    counts[static_cast<std::size_t>(k)] = static_cast<int>(std::floor((box.hi[k] - box.lo[k]) / h + 1e-9)) + 1;
    total *= counts[static_cast<std::size_t>(k)];
  }
  std::vector<Vec> pts;
  if (total <= static_cast<double>(kMaxSlicePoints)) {
    pts.reserve(static_cast<std::size_t>(total));
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t n = 0; n < static_cast<std::size_t>(total); ++n) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = std::min(box.lo[k] + h * idx[static_cast<std::size_t>(k)], box.hi[k]);
      pts.push_back(std::move(x));
      for (int k = 0; k < d; ++k) {
        if (++idx[static_cast<std::size_t>(k)] < counts[static_cast<std::size_t>(k)]) break;
        idx[static_cast<std::size_t>(k)] = 0;
      }
    }
    return pts;
  }
  std::mt19937_64 rng(0xb0c5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  pts.reserve(kMaxSlicePoints);
  for (std::size_t n = 0; n < kMaxSlicePoints; ++n) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

/// Newton projection of x onto the level set f_lambda = level along grad f.
std::optional<Vec> project_to_level(const FunctionalFamily& f, double lambda, Vec x, double level) {
  for (int it = 0; it < 8; ++it) {
    const double r = f.eval(lambda, x) - level;
    if (std::abs(r) <= 1e-12 * (1.0 + std::abs(level))) return x;
    const Vec g = f.grad(lambda, x);
    const double g2 = g.squaredNorm();
    if (!(g2 > 1e-24)) return std::nullopt;
    x -= (r / g2) * g;
  }
  if (std::abs(f.eval(lambda, x) - level) <= 1e-9 * (1.0 + std::abs(level))) return x;
  return std::nullopt;
}

struct BandPoint {
  Vec x;
  double f = 0.0;
  bool on_level = false;
};

/// Band points of one slice: grid points inside the band plus grid points
/// within one mesh cell of a level projected onto it.
std::vector<BandPoint> band_points(const FunctionalFamily& family, double lambda, const LevelBand& band,
                                   const std::vector<Vec>& pts, const Box& box, double h) {
  std::vector<BandPoint> out;
  const double slack = 0.01 * (box.hi - box.lo).maxCoeff();
  for (const auto& x : pts) {
    const double f = family.eval(lambda, x);
    if (!std::isfinite(f)) fail(ErrorCode::NonFiniteValue, "functional is not finite at a sample point");
    const double dist = band.distance(f);
    if (dist < band.delta) out.push_back({x, f, false});
    const double reach = 1.5 * h * family.grad(lambda, x).norm();
    for (double level : band.levels()) {
      if (std::abs(f - level) >= std::max(band.delta, reach)) continue;
      if (auto y = project_to_level(family, lambda, x, level); y && box.contains(*y, slack)) {
        out.push_back({*y, level, true});
      }
    }
  }
  return out;
}

struct SliceStats {
  double floor = kInf;
  double sup_lambda_grad = 0.0;
  std::size_t points = 0;
  double worst_lambda = 0.0;
  Vec worst_x;

  void observe(double lambda, const Vec& x, double grad_norm, double lambda_grad) {
    ++points;
    sup_lambda_grad = std::max(sup_lambda_grad, std::abs(lambda_grad));
    if (grad_norm < floor) {
      floor = grad_norm;
      worst_lambda = lambda;
      worst_x = x;
    }
  }
  void merge(const SliceStats& o) {
    points += o.points;
    sup_lambda_grad = std::max(sup_lambda_grad, o.sup_lambda_grad);
    if (o.floor < floor) {
      floor = o.floor;
      worst_lambda = o.worst_lambda;
      worst_x = o.worst_x;
    }
  }
};

/// Follows a critical point in lambda towards a level; reports the first
/// parameter where its value comes within delta of the level or crosses it.
void continue_towards_level(const FunctionalFamily& family, const LevelBand& band, double lo, double hi,
                            double lambda, const bifurcate::CriticalPoint& cp, double level, double dir,
                            double span, SliceStats& stats) {
  const int steps = 24;
  const double dl = dir * span / steps;
  Vec x = cp.x;
  const double side = cp.value - level;
  for (int i = 1; i <= steps; ++i) {
    const double l = lambda + i * dl;
    if (l < lo || l > hi) break;
    auto next = bifurcate::newton_critical_point(family, l, x);
    if (!next || (next->x - x).norm() > 0.25) break;
    x = next->x;
    const double diff = next->value - level;
    if (std::abs(diff) < band.delta || (diff > 0) != (side > 0)) {
      stats.observe(l, x, next->grad_norm, family.lambda_grad(l, x));
      return;
    }
  }
}

}  // namespace

std::vector<double> LevelBand::levels() const {
  if (b) return {a, *b};
  return {a};
}

double LevelBand::distance(double value) const {
  double d = std::abs(value - a);
  if (b) d = std::min(d, std::abs(value - *b));
  return d;
}

BandStatistics band_statistics(const FunctionalFamily& family, double lo, double hi, const LevelBand& band,
                               const SampleSpec& spec) {
  require(band.delta > 0.0, "band half-width must be positive");
  require(!band.b || band.a < *band.b, "band levels must satisfy a < b");
  require(spec.h > 0.0, "sample mesh must be positive");
  const Box box = spec.box.value_or(family.domain);
  require(box.dim() == family.dim, "sample box dimension does not match the family");
  const auto lambdas = lambda_samples(lo, hi, spec.lambda_samples);
  const double dl = lambdas.size() > 1 ? lambdas[1] - lambdas[0] : 0.0;
  const auto pts = box_points(box, spec.h);
  const auto rings = spec.seed_rings ? bifurcate::ring_seeds(family.dim) : std::vector<Vec>{};

  std::vector<SliceStats> per(lambdas.size());
  parallel_for(lambdas.size(), spec.jobs, [&](std::size_t i) {
    const double lambda = lambdas[i];
    SliceStats& st = per[i];
    auto bp = band_points(family, lambda, band, pts, box, spec.h);
    std::vector<std::pair<double, std::size_t>> by_grad;
    for (std::size_t j = 0; j < bp.size(); ++j) {
      const double gn = family.grad(lambda, bp[j].x).norm();
      st.observe(lambda, bp[j].x, gn, family.lambda_grad(lambda, bp[j].x));
      by_grad.emplace_back(gn, j);
    }
    const auto keep = std::min<std::size_t>(by_grad.size(), static_cast<std::size_t>(std::max(0, spec.newton_candidates)));
    std::partial_sort(by_grad.begin(), by_grad.begin() + static_cast<std::ptrdiff_t>(keep), by_grad.end());
    std::vector<Vec> seeds = rings;
    for (std::size_t j = 0; j < keep; ++j) seeds.push_back(bp[by_grad[j].second].x);

    const auto crit = bifurcate::critical_points_slice(family, lambda, seeds);
    for (const auto& cp : crit.points) {
      if (!box.contains(cp.x)) continue;
      if (band.contains(cp.value)) {
        st.observe(lambda, cp.x, cp.grad_norm, family.lambda_grad(lambda, cp.x));
        continue;
      }
      if (dl <= 0.0) continue;
      const double slope = family.lambda_grad(lambda, cp.x);
      const double reach = 1.5 * std::abs(slope) * dl + band.delta;
      for (double level : band.levels()) {
        if (std::abs(cp.value - level) >= reach || slope == 0.0) continue;
        const double dir = (level - cp.value) / slope > 0 ? 1.0 : -1.0;
        continue_towards_level(family, band, lo, hi, lambda, cp, level, dir, 1.5 * dl, st);
      }
    }
  });

  SliceStats total;
  for (const auto& s : per) total.merge(s);
  BandStatistics out;
  out.floor = total.floor;
  out.sup_lambda_grad = total.sup_lambda_grad;
  out.points = total.points;
  out.worst_lambda = total.worst_lambda;
  out.worst_x = total.worst_x;
  return out;
}

double gradient_floor(const FunctionalFamily& family, double lo, double hi, double a, double delta,
                      const SampleSpec& spec) {
  const auto st = band_statistics(family, lo, hi, LevelBand{a, std::nullopt, delta}, spec);
  if (st.floor < 1e-6) {
    fail(ErrorCode::SingularLevel, "level " + std::to_string(a) + " is numerically critical near lambda = " +
                                       std::to_string(st.worst_lambda));
  }
  return st.floor;
}

double cutoff(double distance, double delta) {
  if (distance <= 0.5 * delta) return 1.0;
  if (distance >= delta) return 0.0;
  const double t = (delta - distance) / (0.5 * delta);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

Vec TransportField::operator()(double lambda, const Vec& x) const {
  const double f = family.eval(lambda, x);
  const double chi = cutoff(band.distance(f), band.delta);
  if (chi == 0.0) return Vec::Zero(x.size());
  const Vec g = family.grad(lambda, x);
  const double gn = g.norm();
  if (std::isfinite(floor) && gn < 0.5 * floor) {
    fail(ErrorCode::FloorViolated, "gradient norm " + std::to_string(gn) + " below half the floor inside the band");
  }
  if (!(gn > 0.0)) fail(ErrorCode::FloorViolated, "gradient vanishes inside the band");
  const double scale = chi * (std::abs(family.lambda_grad(lambda, x)) + 1.0) / (gn * gn);
  return -scale * g;
}

double TransportField::descent(double lambda, const Vec& x) const {
  return family.lambda_grad(lambda, x) + family.grad(lambda, x).dot((*this)(lambda, x));
}

TransportField transport_field(const FunctionalFamily& family, const LevelBand& band, double floor,
                               double sup_lambda_grad) {
  require(band.delta > 0.0, "band half-width must be positive");
  require(floor > 0.0, "gradient floor must be positive");
  TransportField v;
  v.family = family;
  v.band = band;
  v.floor = floor;
  v.sup_lambda_grad = sup_lambda_grad;
  v.bound = std::isfinite(floor) ? (sup_lambda_grad + 1.0) / floor : 0.0;
  return v;
}

TransportField transport_field(const FunctionalFamily& family, const LevelBand& band, const SampleSpec& spec,
                               double lo, double hi) {
  const auto st = band_statistics(family, lo, hi, band, spec);
  if (st.floor < 1e-6) {
    fail(ErrorCode::SingularLevel, "a band level is numerically critical near lambda = " + std::to_string(st.worst_lambda));
  }
  return transport_field(family, band, st.floor, st.sup_lambda_grad);
}

Trajectory flow_integrate(const TransportField& field, double lambda0, const Vec& x0, double t_end, double step,
                          int record_every) {
  require(t_end >= 0.0, "integration time must be nonnegative");
  require(x0.size() == field.family.dim, "start point has the wrong dimension");
  const auto& fam = field.family;
  if (step <= 0.0) step = field.bound > 0.0 ? field.band.delta / (10.0 * field.bound) : 0.01;
  const auto n = static_cast<long>(std::max(1.0, std::ceil(t_end / step - 1e-12)));
  const double h = t_end / static_cast<double>(n);

  Trajectory tr;
  tr.step = h;
  const auto levels = field.band.levels();
  std::vector<char> guarded(levels.size(), 0);
  auto update_guards = [&](double f) {
    for (std::size_t k = 0; k < levels.size(); ++k)
      if (f <= levels[k]) guarded[k] = 1;
  };
  auto overshoot = [&](double f) {
    double worst = -kInf;
    for (std::size_t k = 0; k < levels.size(); ++k)
      if (guarded[k]) worst = std::max(worst, f - levels[k]);
    return worst;
  };

  auto rk4 = [&](double t, const Vec& x, double dt) {
    const double l = lambda0 + t;
    const Vec k1 = field(l, x);
    const Vec k2 = field(l + 0.5 * dt, x + 0.5 * dt * k1);
    const Vec k3 = field(l + 0.5 * dt, x + 0.5 * dt * k2);
    const Vec k4 = field(l + dt, x + dt * k3);
    return Vec(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  // Advances by dt, splitting the step while a guarded level is overshot.
  std::function<Vec(double, const Vec&, double, int)> advance = [&](double t, const Vec& x, double dt, int depth) {
    Vec y = rk4(t, x, dt);
    const double over = overshoot(fam.eval(lambda0 + t + dt, y));
    if (over > kFlowTolerance) {
      if (depth >= 10) {
        fail(ErrorCode::StepUnstable, "guarded level overshot by " + std::to_string(over) + " after 10 halvings");
      }
      ++tr.halvings;
      const Vec mid = advance(t, x, 0.5 * dt, depth + 1);
      return advance(t + 0.5 * dt, mid, 0.5 * dt, depth + 1);
    }
    return y;
  };

  Vec x = x0;
  double f = fam.eval(lambda0, x);
  update_guards(f);
  tr.points.push_back({0.0, lambda0, x, f});
  for (long i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    x = advance(t, x, h, 0);
    const double tn = h * static_cast<double>(i + 1);
    f = fam.eval(lambda0 + tn, x);
    tr.max_overshoot = std::max(tr.max_overshoot, overshoot(f));
    update_guards(f);
    const bool last = i + 1 == n;
    if (last || (record_every > 0 && (i + 1) % record_every == 0)) tr.points.push_back({tn, lambda0 + tn, x, f});
  }
  return tr;
}

double descent_certificate(const TransportField& field, const SampleSpec& spec, double lo, double hi) {
  const Box box = spec.box.value_or(field.family.domain);
  const auto lambdas = lambda_samples(lo, hi, spec.lambda_samples);
  const auto pts = box_points(box, spec.h);
  std::vector<double> worst(lambdas.size(), -kInf);
  parallel_for(lambdas.size(), spec.jobs, [&](std::size_t i) {
    for (const auto& p : band_points(field.family, lambdas[i], field.band, pts, box, spec.h)) {
      if (p.on_level) worst[i] = std::max(worst[i], field.descent(lambdas[i], p.x));
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

int TransportWitness::violations() const {
  return forward.violations + backward.violations + homotopy.violations + homotopy_bar.violations;
}

double TransportWitness::max_overshoot() const {
  return std::max({forward.max_overshoot, backward.max_overshoot, homotopy.max_overshoot, homotopy_bar.max_overshoot});
}

int TransportWitness::flow_count() const {
  return forward.flows + backward.flows + homotopy.flows + homotopy_bar.flows;
}

FunctionalFamily rescaled_family(const FunctionalFamily& family, const ScalarProfile& a, const ScalarProfile& b) {
  FunctionalFamily g = family;
  g.name = family.name + "-rescaled";
  g.eval = [family, a, b](double l, const Vec& x) { return (family.eval(l, x) - a(l)) / (b(l) - a(l)); };
  g.grad = [family, a, b](double l, const Vec& x) { return Vec(family.grad(l, x) / (b(l) - a(l))); };
  g.hess = [family, a, b](double l, const Vec& x) { return Mat(family.hess(l, x) / (b(l) - a(l))); };
  g.lambda_grad = [family, a, b](double l, const Vec& x) {
    const double w = b(l) - a(l);
    const double da = a.derivative(l), dw = b.derivative(l) - da;
    return (family.lambda_grad(l, x) - da) / w - (family.eval(l, x) - a(l)) * dw / (w * w);
  };
  return g;
}

TransportWitness pair_transport(const FunctionalFamily& family, const ScalarProfile& a, const ScalarProfile& b,
                                const TransportOptions& opts) {
  for (int i = 0; i <= 200; ++i) {
    const double l = -1.0 + i / 100.0;
    require(a(l) < b(l), "pair_transport needs a(lambda) < b(lambda) on [-1, 1]");
  }
  require(opts.starts >= 1, "need at least one start");
  const FunctionalFamily g = rescaled_family(family, a, b);
  const FunctionalFamily gbar = reversed(g);
  const LevelBand band{0.0, 1.0, opts.delta};

  const auto st = band_statistics(g, -1.0, 1.0, band, opts.spec);
  if (st.floor < 1e-6) {
    fail(ErrorCode::SingularLevel, "a(lambda) or b(lambda) meets a critical value near lambda = " +
                                       std::to_string(st.worst_lambda));
  }
  const auto field = transport_field(g, band, st.floor, st.sup_lambda_grad);
  const auto field_bar = transport_field(gbar, band, st.floor, st.sup_lambda_grad);

  TransportWitness w;
  w.floor = field.floor;
  w.bound = field.bound;

  // Starts in g_lambda^1: half uniform in the box, half placed just under a level.
  const Box& box = family.domain;
  auto draw_starts = [&](double lambda, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> out;
    for (int tries = 0; static_cast<int>(out.size()) < opts.starts && tries < 400 * opts.starts; ++tries) {
      Vec x(box.dim());
      for (int k = 0; k < box.dim(); ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit(rng);
      if (g.eval(lambda, x) > 1.0) continue;
      if (out.size() % 2 == 1) {
        // Alternate between the levels; an empty level falls back to the other.
        const double first = (out.size() / 2) % 2 == 0 ? 0.0 : 1.0;
        for (double level : {first, 1.0 - first}) {
          auto y = project_to_level(g, lambda, x, level - 1e-4);
          if (y && box.contains(*y)) {
            x = *y;
            break;
          }
        }
      }
      out.push_back(std::move(x));
    }
    return out;
  };

  std::mutex mu;
  auto membership = [&](const FunctionalFamily& fam, double l0, double f0, const Vec& end, double l1,
                        MapStatistics& ms, int flows) {
    const double f1 = fam.eval(l1, end);
    double over = -kInf;
    for (double level : band.levels())
      if (f0 <= level) over = std::max(over, f1 - level);
    (void)l0;
    std::lock_guard<std::mutex> lock(mu);
    ms.flows += flows;
    if (over > 0.0) ms.max_overshoot = std::max(ms.max_overshoot, over);
    if (over > kFlowTolerance) ++ms.violations;
  };
  auto unstable = [&](MapStatistics& ms, int flows) {
    std::lock_guard<std::mutex> lock(mu);
    ms.flows += flows;
    ++ms.violations;
  };

  auto run_map = [&](const TransportField& first, const TransportField& second, const std::vector<Vec>& starts,
                     MapStatistics& direct, MapStatistics& homotopy) {
    const FunctionalFamily& fam = first.family;
    parallel_for(starts.size(), opts.spec.jobs, [&](std::size_t i) {
      const Vec& x = starts[i];
      const double f0 = fam.eval(-1.0, x);
      try {
        const auto tr = flow_integrate(first, -1.0, x, 2.0, opts.step, 0);
        membership(fam, -1.0, f0, tr.end().x, 1.0, direct, 1);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StepUnstable) throw;
        unstable(direct, 1);
      }
      for (double t : opts.homotopy_times) {
        try {
          const auto there = flow_integrate(first, -1.0, x, t, opts.step, 0);
          const auto back = flow_integrate(second, 1.0 - t, there.end().x, t, opts.step, 0);
          membership(fam, -1.0, f0, back.end().x, -1.0, homotopy, 2);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::StepUnstable) throw;
          unstable(homotopy, 2);
        }
      }
    });
  };

  run_map(field, field_bar, draw_starts(-1.0, opts.seed), w.forward, w.homotopy);
  run_map(field_bar, field, draw_starts(1.0, opts.seed + 1), w.backward, w.homotopy_bar);
  return w;
}

}  // namespace critflow::deform
