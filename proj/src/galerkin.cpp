#include "critflow/galerkin.hpp"

#include <algorithm>
#include <cmath>

#include "critflow/critical_points.hpp"
#include "critflow/error.hpp"
#include "critflow/parallel.hpp"
#include "critflow/spectral.hpp"

namespace critflow::galerkin {

Nonlinearity Nonlinearity::one_minus_cos() {
  return {[](double u) { return 1.0 - std::cos(u); }, [](double u) { return std::sin(u); },
          [](double u) { return std::cos(u); }};
}

Mat CompactPerturbationFamily::origin_hessian(double lambda) const {
  const int d = 2 * ambient_pairs;
  Mat H = Mat::Zero(d, d);
  const double c = kappa(lambda) * rho.second(0.0);
  for (const auto& e : directions) {
    Vec full = Vec::Zero(d);
    full.head(std::min<Eigen::Index>(d, e.size())) = e.head(std::min<Eigen::Index>(d, e.size()));
    H += c * full * full.transpose();
  }
  return H;
}

double CompactPerturbationFamily::range_bound(double lambda) const {
  double s = 0.0;
  for (const auto& e : directions) s += e.norm();
  double rho_sup = 0.0;
  for (int k = 0; k <= 2000; ++k) rho_sup = std::max(rho_sup, std::abs(rho.first(-10.0 + 0.01 * k)));
  return std::abs(kappa(lambda)) * rho_sup * s;
}

CompactPerturbationFamily rank_demo_perturbation(int modes, int ambient_pairs) {
  require(modes >= 1 && ambient_pairs >= modes, "need 1 <= modes <= ambient pairs");
  CompactPerturbationFamily K;
  K.ambient_pairs = ambient_pairs;
  K.kappa = ScalarProfile{[](double l) { return 1.0 + l; }, [](double) { return 1.0; }};
  for (int k = 0; k < modes; ++k) {
    Vec e = Vec::Zero(2 * ambient_pairs);
    e[SymmetryOperator::minus_index(k)] = 1.0;
    K.directions.push_back(e);
  }
  return K;
}

CompactPerturbationFamily decaying_carrier_perturbation(int ambient_pairs) {
  require(ambient_pairs >= 1, "need at least one ambient pair");
  CompactPerturbationFamily K;
  K.ambient_pairs = ambient_pairs;
  K.kappa = ScalarProfile{[](double l) { return 1.0 + l; }, [](double) { return 1.0; }};
  Vec w = Vec::Zero(2 * ambient_pairs);
  for (int k = 0; k < ambient_pairs; ++k) w[SymmetryOperator::minus_index(k)] = std::ldexp(1.0, -k);
  K.directions.push_back(w);
  return K;
}

FunctionalFamily truncate(const SymmetryOperator& J, const CompactPerturbationFamily& K, int n, bool allow_outside) {
  require(n >= 1 && 2 * n <= J.dim(), "truncation must satisfy 1 <= n <= J.pairs()");
  const int d = 2 * n;
  std::vector<Vec> dirs;
  for (const auto& e : K.directions) {
    const Eigen::Index keep = std::min<Eigen::Index>(d, e.size());
    if (!allow_outside && e.size() > keep && e.tail(e.size() - keep).norm() > 0.0) {
      fail(ErrorCode::DirectionOutsideTruncation, "a carrier direction has components beyond H_" + std::to_string(n));
    }
    Vec p = Vec::Zero(d);
    p.head(keep) = e.head(keep);
    dirs.push_back(p);
  }
  Vec s(d);
  for (int i = 0; i < d; ++i) s[i] = J.signs[static_cast<std::size_t>(i)];
  const auto rho = K.rho;
  const auto kappa = K.kappa;

  auto eval = [s, dirs, rho, kappa](double l, const Vec& x) {
    double v = 0.5 * x.dot(s.cwiseProduct(x));
    const double k = kappa(l);
    for (const auto& e : dirs) v += k * rho.value(e.dot(x));
    return v;
  };
  auto grad = [s, dirs, rho, kappa](double l, const Vec& x) {
    Vec g = s.cwiseProduct(x);
    const double k = kappa(l);
    for (const auto& e : dirs) g += k * rho.first(e.dot(x)) * e;
    return g;
  };
  auto hess = [s, dirs, rho, kappa](double l, const Vec& x) {
    Mat H = s.asDiagonal();
    const double k = kappa(l);
    for (const auto& e : dirs) H += k * rho.second(e.dot(x)) * e * e.transpose();
    return H;
  };
  auto dl = [dirs, rho, kappa](double l, const Vec& x) {
    double v = 0.0;
    for (const auto& e : dirs) v += rho.value(e.dot(x));
    return kappa.derivative(l) * v;
  };
  return make_family("galerkin-n" + std::to_string(n), d, eval, grad, hess, dl, Box::cube(d, 4.0));
}

double carrier_root(double c) {
  if (c <= 1.0) return 0.0;
  double lo = 1e-12, hi = M_PI;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - c * std::sin(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

/// Root of u = c rho'(u) bracketed by a scan of (0, 10].
double line_root(const Nonlinearity& rho, double c) {
  auto g = [&](double u) { return u - c * rho.first(u); };
  double prev = 1e-6;
  for (int k = 1; k <= 4000; ++k) {
    const double u = 1e-6 + 0.0025 * k;
    if (g(prev) < 0.0 && g(u) >= 0.0) {
      double lo = prev, hi = u;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = u;
  }
  return 0.0;
}

}  // namespace

StabilizationReport stabilization_diagnostics(const SymmetryOperator& J, const CompactPerturbationFamily& K,
                                              double lambda_probe, const std::vector<int>& n_range,
                                              const StabilizationOptions& opts) {
  require(!n_range.empty() && std::is_sorted(n_range.begin(), n_range.end()), "n_range must be ascending and non-empty");
  require(!K.directions.empty(), "perturbation needs a carrier direction");
  const int n_max = std::min(J.pairs(), K.ambient_pairs);
  require(n_range.front() >= 1 && n_range.back() <= n_max, "n_range exceeds the ambient truncation");

  StabilizationReport rep;
  const auto gm = spectral::generalized_signature(J, K.origin_hessian(-1.0), n_max, opts.stability_window);
  const auto gp = spectral::generalized_signature(J, K.origin_hessian(1.0), n_max, opts.stability_window);
  rep.sign_minus = gm.value;
  rep.sign_plus = gp.value;
  rep.stabilization_index = std::max(gm.stabilization_index, gp.stabilization_index);
  rep.spf = (gp.value - gm.value) / 2;

  // The branch is followed along the first carrier direction of the ambient space.
  const Vec& e0 = K.directions.front();
  const double u_limit = line_root(K.rho, K.kappa(lambda_probe) * e0.squaredNorm());
  const double alpha = u_limit / e0.squaredNorm();

  rep.rows.resize(n_range.size());
  parallel_for(n_range.size(), opts.jobs, [&](std::size_t i) {
    const int n = n_range[i];
    TruncationRow& row = rep.rows[i];
    row.n = n;
    row.sign_minus = gm.history[static_cast<std::size_t>(n - 1)];
    row.sign_plus = gp.history[static_cast<std::size_t>(n - 1)];
    const FunctionalFamily f = truncate(J, K, n, true);
    const int d = 2 * n;

    std::vector<Vec> seeds{Vec::Zero(d)};
    for (const auto& e : K.directions) {
      const Vec p = e.head(std::min<Eigen::Index>(d, e.size()));
      if (p.norm() == 0.0) continue;
      for (double r : {0.5, 1.0, 2.0, 3.0}) {
        seeds.push_back(r * p / p.norm());
        seeds.push_back(-r * p / p.norm());
      }
    }
    for (const auto& b : bifurcate::ball_seeds(Vec::Zero(d), 2.0, 16, 97 + static_cast<unsigned long long>(n))) {
      seeds.push_back(b);
    }
    for (double c : {-1.0, 1.0}) {
      for (int k = 0; k <= 4; ++k) {
        const double l = c - opts.endpoint_eps + 0.5 * opts.endpoint_eps * k;
        for (const auto& cp : bifurcate::critical_points_slice(f, l, seeds).points) {
          if (cp.x.norm() > 1e-5 && std::abs(cp.value) < opts.endpoint_eps) ++row.endpoint_pairs;
        }
      }
    }

    if (alpha > 0.0) {
      Vec seed = Vec::Zero(d);
      seed.head(std::min<Eigen::Index>(d, e0.size())) = alpha * e0.head(std::min<Eigen::Index>(d, e0.size()));
      bifurcate::NewtonOptions no;
      no.newton_tol = 1e-12;
      if (auto cp = bifurcate::newton_critical_point(f, lambda_probe, seed, no); cp && cp->x.norm() > 1e-5) {
        row.y_found = true;
        row.y_terminal = cp->value;
        row.witness_norm = cp->x.norm();
      }
    }
  });
  const double last = rep.rows.back().y_terminal;
  for (const auto& r : rep.rows) rep.drift.push_back(r.y_found ? std::abs(r.y_terminal - last) : std::nan(""));
  return rep;
}

IndefiniteReport strongly_indefinite_demo(int modes, const IndefiniteOptions& opts) {
  require(modes >= 1, "modes must be positive");
  IndefiniteReport rep;
  rep.modes = modes;
  const auto J = SymmetryOperator::interleaved(modes);
  const auto K = rank_demo_perturbation(modes, modes);
  const FunctionalFamily f = truncate(J, K, modes);

  const Mat La = f.hessian_at_origin(-1.0), Lb = f.hessian_at_origin(1.0);
  rep.spf_endpoints = spectral::spectral_flow_endpoints(La, Lb);
  rep.spf_crossings = spectral::spectral_flow_crossings(spectral::hessian_path(f), -1.0, opts.jobs).spf;
  rep.spf_signature = spectral::spectral_flow_signature(La, Lb);
  rep.degree_product = spectral::determinant_sign(La) * spectral::determinant_sign(Lb);

  const int ambient = modes + 4;
  std::vector<int> n_range;
  for (int n = 1; n <= ambient; ++n) n_range.push_back(n);
  StabilizationOptions so;
  so.jobs = opts.jobs;
  rep.stabilization = stabilization_diagnostics(SymmetryOperator::interleaved(ambient),
                                                rank_demo_perturbation(modes, ambient), 1.0, n_range, so);

  bifurcate::HypothesisConfig hc;
  hc.jobs = opts.jobs;
  hc.seed = opts.seed;
  rep.hypotheses = bifurcate::verify_hypotheses(f, hc);

  bifurcate::ScanOptions sc;
  sc.slices = opts.slices;
  sc.jobs = opts.jobs;
  rep.classification = bifurcate::classify_alternatives(f, sc);
  const auto& br = rep.classification.branch;
  const bifurcate::Component* main = nullptr;
  for (const auto& c : br.components)
    if (c.touches_trivial && (!main || c.nontrivial > main->nontrivial)) main = &c;
  if (main) {
    rep.landmarks = bifurcate::landmarks(f, br, *main);
    rep.branch_lambda_min = main->lambda_min;
    rep.branch_lambda_max = main->lambda_max;
    if (!rep.landmarks.terminal.empty()) rep.terminal_value = rep.landmarks.terminal.front().y;
  }
  const double t = carrier_root(2.0);
  rep.terminal_oracle = -0.5 * t * t + 2.0 * (1.0 - std::cos(t));
  return rep;
}

}  // namespace critflow::galerkin
