#include "critflow/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "critflow/bifurcate.hpp"
#include "critflow/deform.hpp"
#include "critflow/error.hpp"
#include "critflow/expression.hpp"
#include "critflow/galerkin.hpp"
#include "critflow/parallel.hpp"
#include "critflow/registry.hpp"
#include "critflow/report.hpp"
#include "critflow/spectral.hpp"
#include "critflow/topology.hpp"

namespace critflow::cli {

using report::json;

void RunConfig::validate() const {
  require(slices >= 2, "--slices must be at least 2");
  require(window > 0.0, "--window must be positive");
  require(epsilon > 0.0, "--epsilon must be positive");
  require(grid_h > 0.0, "--grid-h must be positive");
  require(lambda_lo < lambda_hi, "lambda interval must satisfy lo < hi");
  require(modes >= 1, "--modes must be positive");
  require(starts >= 1, "--starts must be positive");
}

int RunConfig::resolved_jobs() const { return jobs > 0 ? jobs : default_jobs(); }

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open config file " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, "config " + path + ": " + e.what());
  }
  require(j.is_object(), "config " + path + " must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "family") cfg.family = v.get<std::string>();
      else if (key == "lambda_interval") {
        const auto li = v.get<std::vector<double>>();
        require(li.size() == 2, "lambda_interval needs two numbers");
        cfg.lambda_lo = li[0];
        cfg.lambda_hi = li[1];
      } else if (key == "slices") cfg.slices = v.get<int>();
      else if (key == "window_R") cfg.window = v.get<double>();
      else if (key == "epsilon") cfg.epsilon = v.get<double>();
      else if (key == "grid_h") cfg.grid_h = v.get<double>();
      else if (key == "jobs") cfg.jobs = v.get<int>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "output_dir") cfg.out = v.get<std::string>();
      else if (key == "path") cfg.path = v.get<std::string>();
      else if (key == "modes") cfg.modes = v.get<int>();
      else if (key == "starts") cfg.starts = v.get<int>();
      else if (key == "level_a") cfg.level_a = v.get<double>();
      else if (key == "level_b") cfg.level_b = v.get<double>();
      else fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, "config " + path + ": " + e.what());
  }
}

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) { return cfg.out + "/" + name; }

json config_json(const RunConfig& cfg) {
  return {{"family", cfg.family},   {"lambda_interval", {cfg.lambda_lo, cfg.lambda_hi}},
          {"slices", cfg.slices},   {"window", cfg.window},
          {"epsilon", cfg.epsilon}, {"grid_h", cfg.grid_h},
          {"seed", cfg.seed}};
}

bifurcate::ScanOptions scan_options(const RunConfig& cfg) {
  bifurcate::ScanOptions so;
  so.lambda_lo = cfg.lambda_lo;
  so.lambda_hi = cfg.lambda_hi;
  so.slices = cfg.slices;
  so.window = cfg.window;
  so.jobs = cfg.resolved_jobs();
  return so;
}

struct OperatorPathInput {
  spectral::SymOperatorPath path;
  std::string source;
};

OperatorPathInput load_operator_path(const RunConfig& cfg) {
  OperatorPathInput in;
  if (cfg.path.empty()) {
    in.path = spectral::hessian_path(resolve_family(cfg.family), cfg.lambda_lo, cfg.lambda_hi, 201);
    in.source = cfg.family;
    return in;
  }
  std::ifstream is(cfg.path);
  if (!is) fail(ErrorCode::ManifestError, "cannot open " + cfg.path);
  json m;
  try {
    m = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::ManifestError, std::string("invalid JSON: ") + e.what());
  }
  if (!m.contains("matrix") || !m["matrix"].is_array() || m["matrix"].empty()) {
    fail(ErrorCode::ManifestError, "path manifest needs a non-empty \"matrix\" array");
  }
  const auto& rows = m["matrix"];
  const int d = static_cast<int>(rows.size());
  std::vector<Expression> entries;
  for (const auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != d) fail(ErrorCode::ManifestError, "matrix must be square");
    for (const auto& e : row) entries.push_back(Expression::parse(e));
  }
  in.path.dim = d;
  in.path.a = m.value("a", cfg.lambda_lo);
  in.path.b = m.value("b", cfg.lambda_hi);
  in.path.samples = m.value("samples", 201);
  in.path.at = [entries, d](double l) {
    Mat M(d, d);
    const Vec none;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = entries[static_cast<std::size_t>(i * d + j)](l, none);
    return M;
  };
  for (int k = 0; k <= 10; ++k) {
    const Mat M = in.path.at(in.path.a + (in.path.b - in.path.a) * k / 10.0);
    if ((M - M.transpose()).norm() > 1e-12 * (1.0 + M.norm())) fail(ErrorCode::ManifestError, "matrix is not symmetric");
  }
  in.source = cfg.path;
  return in;
}

template <typename Fn>
int guarded(std::ostream& log, int error_code, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return error_code;
  }
}

}  // namespace

int cmd_spectral_flow(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto in = load_operator_path(cfg);
  const Mat La = in.path.at(in.path.a), Lb = in.path.at(in.path.b);
  const int e = spectral::spectral_flow_endpoints(La, Lb);
  const auto c = spectral::spectral_flow_crossings(in.path, -1.0, cfg.resolved_jobs());
  const int s = spectral::spectral_flow_signature(La, Lb);
  const auto deg = spectral::degree_relation_check(in.path);
  const bool agree = e == c.spf && c.spf == s;

  json j = report::envelope("spectral-flow");
  j["source"] = in.source;
  j["interval"] = {in.path.a, in.path.b};
  j["spf"] = agree ? json(e) : json();
  j["morse_a"] = spectral::morse_index(La);
  j["morse_b"] = spectral::morse_index(Lb);
  j["crossings"] = report::to_json(c).at("crossings");
  j["methods"] = {{"endpoints", e}, {"crossings", c.spf}, {"signature", s}};
  j["agree"] = agree;
  j["degree_relation"] = {{"det_sign_a", deg.det_sign_a}, {"det_sign_b", deg.det_sign_b}, {"holds", deg.holds}};
  report::write_file(out_path(cfg, "spectral_flow.json"), report::dump(j));
  report::write_file(out_path(cfg, "eigenvalues.csv"),
                     report::eigenvalue_csv(spectral::eigenvalue_trace(in.path, cfg.resolved_jobs())));
  log << "spf endpoints=" << e << " crossings=" << c.spf << " signature=" << s << (agree ? "" : "  DISAGREE") << '\n';
  return agree ? kOk : kSpfDisagreement;
}

int cmd_scan(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const FunctionalFamily f = resolve_family(cfg.family);
  bifurcate::HypothesisConfig hc;
  hc.jobs = cfg.resolved_jobs();
  hc.seed = cfg.seed;
  hc.pair_eps = cfg.epsilon;
  hc.grid.h = std::max(cfg.grid_h, 0.02);
  hc.grid.cell_budget = topology::cell_budget_from_env();
  const auto hyp = bifurcate::verify_hypotheses(f, hc);
  const auto cls = bifurcate::classify_alternatives(f, scan_options(cfg));

  json j = report::envelope("scan");
  j["config"] = config_json(cfg);
  j["hypotheses"] = report::to_json(hyp);
  j["classification"] = bifurcate::to_string(cls.overall);
  j["window_doublings"] = cls.window_doublings;
  j["branch"] = report::branch_summary(cls.branch, cls.per_component);
  json lms = json::array();
  for (const auto& c : cls.branch.components) {
    if (c.touches_trivial) lms.push_back({{"component", c.id}, {"landmarks", report::to_json(bifurcate::landmarks(f, cls.branch, c))}});
  }
  j["landmarks"] = lms;
  std::optional<bifurcate::SeparatingCurves> curves;
  if (cfg.epsilon < cls.branch.window) {
    const auto cert = bifurcate::global_branch_certificate(cls.branch, cfg.epsilon);
    j["global_certificate"] = {{"global_branch", cert.global_branch},
                               {"upper", plane::to_string(cert.upper.kind)},
                               {"lower", plane::to_string(cert.lower.kind)}};
    curves = bifurcate::separating_curves(cls.branch, cfg.epsilon);
  }
  j["separating_curves"] = curves.has_value();
  const bool contradiction = hyp.all() && cls.overall == bifurcate::Alternative::Neither;
  j["theorem_contradiction"] = contradiction;

  report::write_file(out_path(cfg, "scan.json"), report::dump(j));
  report::write_file(out_path(cfg, "pairs.csv"), report::pairs_csv(cls.branch));
  report::write_file(out_path(cfg, "branch.svg"), report::branch_svg(cls.branch, cfg.epsilon, curves));
  log << f.name << ": hypotheses " << (hyp.all() ? "hold" : "fail") << ", classification "
      << bifurcate::to_string(cls.overall) << ", " << cls.branch.nontrivial_count() << " nontrivial pairs\n";
  return contradiction ? kTheoremContradiction : kOk;
}

int cmd_homology(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  return guarded(log, kHomologyError, [&] {
    const FunctionalFamily f = resolve_family(cfg.family);
    if (f.dim > 3) fail(ErrorCode::InvalidArgument, "homology needs a family of dimension at most 3");
    topology::GridParams gp;
    gp.h = cfg.grid_h;
    gp.jobs = cfg.resolved_jobs();
    gp.cell_budget = topology::cell_budget_from_env();
    json j = report::envelope("homology");
    j["config"] = config_json(cfg);
    json slices = json::array();
    std::vector<topology::BettiVector> bettis;
    for (double l : {cfg.lambda_lo, cfg.lambda_hi}) {
      auto fn = [&f, l](const Vec& x) { return f.eval(l, x); };
      const auto rh = topology::sublevel_pair_homology(fn, f.domain, -cfg.epsilon, cfg.epsilon, gp);
      bettis.push_back(rh.betti);
      slices.push_back({{"lambda", l}, {"betti", report::to_json(rh.betti)}, {"euler", rh.betti.euler()},
                        {"relative_cells", rh.relative_cells}});
      if (f.dim == 2) {
        const auto grid = topology::CubicalGrid::sample(fn, f.domain, std::max(cfg.grid_h, 0.02), gp.jobs);
        report::write_file(out_path(cfg, "pair_lambda_" + report::number(l) + ".svg"),
                           topology::render_pair_svg(grid, -cfg.epsilon, cfg.epsilon));
      }
      log << "lambda=" << l << " betti=" << rh.betti.str() << '\n';
    }
    j["slices"] = slices;
    j["inequivalent"] = !(bettis[0] == bettis[1]);
    report::write_file(out_path(cfg, "homology.json"), report::dump(j));
    return static_cast<int>(kOk);
  });
}

int cmd_deform(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  return guarded(log, kDeformError, [&] {
    const FunctionalFamily f = resolve_family(cfg.family);
    double la = 0.0, lb = 0.0;
    if (cfg.level_a && cfg.level_b) {
      la = *cfg.level_a;
      lb = *cfg.level_b;
    } else {
      auto so = scan_options(cfg);
      so.slices = std::min(cfg.slices, 81);
      so.strict_window = false;
      const auto br = bifurcate::scan_critical_pairs(f, so);
      double ymin = 0.0, ymax = 0.0;
      for (const auto& p : br.pairs) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
      la = cfg.level_a.value_or(ymin - 0.5);
      lb = cfg.level_b.value_or(ymax + 0.5);
    }
    const auto a = ScalarProfile::constant(la), b = ScalarProfile::constant(lb);
    deform::TransportOptions to;
    to.starts = cfg.starts;
    to.seed = cfg.seed;
    to.spec.jobs = cfg.resolved_jobs();
    to.spec.h = std::max(cfg.grid_h, 0.05);
    const auto w = deform::pair_transport(f, a, b, to);
    const FunctionalFamily g = deform::rescaled_family(f, a, b);
    const auto field = deform::transport_field(g, deform::LevelBand{0.0, 1.0, to.delta}, w.floor,
                                               (w.bound * w.floor) - 1.0);
    const double cert = deform::descent_certificate(field, to.spec);

    json j = report::envelope("deform");
    j["config"] = config_json(cfg);
    j["levels"] = {la, lb};
    j["transport"] = report::to_json(w);
    j["descent_certificate"] = cert;
    report::write_file(out_path(cfg, "deform.json"), report::dump(j));
    log << "levels " << la << ", " << lb << ": " << w.flow_count() << " flows, " << w.violations()
        << " membership violations, descent certificate " << cert << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_eversion(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  return guarded(log, kEversionError, [&] {
    bifurcate::EversionOptions eo;
    eo.slices = cfg.slices;
    eo.grid_h = cfg.grid_h;
    eo.eps = cfg.epsilon;
    eo.jobs = cfg.resolved_jobs();
    const auto rep = bifurcate::demo_eversion_report(eo);
    json j = report::envelope("eversion");
    j["config"] = config_json(cfg);
    j["report"] = report::to_json(rep);
    report::write_file(out_path(cfg, "eversion.json"), report::dump(j));
    report::write_file(out_path(cfg, "pairs.csv"), report::pairs_csv(rep.branch));
    report::write_file(out_path(cfg, "branch.svg"), report::branch_svg(rep.branch, cfg.epsilon));
    log << "spf=" << rep.spf_endpoints << " degree product=" << rep.degree_product << " circle radius="
        << report::number(rep.circle_radius) << " classification=" << bifurcate::to_string(rep.classification)
        << " betti " << rep.betti_minus.str() << " / " << rep.betti_plus.str() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_indefinite(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  return guarded(log, kIndefiniteError, [&] {
    galerkin::IndefiniteOptions io;
    io.slices = cfg.slices;
    io.jobs = cfg.resolved_jobs();
    io.seed = cfg.seed;
    const auto rep = galerkin::strongly_indefinite_demo(cfg.modes, io);

    std::vector<int> n_range;
    for (int n = 1; n <= 34; ++n) n_range.push_back(n);
    galerkin::StabilizationOptions so;
    so.jobs = io.jobs;
    const auto decay = galerkin::stabilization_diagnostics(SymmetryOperator::interleaved(40),
                                                           galerkin::decaying_carrier_perturbation(40), 1.0, n_range, so);

    json j = report::envelope("indefinite");
    j["config"] = config_json(cfg);
    j["report"] = report::to_json(rep);
    j["decaying_carrier"] = report::to_json(decay);
    report::write_file(out_path(cfg, "indefinite.json"), report::dump(j));
    report::write_file(out_path(cfg, "drift.csv"), report::drift_csv(decay));
    report::write_file(out_path(cfg, "pairs.csv"), report::pairs_csv(rep.classification.branch));
    log << "modes=" << rep.modes << " spf=" << rep.spf_endpoints << " N=" << rep.stabilization.stabilization_index
        << " terminal value=" << report::number(rep.terminal_value) << " classification="
        << bifurcate::to_string(rep.classification.overall) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_selftest(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  json j = report::envelope("selftest");
  json fams = json::array();
  int status = kOk;
  for (const auto& entry : builtin_families()) {
    const FunctionalFamily f = entry.make();
    json fj = {{"family", entry.name}};
    bifurcate::HypothesisConfig hc;
    hc.jobs = cfg.resolved_jobs();
    hc.seed = cfg.seed;
    hc.grid.h = 0.02;
    const auto hyp = bifurcate::verify_hypotheses(f, hc);
    auto so = scan_options(cfg);
    so.slices = std::min(cfg.slices, 200);
    const auto cls = bifurcate::classify_alternatives(f, so);
    const bool contradiction = hyp.all() && cls.overall == bifurcate::Alternative::Neither;

    const auto path = spectral::hessian_path(f);
    const Mat La = path.at(-1.0), Lb = path.at(1.0);
    bool spf_agree = true;
    std::string spf_note;
    try {
      const int e = spectral::spectral_flow_endpoints(La, Lb);
      const int c = spectral::spectral_flow_crossings(path, -1.0, hc.jobs).spf;
      const int s = spectral::spectral_flow_signature(La, Lb);
      spf_agree = e == c && c == s;
      fj["spf"] = e;
    } catch (const Error& err) {
      spf_note = err.what();
      fj["spf"] = nullptr;
    }
    fj["spf_agree"] = spf_agree;
    if (!spf_note.empty()) fj["spf_note"] = spf_note;
    fj["hypotheses"] = {{"ps", hyp.ps_ok}, {"lambda_derivative_bounded", hyp.partf_bounded_ok},
                        {"endpoints_not_bifurcation", hyp.nonbif_endpoints_ok},
                        {"pairs_inequivalent", hyp.pair_inequivalent_ok}, {"all", hyp.all()}};
    fj["classification"] = bifurcate::to_string(cls.overall);
    fj["theorem_contradiction"] = contradiction;
    fams.push_back(fj);
    log << entry.name << ": hypotheses " << (hyp.all() ? "hold" : "fail") << ", " << bifurcate::to_string(cls.overall)
        << (spf_agree ? "" : ", spf DISAGREE") << (contradiction ? ", CONTRADICTION" : "") << '\n';
    if (!spf_agree) status = kSpfDisagreement;
    if (contradiction && status == kOk) status = kTheoremContradiction;
  }
  j["families"] = fams;
  j["exit_code"] = status;
  report::write_file(out_path(cfg, "selftest.json"), report::dump(j));
  return status;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"critflow: critical pairs, spectral flow and global bifurcation diagnostics"};
  app.require_subcommand(1);
  RunConfig cfg;
  // The config file seeds the defaults; flags parsed afterwards override it.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    std::string file;
    if (arg == "--config" && i + 1 < argc) file = argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) file = arg.substr(9);
    if (file.empty()) continue;
    try {
      apply_config_file(cfg, file);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsage;
    }
  }
  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--config", "JSON file with option defaults");
    sub->add_option("--family", cfg.family, "built-in family name or manifest path")->capture_default_str();
    sub->add_option("--lambda-lo", cfg.lambda_lo, "lower end of the parameter interval")->capture_default_str();
    sub->add_option("--lambda-hi", cfg.lambda_hi, "upper end of the parameter interval")->capture_default_str();
    sub->add_option("--slices", cfg.slices, "parameter slices of the scan")->capture_default_str();
    sub->add_option("--window", cfg.window, "half-height R of the (lambda, y) window")->capture_default_str();
    sub->add_option("--epsilon", cfg.epsilon, "sublevel pair half-width")->capture_default_str();
    sub->add_option("--grid-h", cfg.grid_h, "cubical grid step")->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "worker threads (0: all cores)")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
  };
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"spectral-flow", "spectral flow of the Hessian path (or --path manifest) by three methods", cmd_spectral_flow},
      {"scan", "hypotheses, critical-pair scan and classification", cmd_scan},
      {"homology", "relative Betti numbers of the sublevel pairs at both parameter ends", cmd_homology},
      {"deform", "transport of sublevel sets along the parameter", cmd_deform},
      {"eversion", "full report for the radial eversion surrogate", cmd_eversion},
      {"indefinite", "strongly indefinite Galerkin demo", cmd_indefinite},
      {"selftest", "hypotheses, classification and spectral flow for every built-in family", cmd_selftest},
  };
  std::string path = cfg.path;
  double level_a = 0.0, level_b = 0.0;
  CLI::Option* opt_a = nullptr;
  CLI::Option* opt_b = nullptr;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    if (std::string(s.name) == "spectral-flow") sub->add_option("--path", path, "operator path manifest (JSON)");
    if (std::string(s.name) == "indefinite") sub->add_option("--modes", cfg.modes, "excited modes")->capture_default_str();
    if (std::string(s.name) == "deform") {
      sub->add_option("--starts", cfg.starts, "sampled starts per map")->capture_default_str();
      opt_a = sub->add_option("--level-a", level_a, "lower level (default: below every sampled critical value)");
      opt_b = sub->add_option("--level-b", level_b, "upper level (default: above every sampled critical value)");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  cfg.path = path;
  if (opt_a && opt_a->count() > 0) cfg.level_a = level_a;
  if (opt_b && opt_b->count() > 0) cfg.level_b = level_b;
  for (const auto& s : subs) {
    if (!app.got_subcommand(s.name)) continue;
    try {
      return s.fn(cfg, std::cout);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsage;
    }
  }
  return kUsage;
}

}  // namespace critflow::cli
