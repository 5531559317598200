#include "critflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "critflow/error.hpp"

namespace critflow::report {

json envelope(const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

json to_json(const topology::BettiVector& b) { return b.values; }

json to_json(const bifurcate::Landmark& m) {
  return {{"lambda", m.lambda}, {"y", m.y}, {"witness_norm", m.witness_norm},
          {"bracket", {m.bracket_lo, m.bracket_hi}}};
}

json to_json(const bifurcate::BranchLandmarks& lm) {
  auto list = [](const std::vector<bifurcate::Landmark>& v) {
    json a = json::array();
    for (const auto& m : v) a.push_back(to_json(m));
    return a;
  };
  return {{"bifurcations", list(lm.bifurcations)},
          {"folds", list(lm.folds)},
          {"zero_crossings", list(lm.zero_crossings)},
          {"terminal", list(lm.terminal)}};
}

json to_json(const bifurcate::HypothesisReport& h) {
  json j;
  j["ps"] = {{"ok", h.ps_ok}, {"sequences", h.ps_sequences}, {"escaping", h.ps_escaping},
             {"worst_norm", h.ps_worst_norm}};
  j["lambda_derivative_bounded"] = {{"ok", h.partf_bounded_ok}, {"sup_by_box_scale", h.partf_sup}};
  j["endpoints_not_bifurcation"] = {{"ok", h.nonbif_endpoints_ok},
                                    {"nontrivial_pairs", h.endpoint_nontrivial},
                                    {"closest_value", std::isfinite(h.endpoint_closest) ? json(h.endpoint_closest) : json()}};
  j["pairs_inequivalent"] = {{"ok", h.pair_inequivalent_ok},
                             {"method", h.pair_method},
                             {"betti_minus", to_json(h.betti_minus)},
                             {"betti_plus", to_json(h.betti_plus)},
                             {"morse_minus", h.morse_minus},
                             {"morse_plus", h.morse_plus},
                             {"detail", h.pair_detail}};
  j["all"] = h.all();
  return j;
}

json to_json(const deform::TransportWitness& w) {
  auto stats = [](const deform::MapStatistics& m) {
    return json{{"flows", m.flows}, {"violations", m.violations}, {"max_overshoot", m.max_overshoot}};
  };
  return {{"floor", w.floor},
          {"bound", w.bound},
          {"forward", stats(w.forward)},
          {"backward", stats(w.backward)},
          {"homotopy", stats(w.homotopy)},
          {"homotopy_bar", stats(w.homotopy_bar)},
          {"flows", w.flow_count()},
          {"violations", w.violations()},
          {"max_overshoot", w.max_overshoot()}};
}

json to_json(const spectral::CrossingResult& c) {
  json cr = json::array();
  for (const auto& x : c.crossings) cr.push_back({{"lambda", x.lambda}, {"direction", x.direction}});
  return {{"spf", c.spf}, {"crossings", cr}, {"intervals_examined", c.intervals_examined}};
}

json to_json(const galerkin::StabilizationReport& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    rows.push_back({{"n", r.n},
                    {"sign_minus", r.sign_minus},
                    {"sign_plus", r.sign_plus},
                    {"endpoint_pairs", r.endpoint_pairs},
                    {"y_terminal", r.y_found ? json(r.y_terminal) : json()},
                    {"witness_norm", r.witness_norm},
                    {"drift", std::isfinite(s.drift[i]) ? json(s.drift[i]) : json()}});
  }
  return {{"stabilization_N", s.stabilization_index},
          {"sign_minus", s.sign_minus},
          {"sign_plus", s.sign_plus},
          {"spf", s.spf},
          {"rows", rows}};
}

json to_json(const galerkin::IndefiniteReport& r) {
  return {{"modes", r.modes},
          {"spf", r.spf_endpoints},
          {"spf_methods", {{"endpoints", r.spf_endpoints}, {"crossings", r.spf_crossings}, {"signature", r.spf_signature}}},
          {"degree_product", r.degree_product},
          {"stabilization_N", r.stabilization.stabilization_index},
          {"stabilization", to_json(r.stabilization)},
          {"classification", bifurcate::to_string(r.classification.overall)},
          {"branch_landmarks", to_json(r.landmarks)},
          {"branch_lambda_range", {r.branch_lambda_min, r.branch_lambda_max}},
          {"terminal_value", r.terminal_value},
          {"terminal_oracle", r.terminal_oracle},
          {"hypothesis_report", to_json(r.hypotheses)},
          {"branch", branch_summary(r.classification.branch, r.classification.per_component)}};
}

json to_json(const bifurcate::EversionReport& r) {
  return {{"spf", {{"endpoints", r.spf_endpoints}, {"crossings", r.spf_crossings}, {"signature", r.spf_signature}}},
          {"degree_product", r.degree_product},
          {"morse_index", {{"lambda_minus_1", r.morse_minus}, {"lambda_plus_1", r.morse_plus}}},
          {"critical_circle",
           {{"radius", r.circle_radius}, {"radius_spread", r.circle_radius_spread}, {"value", r.circle_value},
            {"points", r.circle_points}}},
          {"landmarks", to_json(r.landmarks)},
          {"classification", bifurcate::to_string(r.classification)},
          {"betti", {{"lambda_minus_1", to_json(r.betti_minus)}, {"lambda_plus_1", to_json(r.betti_plus)}}},
          {"pair_verdict", r.pair_verdict},
          {"branch", branch_summary(r.branch)}};
}

json branch_summary(const bifurcate::BranchSet& branch, const std::vector<bifurcate::Alternative>& per_component) {
  json comps = json::array();
  for (std::size_t i = 0; i < branch.components.size(); ++i) {
    const auto& c = branch.components[i];
    json cj = {{"id", c.id},
               {"members", c.members.size()},
               {"nontrivial", c.nontrivial},
               {"lambda_range", {c.lambda_min, c.lambda_max}},
               {"y_range", {c.y_min, c.y_max}},
               {"touches_trivial", c.touches_trivial},
               {"touches_window", c.touches_window}};
    if (i < per_component.size()) cj["alternative"] = bifurcate::to_string(per_component[i]);
    comps.push_back(cj);
  }
  return {{"slices", branch.lambdas.size()},
          {"lambda_interval", {branch.lambdas.front(), branch.lambdas.back()}},
          {"window", branch.window},
          {"pairs", branch.pairs.size()},
          {"nontrivial_pairs", branch.nontrivial_count()},
          {"links", branch.links.size()},
          {"dropped_seeds", branch.dropped_seeds},
          {"components", comps}};
}

std::string pairs_csv(const bifurcate::BranchSet& branch) {
  std::ostringstream os;
  const Eigen::Index d = branch.pairs.empty() ? 0 : branch.pairs.front().witness.size();
  os << "lambda,y";
  for (Eigen::Index i = 0; i < d; ++i) os << ",x" << i;
  os << ",grad_norm,kind,component\n";
  for (const auto& p : branch.pairs) {
    os << number(p.lambda) << ',' << number(p.y);
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << number(p.witness[i]);
    os << ',' << number(p.grad_norm) << ',' << (p.kind == bifurcate::PairKind::Trivial ? "trivial" : "nontrivial") << ','
       << p.component << '\n';
  }
  return os.str();
}

std::string drift_csv(const galerkin::StabilizationReport& s) {
  std::ostringstream os;
  os << "n,sign_minus,sign_plus,endpoint_pairs,y_terminal,witness_norm,drift\n";
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    os << r.n << ',' << r.sign_minus << ',' << r.sign_plus << ',' << r.endpoint_pairs << ','
       << (r.y_found ? number(r.y_terminal) : "nan") << ',' << number(r.witness_norm) << ',' << number(s.drift[i])
       << '\n';
  }
  return os.str();
}

std::string eigenvalue_csv(const spectral::EigenTrace& trace) {
  std::ostringstream os;
  os << "lambda";
  const Eigen::Index d = trace.eigenvalues.empty() ? 0 : trace.eigenvalues.front().size();
  for (Eigen::Index k = 1; k <= d; ++k) os << ",eig_" << k;
  os << '\n';
  for (std::size_t i = 0; i < trace.lambda.size(); ++i) {
    os << number(trace.lambda[i]);
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << number(trace.eigenvalues[i][k]);
    os << '\n';
  }
  return os.str();
}

std::string branch_svg(const bifurcate::BranchSet& branch, double eps,
                       const std::optional<bifurcate::SeparatingCurves>& curves) {
  const double W = 640, H = 480, pad = 40;
  const double l0 = branch.lambdas.front(), l1 = branch.lambdas.back();
  double R = branch.window;
  for (const auto& p : branch.pairs) R = std::max(R, std::abs(p.y));
  auto px = [&](double l) { return pad + (l - l0) / (l1 - l0) * (W - 2 * pad); };
  auto py = [&](double y) { return H / 2 - y / R * (H / 2 - pad); };
  static const char* palette[] = {"#c0392b", "#2471a3", "#27ae60", "#8e44ad", "#d35400", "#16a085"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << number(px(l0)) << "\" y=\"" << number(py(branch.window)) << "\" width=\""
     << number(px(l1) - px(l0)) << "\" height=\"" << number(py(0) - py(branch.window))
     << "\" fill=\"#eaf2f8\" stroke=\"#85929e\"/>\n";
  os << "<rect x=\"" << number(px(l0)) << "\" y=\"" << number(py(0)) << "\" width=\"" << number(px(l1) - px(l0))
     << "\" height=\"" << number(py(-branch.window) - py(0)) << "\" fill=\"#fdedec\" stroke=\"#85929e\"/>\n";
  for (double e : {eps, -eps}) {
    os << "<line x1=\"" << number(px(l0)) << "\" y1=\"" << number(py(e)) << "\" x2=\"" << number(px(l1))
       << "\" y2=\"" << number(py(e)) << "\" stroke=\"#aab7b8\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "<line x1=\"" << number(px(l0)) << "\" y1=\"" << number(py(0)) << "\" x2=\"" << number(px(l1))
     << "\" y2=\"" << number(py(0)) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  for (const auto& [i, j] : branch.links) {
    const auto& p = branch.pairs[i];
    const auto& q = branch.pairs[j];
    const int c = std::max(p.component, q.component);
    if (c < 0) continue;
    os << "<line x1=\"" << number(px(p.lambda)) << "\" y1=\"" << number(py(p.y)) << "\" x2=\"" << number(px(q.lambda))
       << "\" y2=\"" << number(py(q.y)) << "\" stroke=\"" << palette[c % 6] << "\" stroke-width=\"2\"/>\n";
  }
  for (const auto& p : branch.pairs) {
    if (p.kind != bifurcate::PairKind::NonTrivial) continue;
    os << "<circle cx=\"" << number(px(p.lambda)) << "\" cy=\"" << number(py(p.y)) << "\" r=\"1.5\" fill=\""
       << palette[std::max(0, p.component) % 6] << "\"/>\n";
  }
  if (curves) {
    for (const auto* prof : {&curves->a, &curves->b}) {
      os << "<polyline fill=\"none\" stroke=\"#117a65\" stroke-width=\"1.5\" points=\"";
      for (int k = 0; k <= 200; ++k) {
        const double l = l0 + (l1 - l0) * k / 200.0;
        os << number(px(l)) << ',' << number(py((*prof)(l))) << ' ';
      }
      os << "\"/>\n";
    }
  }
  os << "<text x=\"" << number(W - pad) << "\" y=\"" << number(py(0) - 4) << "\" font-size=\"12\">lambda</text>\n";
  os << "<text x=\"" << number(px(l0) + 4) << "\" y=\"" << number(pad - 8) << "\" font-size=\"12\">y</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorCode::InvalidArgument, "failed writing " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace critflow::report
