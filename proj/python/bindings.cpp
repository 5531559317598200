#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "critflow/bifurcate.hpp"
#include "critflow/cli.hpp"
#include "critflow/error.hpp"
#include "critflow/galerkin.hpp"
#include "critflow/registry.hpp"
#include "critflow/report.hpp"
#include "critflow/spectral.hpp"
#include "critflow/topology.hpp"

namespace py = pybind11;
using namespace critflow;

namespace {

// Structured results cross the boundary as JSON text; the package decodes them.
std::string family_spectral_flow(const std::string& family, double lo, double hi) {
  const auto f = resolve_family(family);
  const auto path = spectral::hessian_path(f, lo, hi);
  const Mat La = path.at(lo), Lb = path.at(hi);
  report::json j = {{"endpoints", spectral::spectral_flow_endpoints(La, Lb)},
                    {"crossings", spectral::spectral_flow_crossings(path).spf},
                    {"signature", spectral::spectral_flow_signature(La, Lb)}};
  return j.dump();
}

std::string eversion(int slices, double grid_h) {
  bifurcate::EversionOptions o;
  o.slices = slices;
  o.grid_h = grid_h;
  return report::to_json(bifurcate::demo_eversion_report(o)).dump();
}

std::string indefinite(int modes, int slices) {
  galerkin::IndefiniteOptions o;
  o.slices = slices;
  return report::to_json(galerkin::strongly_indefinite_demo(modes, o)).dump();
}

std::string scan(const std::string& family, int slices, double window) {
  bifurcate::ScanOptions o;
  o.slices = slices;
  o.window = window;
  const auto cls = bifurcate::classify_alternatives(resolve_family(family), o);
  report::json j = report::branch_summary(cls.branch, cls.per_component);
  j["classification"] = bifurcate::to_string(cls.overall);
  j["window_doublings"] = cls.window_doublings;
  return j.dump();
}

std::vector<int> sublevel_betti(const std::string& family, double lambda, double eps, double h) {
  const auto f = resolve_family(family);
  topology::GridParams p;
  p.h = h;
  return topology::sublevel_pair_homology([&](const Vec& x) { return f.eval(lambda, x); }, f.domain, -eps, eps, p)
      .betti.values;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "critflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

PYBIND11_MODULE(_critflow, m) {
  m.doc() = "Critical-pair scans, spectral flow and sublevel homology";

  py::register_exception<Error>(m, "CritflowError", PyExc_RuntimeError);

  m.attr("schema_version") = report::kSchemaVersion;
  m.def("families", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : builtin_families()) out.emplace_back(e.name, e.description);
    return out;
  });
  m.def("evaluate", [](const std::string& family, double lambda, const Vec& x) {
    const auto f = resolve_family(family);
    require(x.size() == f.dim, "point has the wrong dimension");
    return f.eval(lambda, x);
  }, py::arg("family"), py::arg("lam"), py::arg("x"));
  m.def("gradient", [](const std::string& family, double lambda, const Vec& x) {
    const auto f = resolve_family(family);
    require(x.size() == f.dim, "point has the wrong dimension");
    return Vec(f.grad(lambda, x));
  }, py::arg("family"), py::arg("lam"), py::arg("x"));
  m.def("morse_index", [](const Mat& M) { return spectral::morse_index(M); }, py::arg("matrix"));
  m.def("spectral_flow_endpoints", [](const Mat& La, const Mat& Lb) { return spectral::spectral_flow_endpoints(La, Lb); },
        py::arg("la"), py::arg("lb"));
  m.def("spectral_flow_signature", [](const Mat& La, const Mat& Lb) { return spectral::spectral_flow_signature(La, Lb); },
        py::arg("la"), py::arg("lb"));
  m.def("spectral_flow_path", [](const std::function<Mat(double)>& at, int dim, double a, double b) {
    spectral::SymOperatorPath p;
    p.dim = dim;
    p.a = a;
    p.b = b;
    // The callback holds the GIL; crossing counts run single-threaded.
    p.at = at;
    return spectral::spectral_flow_crossings(p, -1.0, 1).spf;
  }, py::arg("at"), py::arg("dim"), py::arg("a") = -1.0, py::arg("b") = 1.0);
  m.def("_family_spectral_flow", &family_spectral_flow);
  m.def("_eversion", &eversion);
  m.def("_indefinite", &indefinite);
  m.def("_scan", &scan);
  m.def("sublevel_betti", &sublevel_betti, py::arg("family"), py::arg("lam"), py::arg("eps") = 0.05,
        py::arg("h") = 0.02);
  m.def("run_cli", &run_cli, py::arg("args"));
}
