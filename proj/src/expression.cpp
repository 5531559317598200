#include "critflow/expression.hpp"

#include <cmath>
#include <fstream>

#include "critflow/error.hpp"

namespace critflow {

struct Expression::Node {
  enum class Kind { Constant, Lambda, Norm, Coord, Dot, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
  Kind kind = Kind::Constant;
  double value = 0.0;
  int index = 0;
  std::vector<double> vector;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double lambda, const Vec& x) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::Lambda: return lambda;
      case Kind::Norm: return x.norm();
      case Kind::Coord: return x[index];
      case Kind::Dot: {
        double s = 0.0;
        for (std::size_t i = 0; i < vector.size(); ++i) s += vector[i] * x[static_cast<Eigen::Index>(i)];
        return s;
      }
      case Kind::Add: {
        double s = 0.0;
        for (const auto& a : args) s += a->eval(lambda, x);
        return s;
      }
      case Kind::Sub: return args[0]->eval(lambda, x) - args[1]->eval(lambda, x);
      case Kind::Mul: {
        double p = 1.0;
        for (const auto& a : args) p *= a->eval(lambda, x);
        return p;
      }
      case Kind::Div: return args[0]->eval(lambda, x) / args[1]->eval(lambda, x);
      case Kind::Pow: return std::pow(args[0]->eval(lambda, x), args[1]->eval(lambda, x));
      case Kind::Neg: return -args[0]->eval(lambda, x);
      case Kind::Sin: return std::sin(args[0]->eval(lambda, x));
      case Kind::Cos: return std::cos(args[0]->eval(lambda, x));
      case Kind::Exp: return std::exp(args[0]->eval(lambda, x));
    }
    return 0.0;
  }

  int max_coordinate() const {
    int m = -1;
    if (kind == Kind::Coord) m = index;
    if (kind == Kind::Dot) m = static_cast<int>(vector.size()) - 1;
    for (const auto& a : args) m = std::max(m, a->max_coordinate());
    return m;
  }
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::ManifestError, what); }

std::shared_ptr<const Node> build(const nlohmann::json& j) {
  auto node = std::make_shared<Node>();
  if (j.is_number()) {
    node->kind = Kind::Constant;
    node->value = j.get<double>();
    return node;
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "lambda") {
      node->kind = Kind::Lambda;
    } else if (s == "norm") {
      node->kind = Kind::Norm;
    } else if (s.size() > 1 && s[0] == 'x') {
      node->kind = Kind::Coord;
      try {
        node->index = std::stoi(s.substr(1));
      } catch (const std::exception&) {
        bad("bad coordinate name '" + s + "'");
      }
    } else {
      bad("unknown symbol '" + s + "'");
    }
    return node;
  }
  if (!j.is_object()) bad("expression nodes must be numbers, strings or objects");
  if (j.contains("coord")) {
    node->kind = Kind::Coord;
    node->index = j.at("coord").get<int>();
    if (node->index < 0) bad("negative coordinate index");
    return node;
  }
  if (j.contains("dot")) {
    node->kind = Kind::Dot;
    node->vector = j.at("dot").get<std::vector<double>>();
    return node;
  }
  if (!j.contains("op") || !j.contains("args")) bad("operator node needs 'op' and 'args'");
  const auto op = j.at("op").get<std::string>();
  for (const auto& a : j.at("args")) node->args.push_back(build(a));
  const auto n = node->args.size();
  auto arity = [&](std::size_t k) {
    if (n != k) bad("operator '" + op + "' expects " + std::to_string(k) + " arguments");
  };
  if (op == "+") {
    node->kind = Kind::Add;
    if (n == 0) bad("'+' needs arguments");
  } else if (op == "*") {
    node->kind = Kind::Mul;
    if (n == 0) bad("'*' needs arguments");
  } else if (op == "-") {
    if (n == 1) {
      node->kind = Kind::Neg;
    } else {
      arity(2);
      node->kind = Kind::Sub;
    }
  } else if (op == "/") {
    arity(2);
    node->kind = Kind::Div;
  } else if (op == "pow") {
    arity(2);
    node->kind = Kind::Pow;
  } else if (op == "sin") {
    arity(1);
    node->kind = Kind::Sin;
  } else if (op == "cos") {
    arity(1);
    node->kind = Kind::Cos;
  } else if (op == "exp") {
    arity(1);
    node->kind = Kind::Exp;
  } else {
    bad("unknown operator '" + op + "'");
  }
  return node;
}

}  // namespace

Expression Expression::parse(const nlohmann::json& node) { return Expression(build(node)); }

double Expression::operator()(double lambda, const Vec& x) const { return root_->eval(lambda, x); }

int Expression::max_coordinate() const { return root_->max_coordinate(); }

FunctionalFamily family_from_manifest(const nlohmann::json& manifest) {
  try {
    const int dim = manifest.at("dim").get<int>();
    if (dim <= 0) bad("dim must be positive");
    const auto expr = Expression::parse(manifest.at("f"));
    if (expr.max_coordinate() >= dim) bad("expression references a coordinate beyond dim");
    std::optional<Box> box;
    if (manifest.contains("box")) {
      const auto lo = manifest.at("box").at("lo").get<std::vector<double>>();
      const auto hi = manifest.at("box").at("hi").get<std::vector<double>>();
      if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) bad("box size mismatch");
      box = Box{Eigen::Map<const Vec>(lo.data(), dim), Eigen::Map<const Vec>(hi.data(), dim)};
      if (box->empty()) bad("box is empty");
    }
    const auto name = manifest.value("name", std::string("manifest"));
    return make_family(name, dim, [expr](double l, const Vec& x) { return expr(l, x); }, {}, {}, {}, box);
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

FunctionalFamily family_from_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  return family_from_manifest(j);
}

}  // namespace critflow
