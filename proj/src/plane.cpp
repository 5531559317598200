#include "critflow/plane.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "critflow/error.hpp"

namespace critflow::plane {

RectGrid RectGrid::empty(int nx, int ny, double x0, double x1, double y0, double y1) {
  require(nx >= 1 && ny >= 1, "grid needs at least one cell per axis");
  require(x0 < x1 && y0 < y1, "rectangle must have positive extent");
  RectGrid g;
  g.x0 = x0;
  g.x1 = x1;
  g.y0 = y0;
  g.y1 = y1;
  g.nx = nx;
  g.ny = ny;
  g.occupied.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
  return g;
}

Point RectGrid::centre(int i, int j) const {
  return {x0 + (i + 0.5) * cell_width(), y0 + (j + 0.5) * cell_height()};
}

std::array<int, 2> RectGrid::cell_of(const Point& p) const {
  const int i = std::clamp(static_cast<int>(std::floor((p[0] - x0) / cell_width())), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p[1] - y0) / cell_height())), 0, ny - 1);
  return {i, j};
}

void RectGrid::occupy_segment(const Point& p, const Point& q) {
  const double len = std::max(std::abs(q[0] - p[0]) / cell_width(), std::abs(q[1] - p[1]) / cell_height());
  const int n = std::max(1, static_cast<int>(std::ceil(4.0 * len)));
  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const Point r{p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])};
    if (r[0] < x0 || r[0] > x1 || r[1] < y0 || r[1] > y1) continue;
    const auto c = cell_of(r);
    set(c[0], c[1]);
  }
}

std::string to_string(Separation::Kind k) { return k == Separation::Kind::Component ? "Component" : "Curve"; }

Separation component_or_curve(const RectGrid& grid) {
  require(grid.nx >= 1 && grid.ny >= 1, "grid needs at least one cell per axis");
  require(grid.occupied.size() == static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny),
          "mask size does not match the grid");
  const int nx = grid.nx, ny = grid.ny;
  std::vector<char> seen(grid.occupied.size(), 0);

  for (int i0 = 0; i0 < nx; ++i0) {
    if (!grid.at(i0, 0) || seen[grid.index(i0, 0)]) continue;
    std::vector<std::size_t> comp;
    std::deque<std::array<int, 2>> queue{{i0, 0}};
    seen[grid.index(i0, 0)] = 1;
    bool top = false;
    while (!queue.empty()) {
      const auto [i, j] = queue.front();
      queue.pop_front();
      comp.push_back(grid.index(i, j));
      top = top || j == ny - 1;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int a = i + di, b = j + dj;
          if ((di || dj) && a >= 0 && a < nx && b >= 0 && b < ny && grid.at(a, b) && !seen[grid.index(a, b)]) {
            seen[grid.index(a, b)] = 1;
            queue.push_back({a, b});
          }
        }
    }
    if (top) {
      std::sort(comp.begin(), comp.end());
      Separation s;
      s.kind = Separation::Kind::Component;
      s.component = std::move(comp);
      return s;
    }
  }

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(grid.occupied.size(), none);
  std::deque<std::array<int, 2>> queue;
  for (int j = 0; j < ny; ++j) {
    if (!grid.at(0, j)) {
      parent[grid.index(0, j)] = grid.index(0, j);
      queue.push_back({0, j});
    }
  }
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    if (i == nx - 1) {
      Separation s;
      s.kind = Separation::Kind::Curve;
      for (std::size_t c = grid.index(i, j);; c = parent[c]) {
        s.curve_cells.push_back(c);
        if (parent[c] == c) break;
      }
      std::reverse(s.curve_cells.begin(), s.curve_cells.end());
      const auto first = s.curve_cells.front(), last = s.curve_cells.back();
      const Point start = grid.centre(0, static_cast<int>(first / static_cast<std::size_t>(nx)));
      s.curve.points.push_back({grid.x0, start[1]});
      for (auto c : s.curve_cells) {
        s.curve.points.push_back(grid.centre(static_cast<int>(c % static_cast<std::size_t>(nx)), static_cast<int>(c / static_cast<std::size_t>(nx))));
      }
      s.curve.points.push_back({grid.x1, grid.centre(nx - 1, static_cast<int>(last / static_cast<std::size_t>(nx)))[1]});
      return s;
    }
    const int nb[4][2] = {{1, 0}, {0, 1}, {0, -1}, {-1, 0}};
    for (const auto& d : nb) {
      const int a = i + d[0], b = j + d[1];
      if (a >= 0 && a < nx && b >= 0 && b < ny && !grid.at(a, b) && parent[grid.index(a, b)] == none) {
        parent[grid.index(a, b)] = grid.index(i, j);
        queue.push_back({a, b});
      }
    }
  }
  fail(ErrorCode::InvalidArgument, "grid duality violated: neither a blocking component nor a free path");
}

bool verify_component(const RectGrid& grid, const std::vector<std::size_t>& cells) {
  if (cells.empty()) return false;
  std::vector<char> in(grid.occupied.size(), 0);
  bool bottom = false, top = false;
  for (auto c : cells) {
    if (c >= in.size() || !grid.occupied[c]) return false;
    in[c] = 1;
    const auto j = static_cast<int>(c / static_cast<std::size_t>(grid.nx));
    bottom = bottom || j == 0;
    top = top || j == grid.ny - 1;
  }
  if (!bottom || !top) return false;
  std::vector<char> seen(in.size(), 0);
  std::deque<std::size_t> queue{cells.front()};
  seen[cells.front()] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const auto c = queue.front();
    queue.pop_front();
    ++reached;
    const int i = static_cast<int>(c % static_cast<std::size_t>(grid.nx)), j = static_cast<int>(c / static_cast<std::size_t>(grid.nx));
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int a = i + di, b = j + dj;
        if (a < 0 || a >= grid.nx || b < 0 || b >= grid.ny) continue;
        const auto n = grid.index(a, b);
        if (in[n] && !seen[n]) {
          seen[n] = 1;
          queue.push_back(n);
        }
      }
  }
  return reached == cells.size();
}

bool verify_curve(const RectGrid& grid, const PlanarCurve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 2) return false;
  if (pts.front()[0] != grid.x0 || pts.back()[0] != grid.x1) return false;
  const double diag = std::hypot(grid.cell_width(), grid.cell_height()) * (1.0 + 1e-9);
  auto free_point = [&](const Point& p) {
    if (p[1] <= grid.y0 || p[1] >= grid.y1 || p[0] < grid.x0 || p[0] > grid.x1) return false;
    const auto c = grid.cell_of(p);
    return !grid.at(c[0], c[1]);
  };
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!free_point(pts[k])) return false;
    if (k == 0) continue;
    if (std::hypot(pts[k][0] - pts[k - 1][0], pts[k][1] - pts[k - 1][1]) > diag) return false;
    for (double s : {0.25, 0.5, 0.75}) {
      const Point m{pts[k - 1][0] + s * (pts[k][0] - pts[k - 1][0]), pts[k - 1][1] + s * (pts[k][1] - pts[k - 1][1])};
      if (!free_point(m)) return false;
    }
  }
  return true;
}

RectGrid mask_from_text(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string row;
    for (char ch : line) {
      if (ch == '0' || ch == '1') {
        row.push_back(ch);
      } else if (!std::isspace(static_cast<unsigned char>(ch))) {
        fail(ErrorCode::InvalidArgument, std::string("unexpected character in mask: ") + ch);
      }
    }
    if (!row.empty()) rows.push_back(row);
  }
  require(!rows.empty(), "mask has no rows");
  const int nx = static_cast<int>(rows.front().size()), ny = static_cast<int>(rows.size());
  RectGrid g = RectGrid::empty(nx, ny);
  for (int r = 0; r < ny; ++r) {
    require(static_cast<int>(rows[static_cast<std::size_t>(r)].size()) == nx, "mask rows have different lengths");
    for (int i = 0; i < nx; ++i) g.set(i, ny - 1 - r, rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] == '1');
  }
  return g;
}

RectGrid mask_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("mask JSON: ") + e.what());
  }
  try {
    RectGrid g;
    if (j.contains("rect")) {
      const auto r = j.at("rect").get<std::vector<double>>();
      require(r.size() == 4, "rect needs [x0, x1, y0, y1]");
      g = RectGrid::empty(j.at("nx").get<int>(), j.at("ny").get<int>(), r[0], r[1], r[2], r[3]);
    } else {
      g = RectGrid::empty(j.at("nx").get<int>(), j.at("ny").get<int>());
    }
    for (const auto& c : j.at("cells")) {
      const int i = c.at(0).get<int>(), jj = c.at(1).get<int>();
      require(i >= 0 && i < g.nx && jj >= 0 && jj < g.ny, "mask cell outside the grid");
      g.set(i, jj);
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("mask JSON: ") + e.what());
  }
}

RectGrid load_mask(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open mask file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return mask_from_json(text);
  return mask_from_text(text);
}

std::string render_svg(const RectGrid& grid, const Separation& sep, int pixels_per_cell) {
  const int p = std::max(1, pixels_per_cell);
  const int w = grid.nx * p, h = grid.ny * p;
  std::vector<char> comp(grid.occupied.size(), 0);
  for (auto c : sep.component) comp[c] = 1;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
     << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (!grid.at(i, j)) continue;
      os << "<rect x=\"" << i * p << "\" y=\"" << (grid.ny - 1 - j) * p << "\" width=\"" << p << "\" height=\"" << p
         << "\" fill=\"" << (comp[grid.index(i, j)] ? "#c0392b" : "#7f8c8d") << "\"/>\n";
    }
  if (sep.kind == Separation::Kind::Curve) {
    os << "<polyline fill=\"none\" stroke=\"#2471a3\" stroke-width=\"" << std::max(1, p / 3) << "\" points=\"";
    for (const auto& q : sep.curve.points) {
      os << (q[0] - grid.x0) / (grid.x1 - grid.x0) * w << ',' << (grid.y1 - q[1]) / (grid.y1 - grid.y0) * h << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

/// (1 - theta) u + theta x + (1 - x^2)^2 (c1 + c2 x).
ScalarProfile perturb(const ScalarProfile& u, double theta, double c1, double c2) {
  auto eval = [u, theta, c1, c2](double x) {
    const double w = 1.0 - x * x;
    return (1.0 - theta) * u(x) + theta * x + w * w * (c1 + c2 * x);
  };
  auto deriv = [u, theta, c1, c2](double x) {
    const double w = 1.0 - x * x;
    return (1.0 - theta) * u.derivative(x) + theta - 4.0 * x * w * (c1 + c2 * x) + w * w * c2;
  };
  return ScalarProfile{eval, deriv};
}

struct Track {
  std::vector<Point> path;
  bool ok = false;
};

Track track_zero_set(const ScalarProfile& a, const ScalarProfile& b, double step) {
  Track tr;
  Point p{-1.0, -1.0};
  tr.path.push_back(p);
  Point prev_tangent{1.0, 1.0};
  const auto max_steps = static_cast<long>(40.0 / step);
  auto phi = [&](const Point& q) { return a(q[0]) - b(q[1]); };
  for (long n = 0; n < max_steps; ++n) {
    const double gx = a.derivative(p[0]), gy = -b.derivative(p[1]);
    const double gn = std::hypot(gx, gy);
    if (!(gn > 1e-12)) return tr;
    Point tan{-gy / gn, gx / gn};
    if (tan[0] * prev_tangent[0] + tan[1] * prev_tangent[1] < 0) tan = {-tan[0], -tan[1]};
    prev_tangent = tan;
    if (std::hypot(1.0 - p[0], 1.0 - p[1]) <= step) {
      tr.path.push_back({1.0, 1.0});
      tr.ok = true;
      return tr;
    }
    Point q{p[0] + step * tan[0], p[1] + step * tan[1]};
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
      q[0] = std::clamp(q[0], -1.0, 1.0);
      q[1] = std::clamp(q[1], -1.0, 1.0);
      const double r = phi(q);
      if (std::abs(r) <= 1e-13) {
        converged = true;
        break;
      }
      const double hx = a.derivative(q[0]), hy = -b.derivative(q[1]);
      const double h2 = hx * hx + hy * hy;
      if (!(h2 > 1e-24)) break;
      q[0] -= r * hx / h2;
      q[1] -= r * hy / h2;
    }
    if (!converged) return tr;
    // Progress must be made along the curve; a corrector that falls back signals a stall.
    if ((q[0] - p[0]) * tan[0] + (q[1] - p[1]) * tan[1] <= 0.25 * step) return tr;
    const bool on_edge = (q[0] <= -1.0 || q[0] >= 1.0 || q[1] <= -1.0 || q[1] >= 1.0);
    if (on_edge && std::hypot(1.0 - q[0], 1.0 - q[1]) > 2.0 * step) return tr;
    p = q;
    tr.path.push_back(p);
  }
  return tr;
}

}  // namespace

Reparametrization common_value_reparametrization(const ScalarProfile& a, const ScalarProfile& b, double eps,
                                                 const ReparamOptions& opts) {
  require(eps > 0.0, "eps must be positive");
  require(opts.grid >= 1 && opts.samples >= 2, "grid and samples must be positive");
  for (const auto* u : {&a, &b}) {
    require(std::abs((*u)(-1.0) + 1.0) <= 1e-12 && std::abs((*u)(1.0) - 1.0) <= 1e-12,
            "profiles must satisfy u(-1) = -1 and u(1) = 1");
  }
  const double theta = std::min(0.25 * eps, 0.5);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double step = 1.0 / (4.0 * opts.grid);

  for (int attempt = 0; attempt <= opts.max_redither; ++attempt) {
    // The dither keeps values inside (-1, 1): |(1 - x^2)^2 (c1 + c2 x)| < theta (1 - |x|) when |c1| + |c2| < theta / 4.
    const double amp = 0.1 * theta;
    Reparametrization out;
    out.a_tilde = perturb(a, theta, amp * unit(rng), amp * unit(rng));
    out.b_tilde = perturb(b, theta, amp * unit(rng), amp * unit(rng));
    out.redithers = attempt;
    const Track tr = track_zero_set(out.a_tilde, out.b_tilde, step);
    if (!tr.ok) continue;

    out.path = tr.path;
    std::vector<double> arc(tr.path.size(), 0.0);
    for (std::size_t k = 1; k < tr.path.size(); ++k) {
      arc[k] = arc[k - 1] + std::hypot(tr.path[k][0] - tr.path[k - 1][0], tr.path[k][1] - tr.path[k - 1][1]);
    }
    const double total = arc.back();
    for (const auto& q : tr.path) out.residual = std::max(out.residual, std::abs(out.a_tilde(q[0]) - out.b_tilde(q[1])));
    for (int k = 0; k < opts.samples; ++k) {
      const double t = -1.0 + 2.0 * k / (opts.samples - 1);
      const double s = (t + 1.0) / 2.0 * total;
      auto it = std::lower_bound(arc.begin(), arc.end(), s);
      std::size_t hi = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - arc.begin()));
      hi = std::min(hi, arc.size() - 1);
      const std::size_t lo = hi - 1;
      const double w = arc[hi] > arc[lo] ? std::clamp((s - arc[lo]) / (arc[hi] - arc[lo]), 0.0, 1.0) : 0.0;
      Point q{tr.path[lo][0] + w * (tr.path[hi][0] - tr.path[lo][0]), tr.path[lo][1] + w * (tr.path[hi][1] - tr.path[lo][1])};
      // Project the chord point back onto the zero set along the gradient.
      for (int itn = 0; itn < 20 && k > 0 && k + 1 < opts.samples; ++itn) {
        const double r = out.a_tilde(q[0]) - out.b_tilde(q[1]);
        if (std::abs(r) <= 1e-13) break;
        const double hx = out.a_tilde.derivative(q[0]), hy = -out.b_tilde.derivative(q[1]);
        const double h2 = hx * hx + hy * hy;
        if (!(h2 > 1e-24)) break;
        q[0] = std::clamp(q[0] - r * hx / h2, -1.0, 1.0);
        q[1] = std::clamp(q[1] - r * hy / h2, -1.0, 1.0);
      }
      out.t.push_back(t);
      out.c.push_back(q[0]);
      out.d.push_back(q[1]);
      out.residual = std::max(out.residual, std::abs(out.a_tilde(q[0]) - out.b_tilde(q[1])));
    }
    for (int k = 0; k <= 2000; ++k) {
      const double x = -1.0 + k / 1000.0;
      out.perturbation_a = std::max(out.perturbation_a, std::abs(out.a_tilde(x) - a(x)));
      out.perturbation_b = std::max(out.perturbation_b, std::abs(out.b_tilde(x) - b(x)));
    }
    return out;
  }
  fail(ErrorCode::TrackingStalled, "continuation of the common-value curve stalled after " +
                                       std::to_string(opts.max_redither) + " re-dithers");
}

}  // namespace critflow::plane
