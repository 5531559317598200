#include "critflow/topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "critflow/critical_points.hpp"
#include "critflow/deform.hpp"
#include "critflow/error.hpp"
#include "critflow/parallel.hpp"

namespace critflow::topology {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Geometry helpers shared by the complex builders.
struct Cells {
  const CubicalGrid& g;
  int d;
  std::vector<std::vector<std::size_t>> corner_offsets;  // per mask, offsets of its vertices

  explicit Cells(const CubicalGrid& grid) : g(grid), d(grid.dim()) {
    corner_offsets.resize(std::size_t{1} << d);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      for (unsigned sub = mask;; sub = (sub - 1) & mask) {
        std::size_t off = 0;
        for (int k = 0; k < d; ++k)
          if (sub & (1u << k)) off += g.stride(k);
        corner_offsets[mask].push_back(off);
        if (sub == 0) break;
      }
    }
  }

  int coord(std::size_t v, int k) const {
    return static_cast<int>((v / g.stride(k)) % static_cast<std::size_t>(g.counts[static_cast<std::size_t>(k)]));
  }

  bool valid(std::size_t v, unsigned mask) const {
    for (int k = 0; k < d; ++k)
      if ((mask & (1u << k)) && coord(v, k) + 1 >= g.counts[static_cast<std::size_t>(k)]) return false;
    return true;
  }

  double value(std::size_t v, unsigned mask) const {
    double m = -kInf;
    for (std::size_t off : corner_offsets[mask]) m = std::max(m, g.values[v + off]);
    return m;
  }

  CellId id(std::size_t v, unsigned mask) const { return (static_cast<CellId>(v) << d) | mask; }
  std::size_t vertex_of(CellId c) const { return static_cast<std::size_t>(c >> d); }
  unsigned mask_of(CellId c) const { return static_cast<unsigned>(c & ((CellId{1} << d) - 1)); }
};

int popcount(unsigned m) { return std::popcount(m); }

/// Cells with lo < value <= hi, per dimension, ascending ids.
CellSet collect(const Cells& cells, double lo, double hi, int jobs) {
  const CubicalGrid& g = cells.g;
  const int d = cells.d;
  const std::size_t nv = g.vertex_count();
  const std::size_t chunk = std::max<std::size_t>(1, nv / 64);
  const std::size_t chunks = (nv + chunk - 1) / chunk;
  std::vector<std::vector<std::vector<CellId>>> parts(chunks, std::vector<std::vector<CellId>>(static_cast<std::size_t>(d + 1)));
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t end = std::min(nv, (c + 1) * chunk);
    for (std::size_t v = c * chunk; v < end; ++v) {
      if (!(g.values[v] <= hi)) continue;
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        if (!cells.valid(v, mask)) continue;
        const double val = cells.value(v, mask);
        if (val <= hi && val > lo) parts[c][static_cast<std::size_t>(popcount(mask))].push_back(cells.id(v, mask));
      }
    }
  });
  CellSet out;
  out.by_dim.resize(static_cast<std::size_t>(d + 1));
  for (auto& p : parts)
    for (int k = 0; k <= d; ++k) {
      auto& dst = out.by_dim[static_cast<std::size_t>(k)];
      dst.insert(dst.end(), p[static_cast<std::size_t>(k)].begin(), p[static_cast<std::size_t>(k)].end());
    }
  return out;  // chunks are in vertex order and ids are vertex-major, so each list is sorted
}

/// Faces of a cell as ids.
template <class F>
void for_each_face(const Cells& cells, CellId c, F&& fn) {
  const std::size_t v = cells.vertex_of(c);
  const unsigned mask = cells.mask_of(c);
  for (int k = 0; k < cells.d; ++k) {
    const unsigned bit = 1u << k;
    if (!(mask & bit)) continue;
    fn(cells.id(v, mask ^ bit));
    fn(cells.id(v + cells.g.stride(k), mask ^ bit));
  }
}

std::uint32_t index_of(const std::vector<CellId>& sorted, CellId c) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
  if (it == sorted.end() || *it != c) return UINT32_MAX;
  return static_cast<std::uint32_t>(it - sorted.begin());
}

/// Rank of the relative boundary from dimension k to k-1 by column reduction.
std::size_t boundary_rank_reduction(const Cells& cells, const CellSet& rel, int k) {
  const auto& cols = rel.by_dim[static_cast<std::size_t>(k)];
  const auto& rows = rel.by_dim[static_cast<std::size_t>(k - 1)];
  std::vector<std::vector<std::uint32_t>> matrix;
  matrix.reserve(cols.size());
  for (CellId c : cols) {
    std::vector<std::uint32_t> col;
    for_each_face(cells, c, [&](CellId f) {
      const auto i = index_of(rows, f);
      if (i != UINT32_MAX) col.push_back(i);
    });
    std::sort(col.begin(), col.end());
    matrix.push_back(std::move(col));
  }
  return gf2_rank(std::move(matrix));
}

/// Rank of the relative boundary of 1-cells: incidence of a graph whose
/// vertices in the subcomplex collapse to one ground node.
std::size_t edge_rank_union_find(const Cells& cells, const CellSet& rel) {
  const auto& verts = rel.by_dim[0];
  const auto ground = static_cast<std::uint32_t>(verts.size());
  UnionFind uf(verts.size() + 1);
  for (CellId e : rel.by_dim[1]) {
    std::uint32_t ends[2] = {ground, ground};
    int n = 0;
    for_each_face(cells, e, [&](CellId f) {
      const auto i = index_of(verts, f);
      ends[n++] = i == UINT32_MAX ? ground : i;
    });
    uf.unite(ends[0], ends[1]);
  }
  const auto g = uf.find(ground);
  std::size_t free_components = 0;
  for (std::uint32_t i = 0; i < ground; ++i)
    if (uf.find(i) == i && i != g) ++free_components;
  return verts.size() - free_components;
}

/// Rank of the relative boundary of top cells. Each codimension-one face
/// bounds at most two top cells, so a cycle is a union of face-adjacent
/// components none of which has a relative face on its frontier.
std::size_t top_rank_union_find(const Cells& cells, const CellSet& rel) {
  const int d = cells.d;
  const auto& tops = rel.by_dim[static_cast<std::size_t>(d)];
  const auto& faces = rel.by_dim[static_cast<std::size_t>(d - 1)];
  const unsigned full = (1u << d) - 1;
  UnionFind uf(tops.size());
  std::vector<char> open(tops.size(), 0);
  for (std::uint32_t t = 0; t < tops.size(); ++t) {
    const std::size_t v = cells.vertex_of(tops[t]);
    for (int k = 0; k < d; ++k) {
      const unsigned bit = 1u << k;
      const std::size_t s = cells.g.stride(k);
      for (int side = 0; side < 2; ++side) {
        const std::size_t fv = side == 0 ? v : v + s;
        if (index_of(faces, cells.id(fv, full ^ bit)) == UINT32_MAX) continue;
        std::uint32_t other = UINT32_MAX;
        if (side == 0 && cells.coord(v, k) > 0) other = index_of(tops, cells.id(v - s, full));
        if (side == 1) other = index_of(tops, cells.id(v + s, full));
        if (other == UINT32_MAX) {
          open[t] = 1;
        } else {
          uf.unite(t, other);
        }
      }
    }
  }
  std::vector<char> root_open(tops.size(), 0);
  for (std::uint32_t t = 0; t < tops.size(); ++t)
    if (open[t]) root_open[uf.find(t)] = 1;
  std::size_t closed = 0;
  for (std::uint32_t t = 0; t < tops.size(); ++t)
    if (uf.find(t) == t && !root_open[t]) ++closed;
  return tops.size() - closed;
}

void check_values(const CubicalGrid& grid, double a, double b) {
  for (double v : grid.values) {
    if (std::isnan(v) || v == -kInf) fail(ErrorCode::NonFiniteValue, "grid value is not finite");
    for (double t : {a, b}) {
      if (std::isfinite(t) && std::abs(v - t) <= 1e-12 * (1.0 + std::abs(t))) {
        fail(ErrorCode::ThresholdOnGrid, "threshold " + std::to_string(t) + " coincides with a grid value");
      }
    }
  }
}

}  // namespace

std::size_t gf2_rank(std::vector<std::vector<std::uint32_t>> columns) {
  std::unordered_map<std::uint32_t, std::size_t> pivot_of;  // low row -> column
  std::size_t rank = 0;
  std::vector<std::uint32_t> scratch;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    auto& col = columns[j];
    while (!col.empty()) {
      auto it = pivot_of.find(col.back());
      if (it == pivot_of.end()) break;
      const auto& other = columns[it->second];
      scratch.clear();
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(scratch));
      col.swap(scratch);
    }
    if (!col.empty()) {
      pivot_of.emplace(col.back(), j);
      ++rank;
    }
  }
  return rank;
}

std::size_t cell_budget_from_env() {
  if (const char* s = std::getenv("CRITFLOW_CELL_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultCellBudget;
}

std::size_t CubicalGrid::vertex_count() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

std::size_t CubicalGrid::stride(int axis) const {
  std::size_t s = 1;
  for (int k = 0; k < axis; ++k) s *= static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]);
  return s;
}

Vec CubicalGrid::vertex_position(std::size_t v) const {
  Vec x(dim());
  for (int k = 0; k < dim(); ++k) {
    const auto n = static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]);
    x[k] = lo[k] + h * static_cast<double>(v % n);
    v /= n;
  }
  return x;
}

std::size_t CubicalGrid::cell_count() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(2 * c - 1);
  return n;
}

CubicalGrid CubicalGrid::sample(const std::function<double(const Vec&)>& fn, const Box& box, double h,
                                int jobs, bool allow_3d) {
  require(h > 0.0, "mesh size must be positive");
  require(box.dim() == 2 || (allow_3d && box.dim() == 3), "cubical grids support dimension 2 (or 3 when enabled)");
  require(!box.empty(), "grid box is empty");
  CubicalGrid g;
  g.lo = box.lo;
  g.h = h;
  for (int k = 0; k < box.dim(); ++k) {
    g.counts.push_back(static_cast<int>(std::floor((box.hi[k] - box.lo[k]) / h + 1e-9)) + 1);
  }
  g.values.assign(g.vertex_count(), 0.0);
  const std::size_t row = static_cast<std::size_t>(g.counts[0]);
  parallel_for(g.vertex_count() / row, jobs, [&](std::size_t r) {
    for (std::size_t i = 0; i < row; ++i) {
      const std::size_t v = r * row + i;
      g.values[v] = fn(g.vertex_position(v));
    }
  });
  return g;
}

std::size_t CellSet::size() const {
  std::size_t n = 0;
  for (const auto& v : by_dim) n += v.size();
  return n;
}

bool CellSet::contains(int k, CellId id) const {
  if (k < 0 || k >= static_cast<int>(by_dim.size())) return false;
  const auto& v = by_dim[static_cast<std::size_t>(k)];
  return std::binary_search(v.begin(), v.end(), id);
}

CellSet sublevel_complex(const CubicalGrid& grid, double c) {
  require(std::isfinite(c), "threshold must be finite");
  return collect(Cells(grid), -kInf, c, 1);
}

bool is_face_closed(const CubicalGrid& grid, const CellSet& cells) {
  const Cells geo(grid);
  for (int k = 1; k < static_cast<int>(cells.by_dim.size()); ++k) {
    for (CellId c : cells.by_dim[static_cast<std::size_t>(k)]) {
      bool ok = true;
      for_each_face(geo, c, [&](CellId f) { ok = ok && cells.contains(k - 1, f); });
      if (!ok) return false;
    }
  }
  return true;
}

int BettiVector::euler() const {
  int e = 0;
  for (std::size_t k = 0; k < values.size(); ++k) e += (k % 2 == 0 ? 1 : -1) * values[k];
  return e;
}

bool BettiVector::operator==(const BettiVector& other) const {
  const std::size_t n = std::max(values.size(), other.values.size());
  for (std::size_t k = 0; k < n; ++k)
    if ((*this)[k] != other[k]) return false;
  return true;
}

std::string BettiVector::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < values.size(); ++k) os << (k ? ", " : "") << values[k];
  os << ')';
  return os.str();
}

int RelativeHomology::cell_euler() const {
  int e = 0;
  for (std::size_t k = 0; k < relative_cells.size(); ++k) e += (k % 2 == 0 ? 1 : -1) * static_cast<int>(relative_cells[k]);
  return e;
}

RelativeHomology relative_betti(const CubicalPair& pair, std::size_t cell_budget, bool generic_reduction) {
  require(pair.grid != nullptr, "pair has no grid");
  require(pair.a < pair.b, "pair thresholds must satisfy a < b");
  const CubicalGrid& grid = *pair.grid;
  const int d = grid.dim();
  require(d >= 1 && d <= 3, "grid dimension must be 1, 2 or 3");
  if (grid.vertex_count() * (std::size_t{1} << d) > cell_budget) {
    fail(ErrorCode::OutOfMemory, "grid needs " + std::to_string(grid.vertex_count() << d) +
                                     " cell slots, budget is " + std::to_string(cell_budget));
  }
  check_values(grid, pair.a, pair.b);

  const Cells cells(grid);
  const CellSet rel = collect(cells, pair.a, pair.b, 1);

  std::vector<std::size_t> rank(static_cast<std::size_t>(d + 2), 0);  // rank[k] = rank of boundary k -> k-1
  for (int k = 1; k <= d; ++k) {
    std::size_t r;
    if (generic_reduction) {
      r = boundary_rank_reduction(cells, rel, k);
    } else if (k == 1) {
      r = edge_rank_union_find(cells, rel);
    } else if (k == d) {
      r = top_rank_union_find(cells, rel);
    } else {
      r = boundary_rank_reduction(cells, rel, k);
    }
    rank[static_cast<std::size_t>(k)] = r;
  }

  RelativeHomology out;
  for (int k = 0; k <= d; ++k) {
    const std::size_t n = rel.count(k);
    out.relative_cells.push_back(n);
    out.betti.values.push_back(static_cast<int>(n - rank[static_cast<std::size_t>(k)] - rank[static_cast<std::size_t>(k + 1)]));
  }
  return out;
}

RelativeHomology sublevel_pair_homology(const std::function<double(const Vec&)>& fn, const Box& box,
                                        double a, double b, const GridParams& params) {
  Box shifted = box;
  for (int attempt = 0;; ++attempt) {
    const CubicalGrid grid = CubicalGrid::sample(fn, shifted, params.h, params.jobs, true);
    try {
      return relative_betti(CubicalPair{&grid, a, b}, params.cell_budget);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ThresholdOnGrid || attempt >= params.shift_retries) throw;
    }
    // Irrational per-axis fractions keep quadratic thresholds off the shifted lattice.
    for (int k = 0; k < box.dim(); ++k) {
      const double frac = std::fmod((attempt + 1) * std::sqrt(2.0 + k), 1.0);
      shifted.lo[k] = box.lo[k] + frac * params.h;
      shifted.hi[k] = box.hi[k] + frac * params.h;
    }
  }
}

BettiVector critical_groups_local(const FunctionalFamily& family, double lambda, const Vec& x0,
                                  double radius, double eps, double h, int jobs) {
  require(radius > 0.0 && eps > 0.0 && h > 0.0, "radius, eps and h must be positive");
  require(x0.size() == family.dim, "centre has the wrong dimension");
  const double c = family.eval(lambda, x0);

  bifurcate::NewtonOptions nopts;
  nopts.box_slack = 1.0;
  auto seeds = bifurcate::ball_seeds(x0, 2.0 * radius, 96, 0x5eed);
  for (const auto& s : bifurcate::ball_seeds(x0, radius, 64, 0xba11)) seeds.push_back(s);
  const auto found = bifurcate::critical_points_slice(family, lambda, seeds, nopts);
  const double same = std::max(1e-4, 0.5 * h);
  bool centre_is_critical = family.grad(lambda, x0).norm() <= 1e-6;
  for (const auto& cp : found.points) {
    const double dist = (cp.x - x0).norm();
    if (dist <= same) {
      centre_is_critical = true;
      continue;
    }
    if (dist <= radius) fail(ErrorCode::NotIsolated, "another critical point lies in the ball");
    if (dist <= 2.0 * radius && std::abs(cp.value - c) <= eps) {
      fail(ErrorCode::EpsilonTooLarge, "a nearby critical value lies in [c - eps, c + eps]");
    }
  }
  require(centre_is_critical, "centre is not a critical point");

  Box box{x0.array() - radius - 2.0 * h, x0.array() + radius + 2.0 * h};
  auto fn = [&](const Vec& x) { return (x - x0).norm() <= radius ? family.eval(lambda, x) : kInf; };
  GridParams params;
  params.h = h;
  params.jobs = jobs;
  params.cell_budget = cell_budget_from_env();
  return sublevel_pair_homology(fn, box, c - eps, c + eps, params).betti;
}

std::string to_string(PairVerdict v) {
  switch (v) {
    case PairVerdict::Inequivalent: return "Inequivalent";
    case PairVerdict::Indistinguishable: return "Indistinguishable";
    case PairVerdict::Error: return "Error";
  }
  return "Error";
}

PairCertificate pair_inequivalence_certificate(const FunctionalFamily& family, double lambda1,
                                               double lambda2, double eps, const GridParams& params) {
  PairCertificate cert;
  try {
    require(eps > 0.0, "eps must be positive");
    deform::SampleSpec spec;
    spec.lambda_samples = 1;
    spec.h = std::max(params.h, 0.02);
    spec.jobs = params.jobs;
    for (double lambda : {lambda1, lambda2}) {
      for (double level : {-eps, eps}) deform::gradient_floor(family, lambda, lambda, level, 0.5 * eps, spec);
    }
    auto slice = [&](double lambda) {
      return sublevel_pair_homology([&](const Vec& x) { return family.eval(lambda, x); }, family.domain, -eps, eps,
                                    params)
          .betti;
    };
    cert.betti_first = slice(lambda1);
    cert.betti_second = lambda1 == lambda2 ? cert.betti_first : slice(lambda2);
    cert.verdict = cert.betti_first == cert.betti_second ? PairVerdict::Indistinguishable : PairVerdict::Inequivalent;
    cert.detail = cert.verdict == PairVerdict::Inequivalent
                      ? "relative Betti vectors differ"
                      : "relative Betti vectors agree; equivalence is not certified";
  } catch (const Error& e) {
    cert.verdict = PairVerdict::Error;
    cert.detail = e.what();
    cert.error = e.code();
  }
  return cert;
}

std::string render_pair_svg(const CubicalGrid& grid, double a, double b, int max_pixels) {
  require(grid.dim() == 2, "SVG rendering needs a 2D grid");
  const int nx = grid.counts[0], ny = grid.counts[1];
  const int step = std::max(1, (std::max(nx, ny) + max_pixels - 1) / max_pixels);
  const int w = (nx + step - 1) / step, hgt = (ny + step - 1) / step;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w << "\" height=\"" << 2 * hgt
     << "\" viewBox=\"0 0 " << w << ' ' << hgt << "\" shape-rendering=\"crispEdges\">\n"
     << "<defs><pattern id=\"hatch\" width=\"2\" height=\"2\" patternUnits=\"userSpaceOnUse\" "
        "patternTransform=\"rotate(45)\"><rect width=\"1\" height=\"2\" fill=\"#4a7fb5\"/></pattern></defs>\n"
     << "<rect width=\"" << w << "\" height=\"" << hgt << "\" fill=\"white\"/>\n";
  for (int j = 0; j < hgt; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t v = static_cast<std::size_t>(i * step) + static_cast<std::size_t>(j * step) * static_cast<std::size_t>(nx);
      const double val = grid.values[v];
      const char* fill = val <= a ? "#333333" : (val <= b ? "url(#hatch)" : nullptr);
      if (fill) os << "<rect x=\"" << i << "\" y=\"" << (hgt - 1 - j) << "\" width=\"1\" height=\"1\" fill=\"" << fill << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace critflow::topology
