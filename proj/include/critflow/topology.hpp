#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "critflow/error.hpp"
#include "critflow/functional.hpp"

namespace critflow::topology {

inline constexpr std::size_t kDefaultCellBudget = 60'000'000;

/// Cell budget from CRITFLOW_CELL_BUDGET, or kDefaultCellBudget.
std::size_t cell_budget_from_env();

/// Function values on the vertices of a uniform cubical grid in R^2 or R^3.
/// Vertex (i0, i1, i2) sits at lo + h * (i0, i1, i2); linear index
/// i0 + n0 * (i1 + n1 * i2). A value of +inf excludes the vertex (and every
/// cell containing it) from all sublevel complexes.
struct CubicalGrid {
  Vec lo;
  double h = 0.0;
  std::vector<int> counts;
  std::vector<double> values;

  int dim() const { return static_cast<int>(counts.size()); }
  std::size_t vertex_count() const;
  std::size_t stride(int axis) const;
  Vec vertex_position(std::size_t v) const;
  std::size_t cell_count() const;  // cells of every dimension

  /// Samples fn on box with mesh h (dimension 2, or 3 when allow_3d).
  static CubicalGrid sample(const std::function<double(const Vec&)>& fn, const Box& box, double h,
                            int jobs = 1, bool allow_3d = false);
};

/// Cell id = vertex * 2^dim + mask; bit k of mask means the cell extends along axis k.
using CellId = std::uint64_t;

struct CellSet {
  std::vector<std::vector<CellId>> by_dim;  // ascending ids per dimension

  std::size_t count(int k) const { return k < static_cast<int>(by_dim.size()) ? by_dim[static_cast<std::size_t>(k)].size() : 0; }
  std::size_t size() const;
  bool contains(int k, CellId id) const;
};

/// All cells whose vertices all have value <= c; closed under faces.
CellSet sublevel_complex(const CubicalGrid& grid, double c);

/// True when every face of every cell of `cells` is also in `cells`.
bool is_face_closed(const CubicalGrid& grid, const CellSet& cells);

struct BettiVector {
  std::vector<int> values;  // beta_0 .. beta_dim

  int operator[](std::size_t k) const { return k < values.size() ? values[k] : 0; }
  int euler() const;
  bool operator==(const BettiVector& other) const;
  std::string str() const;
};

/// The sublevel pair (f^b, f^a) on a grid.
struct CubicalPair {
  const CubicalGrid* grid = nullptr;
  double a = -std::numeric_limits<double>::infinity();
  double b = 0.0;
};

struct RelativeHomology {
  BettiVector betti;
  std::vector<std::size_t> relative_cells;  // cells of f^b not in f^a, per dimension
  int cell_euler() const;
};

/// Betti numbers of H_*(f^b, f^a; GF(2)) from the ranks of the relative
/// boundary maps. The boundaries of edges and of top cells are ranked with
/// union-find; other dimensions (or all, with generic_reduction) by column
/// reduction. Throws OutOfMemory when the grid exceeds cell_budget and
/// ThresholdOnGrid when a vertex value sits on a threshold.
RelativeHomology relative_betti(const CubicalPair& pair, std::size_t cell_budget = kDefaultCellBudget,
                                bool generic_reduction = false);

/// Rank over GF(2) of a sparse matrix given as columns of ascending row indices.
std::size_t gf2_rank(std::vector<std::vector<std::uint32_t>> columns);

struct GridParams {
  double h = 0.01;
  int jobs = 1;
  std::size_t cell_budget = kDefaultCellBudget;
  int shift_retries = 3;  // grid shifted by irrational fractions of h when a threshold hits a vertex value
};

/// Samples fn on box and returns relative_betti for (fn <= b, fn <= a), with
/// the grid-shift retry on knife-edge thresholds.
RelativeHomology sublevel_pair_homology(const std::function<double(const Vec&)>& fn, const Box& box,
                                        double a, double b, const GridParams& params);

/// Relative homology of (f_lambda^{c+eps}, f_lambda^{c-eps}) inside the ball
/// B(x0, radius), c = f_lambda(x0): the critical groups of an isolated
/// critical point. NotIsolated if the multistart search finds another critical
/// point in the ball; EpsilonTooLarge if one within 2 * radius has its value
/// inside [c - eps, c + eps].
BettiVector critical_groups_local(const FunctionalFamily& family, double lambda, const Vec& x0,
                                  double radius, double eps, double h, int jobs = 1);

enum class PairVerdict { Inequivalent, Indistinguishable, Error };

std::string to_string(PairVerdict v);

struct PairCertificate {
  PairVerdict verdict = PairVerdict::Error;
  BettiVector betti_first;
  BettiVector betti_second;
  std::string detail;
  std::optional<ErrorCode> error;  // set when the verdict is Error
};

/// Compares H_*(f^eps, f^-eps) of two slices. Differing Betti vectors prove
/// the pairs are not homotopy equivalent; equal vectors prove nothing.
PairCertificate pair_inequivalence_certificate(const FunctionalFamily& family, double lambda1,
                                               double lambda2, double eps, const GridParams& params);

/// SVG of a 2D sublevel pair: f^a dark, f^b \ f^a hatched.
std::string render_pair_svg(const CubicalGrid& grid, double a, double b, int max_pixels = 300);

}  // namespace critflow::topology
