#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "critflow/functional.hpp"

namespace critflow::plane {

using Point = std::array<double, 2>;

/// A rectangle cut into nx x ny cells with an occupancy mask. Cell (i, j)
/// has column i from the left and row j from the bottom. Sides: A0 left,
/// A1 right, B0 bottom, B1 top.
struct RectGrid {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  int nx = 0, ny = 0;
  std::vector<char> occupied;  // index j * nx + i

  static RectGrid empty(int nx, int ny, double x0 = -1.0, double x1 = 1.0, double y0 = -1.0, double y1 = 1.0);

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i); }
  bool at(int i, int j) const { return occupied[index(i, j)] != 0; }
  void set(int i, int j, bool v = true) { occupied[index(i, j)] = v ? 1 : 0; }
  double cell_width() const { return (x1 - x0) / nx; }
  double cell_height() const { return (y1 - y0) / ny; }
  Point centre(int i, int j) const;
  /// Cell containing p, clamped to the grid.
  std::array<int, 2> cell_of(const Point& p) const;
  /// Marks every cell meeting the segment p-q (sampled at quarter-cell spacing).
  void occupy_segment(const Point& p, const Point& q);
};

struct PlanarCurve {
  std::vector<Point> points;
};

/// Either an 8-connected occupied component meeting B0 and B1, or a curve
/// through 4-connected free cells joining A0 to A1.
struct Separation {
  enum class Kind { Component, Curve } kind = Kind::Curve;
  std::vector<std::size_t> component;  // cell indices, ascending
  PlanarCurve curve;
  std::vector<std::size_t> curve_cells;
};

std::string to_string(Separation::Kind k);

/// Exactly one alternative holds on every grid (occupied 8-connected versus
/// free 4-connected). A returned curve runs through free cell centres, with
/// horizontal end segments to the A-sides; it never touches the B-sides.
Separation component_or_curve(const RectGrid& grid);

/// Occupied, 8-connected, meets row 0 and row ny - 1.
bool verify_component(const RectGrid& grid, const std::vector<std::size_t>& cells);
/// Every point lies in a free cell, consecutive points are at most one cell
/// diagonal apart, endpoints lie on A0 and A1 and no point touches a B-side.
bool verify_curve(const RectGrid& grid, const PlanarCurve& curve);

/// Rows of 0/1 characters, the first row being the top of the rectangle.
RectGrid mask_from_text(const std::string& text);
/// {"nx":..,"ny":..,"cells":[[i,j],...]} with optional "rect":[x0,x1,y0,y1].
RectGrid mask_from_json(const std::string& text);
/// Dispatches on content: JSON when the first non-space character is '{'.
RectGrid load_mask(const std::string& path);

std::string render_svg(const RectGrid& grid, const Separation& sep, int pixels_per_cell = 8);

struct ReparamOptions {
  int grid = 200;              // continuation step is 1 / (4 grid)
  std::uint64_t seed = 1;
  int max_redither = 5;
  int samples = 401;           // output samples of t in [-1, 1]
};

struct Reparametrization {
  ScalarProfile a_tilde;
  ScalarProfile b_tilde;
  std::vector<double> t, c, d;  // c(t), d(t) on a uniform t grid
  std::vector<Point> path;      // tracked zero set of a~(x) - b~(y)
  double residual = 0.0;        // max |a~(c(t)) - b~(d(t))| over the path
  double perturbation_a = 0.0;  // sampled sup |a~ - a|
  double perturbation_b = 0.0;
  int redithers = 0;
};

/// Perturbs a and b by less than eps into a~, b~ with positive endpoint
/// slopes, values in (-1, 1) inside the interval and dithered critical
/// values, then tracks the curve a~(x) = b~(y) from (-1, -1) to (1, 1) by
/// predictor-corrector continuation and reparametrizes it by arclength.
/// TrackingStalled after max_redither fresh dithers fail.
Reparametrization common_value_reparametrization(const ScalarProfile& a, const ScalarProfile& b, double eps,
                                                 const ReparamOptions& opts = {});

}  // namespace critflow::plane
