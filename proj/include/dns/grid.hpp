#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>

namespace dns {

enum class Boundary { Periodic, DirichletZero };

std::string_view to_string(Boundary bc);
Boundary parse_boundary(std::string_view text);

using Vec2 = std::array<double, 2>;

/// Uniform two-dimensional grid with square cells.
///
/// Periodic grids store `cells` nodes per axis at x_i = i * dx (the node at the
/// far end is identified with node 0). Dirichlet grids store `cells + 1` nodes per
/// axis including both walls. Samples are laid out x-fastest: index = j * nx + i.
struct GridSpec {
  std::array<int, 2> cells{64, 64};
  std::array<double, 2> extent{2.0 * std::numbers::pi, 2.0 * std::numbers::pi};
  Boundary bc = Boundary::Periodic;

  static GridSpec square(int cells, Boundary bc, double extent = 2.0 * std::numbers::pi);

  /// Throws std::invalid_argument when the grid is unusable.
  void validate() const;

  double spacing() const { return extent[0] / cells[0]; }
  int nodes(int axis) const { return bc == Boundary::Periodic ? cells[axis] : cells[axis] + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nodes(0)) * static_cast<std::size_t>(nodes(1));
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes(0)) +
           static_cast<std::size_t>(i);
  }
  double coord(int /*axis*/, int i) const { return i * spacing(); }
  Vec2 position(int i, int j) const { return {coord(0, i), coord(1, j)}; }

  bool periodic() const { return bc == Boundary::Periodic; }
  bool on_boundary(int i, int j) const {
    return !periodic() && (i == 0 || j == 0 || i == nodes(0) - 1 || j == nodes(1) - 1);
  }

  /// Quadrature weight of a node: rectangle rule on the torus, trapezoidal on the box.
  double quadrature_weight(int i, int j) const;
  double volume() const { return extent[0] * extent[1]; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace dns
