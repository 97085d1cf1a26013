#include "dns/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace dns {

std::string_view to_string(Boundary bc) {
  return bc == Boundary::Periodic ? "periodic" : "dirichlet";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "periodic") return Boundary::Periodic;
  if (text == "dirichlet" || text == "dirichlet_zero") return Boundary::DirichletZero;
  throw std::invalid_argument("unknown boundary condition: " + std::string(text));
}

GridSpec GridSpec::square(int cells, Boundary bc, double extent) {
  GridSpec spec;
  spec.cells = {cells, cells};
  spec.extent = {extent, extent};
  spec.bc = bc;
  spec.validate();
  return spec;
}

void GridSpec::validate() const {
  for (int axis = 0; axis < 2; ++axis) {
    if (cells[axis] < 8) throw std::invalid_argument("grid needs at least 8 cells per axis");
    if (!(extent[axis] > 0.0) || !std::isfinite(extent[axis]))
      throw std::invalid_argument("grid extent must be positive and finite");
    if (bc == Boundary::Periodic && cells[axis] % 2 != 0)
      throw std::invalid_argument("periodic grids need an even number of cells per axis");
  }
  const double dx = extent[0] / cells[0];
  const double dy = extent[1] / cells[1];
  if (std::abs(dx - dy) > 1e-12 * dx) throw std::invalid_argument("grid cells must be square");
}

double GridSpec::quadrature_weight(int i, int j) const {
  const double cell = spacing() * spacing();
  if (periodic()) return cell;
  double w = cell;
  if (i == 0 || i == nodes(0) - 1) w *= 0.5;
  if (j == 0 || j == nodes(1) - 1) w *= 0.5;
  return w;
}

}  // namespace dns
