#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dns/field.hpp"

namespace dns {

enum class InterpOrder { Linear, Cubic };

std::string_view to_string(InterpOrder order);
InterpOrder parse_interp_order(std::string_view text);

/// Evaluates a nodal sample array at an arbitrary point.
///
/// Linear is tensor-product bilinear; Cubic is tensor-product 4-point Lagrange.
/// Periodic grids wrap coordinates; Dirichlet grids extend the field by zero
/// outside the closed box (and use zero for stencil nodes beyond the walls).
double sample_offgrid(const GridSpec& spec, const std::vector<double>& samples, Vec2 point,
                      InterpOrder order);

std::vector<Vec2> sample_offgrid(const VelocityField& v, std::span<const Vec2> points,
                                 InterpOrder order = InterpOrder::Linear);

Vec2 sample_offgrid(const VelocityField& v, Vec2 point, InterpOrder order = InterpOrder::Linear);

}  // namespace dns
