#include "dns/interpolation.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dns {
namespace {

struct Stencil {
  int base = 0;             // first node index of the stencil
  std::array<double, 4> w;  // weights for base, base+1, ...
  int width = 2;
};

Stencil make_stencil(double g, InterpOrder order) {
  // Snap queries that sit on a node up to rounding so nodes are reproduced exactly.
  const double nearest = std::round(g);
  if (std::abs(g - nearest) < 1e-12) g = nearest;
  const double cell = std::floor(g);
  const double s = g - cell;
  Stencil st;
  if (order == InterpOrder::Linear) {
    st.base = static_cast<int>(cell);
    st.w = {1.0 - s, s, 0.0, 0.0};
    st.width = 2;
  } else {
    st.base = static_cast<int>(cell) - 1;
    st.w = {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
    st.width = 4;
  }
  return st;
}

int wrap(int k, int n) {
  const int r = k % n;
  return r < 0 ? r + n : r;
}

}  // namespace

std::string_view to_string(InterpOrder order) {
  return order == InterpOrder::Linear ? "linear" : "cubic";
}

InterpOrder parse_interp_order(std::string_view text) {
  if (text == "linear") return InterpOrder::Linear;
  if (text == "cubic") return InterpOrder::Cubic;
  throw std::invalid_argument("unknown interpolation order: " + std::string(text));
}

double sample_offgrid(const GridSpec& spec, const std::vector<double>& samples, Vec2 point,
                      InterpOrder order) {
  const double dx = spec.spacing();
  const int nx = spec.nodes(0);
  const int ny = spec.nodes(1);
  if (!spec.periodic()) {
    for (int axis = 0; axis < 2; ++axis)
      if (point[axis] < 0.0 || point[axis] > spec.extent[axis]) return 0.0;
  }
  const Stencil sx = make_stencil(point[0] / dx, order);
  const Stencil sy = make_stencil(point[1] / dx, order);
  double sum = 0.0;
  for (int b = 0; b < sy.width; ++b) {
    if (sy.w[b] == 0.0) continue;
    int j = sy.base + b;
    if (spec.periodic()) {
      j = wrap(j, ny);
    } else if (j < 0 || j >= ny) {
      continue;
    }
    double row = 0.0;
    for (int a = 0; a < sx.width; ++a) {
      if (sx.w[a] == 0.0) continue;
      int i = sx.base + a;
      if (spec.periodic()) {
        i = wrap(i, nx);
      } else if (i < 0 || i >= nx) {
        continue;
      }
      row += sx.w[a] * samples[spec.index(i, j)];
    }
    sum += sy.w[b] * row;
  }
  return sum;
}

Vec2 sample_offgrid(const VelocityField& v, Vec2 point, InterpOrder order) {
  return {sample_offgrid(v.spec(), v.component(0), point, order),
          sample_offgrid(v.spec(), v.component(1), point, order)};
}

std::vector<Vec2> sample_offgrid(const VelocityField& v, std::span<const Vec2> points,
                                 InterpOrder order) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(sample_offgrid(v, p, order));
  return out;
}

}  // namespace dns
