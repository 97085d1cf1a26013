#include "dns/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dns {

void require_same_spec(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

ScalarField::ScalarField(GridSpec spec) : spec_(spec), samples_(spec.node_count(), 0.0) {
  spec_.validate();
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> samples)
    : spec_(spec), samples_(std::move(samples)) {
  spec_.validate();
  if (samples_.size() != spec_.node_count())
    throw std::invalid_argument("scalar samples do not match grid shape");
}

ScalarField ScalarField::from_function(const GridSpec& spec,
                                       const std::function<double(double, double)>& f) {
  ScalarField out(spec);
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) out(i, j) = f(spec.coord(0, i), spec.coord(1, j));
  return out;
}

double ScalarField::mean() const {
  if (samples_.empty()) return 0.0;
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
         static_cast<double>(samples_.size());
}

void ScalarField::remove_mean() {
  const double m = mean();
  for (double& s : samples_) s -= m;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double s : samples_) m = std::max(m, std::abs(s));
  return m;
}

bool ScalarField::finite() const {
  return std::all_of(samples_.begin(), samples_.end(), [](double s) { return std::isfinite(s); });
}

void ScalarField::validate() const {
  if (samples_.size() != spec_.node_count())
    throw std::invalid_argument("scalar samples do not match grid shape");
  if (!finite()) throw std::invalid_argument("scalar field has non-finite samples");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_spec(spec_, other.spec_);
  for (std::size_t k = 0; k < samples_.size(); ++k) samples_[k] += other.samples_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_spec(spec_, other.spec_);
  for (std::size_t k = 0; k < samples_.size(); ++k) samples_[k] -= other.samples_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : samples_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

VelocityField::VelocityField(GridSpec spec) : spec_(spec) {
  spec_.validate();
  comp_[0].assign(spec_.node_count(), 0.0);
  comp_[1].assign(spec_.node_count(), 0.0);
}

VelocityField::VelocityField(GridSpec spec, std::vector<double> vx, std::vector<double> vy)
    : spec_(spec), comp_{std::move(vx), std::move(vy)} {
  spec_.validate();
  if (comp_[0].size() != spec_.node_count() || comp_[1].size() != spec_.node_count())
    throw std::invalid_argument("velocity samples do not match grid shape");
}

VelocityField VelocityField::from_function(const GridSpec& spec,
                                           const std::function<Vec2(double, double)>& f) {
  VelocityField out(spec);
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) out.set(i, j, f(spec.coord(0, i), spec.coord(1, j)));
  return out;
}

VelocityField VelocityField::constant(const GridSpec& spec, Vec2 value) {
  VelocityField out(spec);
  std::fill(out.comp_[0].begin(), out.comp_[0].end(), value[0]);
  std::fill(out.comp_[1].begin(), out.comp_[1].end(), value[1]);
  return out;
}

bool VelocityField::finite() const {
  for (const auto& c : comp_)
    if (!std::all_of(c.begin(), c.end(), [](double s) { return std::isfinite(s); })) return false;
  return true;
}

bool VelocityField::satisfies_boundary_condition() const {
  if (spec_.periodic()) return true;
  for (int j = 0; j < spec_.nodes(1); ++j)
    for (int i = 0; i < spec_.nodes(0); ++i)
      if (spec_.on_boundary(i, j)) {
        const auto k = spec_.index(i, j);
        if (comp_[0][k] != 0.0 || comp_[1][k] != 0.0) return false;
      }
  return true;
}

void VelocityField::zero_boundary() {
  if (spec_.periodic()) return;
  for (int j = 0; j < spec_.nodes(1); ++j)
    for (int i = 0; i < spec_.nodes(0); ++i)
      if (spec_.on_boundary(i, j)) set(i, j, {0.0, 0.0});
}

void VelocityField::validate() const {
  if (comp_[0].size() != spec_.node_count() || comp_[1].size() != spec_.node_count())
    throw std::invalid_argument("velocity samples do not match grid shape");
  if (!finite()) throw std::invalid_argument("velocity field has non-finite samples");
}

double VelocityField::max_abs() const {
  double m = 0.0;
  for (const auto& c : comp_)
    for (double s : c) m = std::max(m, std::abs(s));
  return m;
}

VelocityField& VelocityField::operator+=(const VelocityField& other) { return axpy(1.0, other); }
VelocityField& VelocityField::operator-=(const VelocityField& other) { return axpy(-1.0, other); }

VelocityField& VelocityField::operator*=(double s) {
  for (auto& c : comp_)
    for (double& v : c) v *= s;
  return *this;
}

VelocityField& VelocityField::axpy(double s, const VelocityField& other) {
  require_same_spec(spec_, other.spec_);
  for (int c = 0; c < 2; ++c)
    for (std::size_t k = 0; k < comp_[c].size(); ++k) comp_[c][k] += s * other.comp_[c][k];
  return *this;
}

VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
VelocityField operator*(double s, VelocityField a) { return a *= s; }
VelocityField operator-(VelocityField a) { return a *= -1.0; }

}  // namespace dns
