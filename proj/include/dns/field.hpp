#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "dns/grid.hpp"

namespace dns {

/// Scalar samples on every node of a grid (pressure, potentials, divergence).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec spec);
  ScalarField(GridSpec spec, std::vector<double> samples);

  static ScalarField from_function(const GridSpec& spec,
                                   const std::function<double(double, double)>& f);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return samples_.size(); }

  double& operator()(int i, int j) { return samples_[spec_.index(i, j)]; }
  double operator()(int i, int j) const { return samples_[spec_.index(i, j)]; }

  std::vector<double>& samples() { return samples_; }
  const std::vector<double>& samples() const { return samples_; }

  /// Arithmetic mean over nodes.
  double mean() const;
  /// Shifts the field to zero nodal mean (the pressure gauge).
  void remove_mean();
  double max_abs() const;
  bool finite() const;
  /// Throws std::invalid_argument on shape mismatch or non-finite samples.
  void validate() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

 private:
  GridSpec spec_{};
  std::vector<double> samples_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Two-component velocity samples on every node of a grid.
///
/// On a Dirichlet grid a field that belongs to the velocity space has exactly zero
/// boundary samples; operators such as `gradient` return fields that do not, so the
/// boundary condition is checked with `satisfies_boundary_condition` rather than
/// enforced on construction.
class VelocityField {
 public:
  VelocityField() = default;
  explicit VelocityField(GridSpec spec);
  VelocityField(GridSpec spec, std::vector<double> vx, std::vector<double> vy);

  static VelocityField from_function(const GridSpec& spec,
                                     const std::function<Vec2(double, double)>& f);
  static VelocityField constant(const GridSpec& spec, Vec2 value);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return comp_[0].size(); }

  std::vector<double>& component(int c) { return comp_[c]; }
  const std::vector<double>& component(int c) const { return comp_[c]; }

  Vec2 at(int i, int j) const {
    const auto k = spec_.index(i, j);
    return {comp_[0][k], comp_[1][k]};
  }
  void set(int i, int j, Vec2 value) {
    const auto k = spec_.index(i, j);
    comp_[0][k] = value[0];
    comp_[1][k] = value[1];
  }

  bool finite() const;
  bool satisfies_boundary_condition() const;
  /// Sets every Dirichlet boundary sample to zero; no-op on periodic grids.
  void zero_boundary();
  /// Throws std::invalid_argument on shape mismatch or non-finite samples.
  void validate() const;
  double max_abs() const;

  VelocityField& operator+=(const VelocityField& other);
  VelocityField& operator-=(const VelocityField& other);
  VelocityField& operator*=(double s);
  /// this += s * other
  VelocityField& axpy(double s, const VelocityField& other);

 private:
  GridSpec spec_{};
  std::array<std::vector<double>, 2> comp_;
};

VelocityField operator+(VelocityField a, const VelocityField& b);
VelocityField operator-(VelocityField a, const VelocityField& b);
VelocityField operator*(double s, VelocityField a);
VelocityField operator-(VelocityField a);

void require_same_spec(const GridSpec& a, const GridSpec& b);

}  // namespace dns
