#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dns/field.hpp"

namespace dns {

struct Snapshot {
  VelocityField velocity;
  std::optional<ScalarField> pressure;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Legacy VTK ASCII, DATASET STRUCTURED_POINTS. The title line records the boundary
/// condition and extent so the grid can be rebuilt exactly on read.
void write_vtk(const std::filesystem::path& path, const VelocityField& v,
               const ScalarField* pressure = nullptr);
Snapshot read_vtk(const std::filesystem::path& path);

/// Headerless `x,y,vx,vy,p` rows, x fastest. Pressure column is 0 when absent.
void write_csv(const std::filesystem::path& path, const VelocityField& v,
               const ScalarField* pressure = nullptr);
Snapshot read_csv(const std::filesystem::path& path, const GridSpec& spec);

}  // namespace dns
