#include "dns/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dns {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error("truncated snapshot " + path.string());
  return tok;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: " + std::string(text));
  return value;
}

void write_vtk(const std::filesystem::path& path, const VelocityField& v,
               const ScalarField* pressure) {
  const auto& spec = v.spec();
  auto out = open_for_write(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "dns_flow bc=" << to_string(spec.bc) << " cells=" << spec.cells[0] << ',' << spec.cells[1]
      << " extent=" << format_double(spec.extent[0]) << ',' << format_double(spec.extent[1])
      << '\n';
  out << "ASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << spec.nodes(0) << ' ' << spec.nodes(1) << " 1\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << format_double(spec.spacing()) << ' ' << format_double(spec.spacing())
      << " 1\n";
  out << "POINT_DATA " << spec.node_count() << '\n';
  out << "VECTORS velocity float\n";
  for (std::size_t k = 0; k < v.size(); ++k)
    out << format_double(v.component(0)[k]) << ' ' << format_double(v.component(1)[k]) << " 0\n";
  if (pressure != nullptr) {
    require_same_spec(spec, pressure->spec());
    out << "SCALARS pressure float 1\nLOOKUP_TABLE default\n";
    for (double p : pressure->samples()) out << format_double(p) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Snapshot read_vtk(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw std::runtime_error("not a VTK file: " + path.string());
  std::string title;
  std::getline(in, title);

  GridSpec spec;
  bool have_title = false;
  {
    std::istringstream ts(title);
    std::string word;
    ts >> word;
    if (word == "dns_flow") {
      std::string bc, cells, extent;
      while (ts >> word) {
        if (word.rfind("bc=", 0) == 0) bc = word.substr(3);
        if (word.rfind("cells=", 0) == 0) cells = word.substr(6);
        if (word.rfind("extent=", 0) == 0) extent = word.substr(7);
      }
      const auto split = [](const std::string& s) {
        const auto comma = s.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed VTK title");
        return std::pair{s.substr(0, comma), s.substr(comma + 1)};
      };
      const auto [c0, c1] = split(cells);
      const auto [e0, e1] = split(extent);
      spec.bc = parse_boundary(bc);
      spec.cells = {std::stoi(c0), std::stoi(c1)};
      spec.extent = {parse_double(e0), parse_double(e1)};
      have_title = true;
    }
  }

  std::string tok;
  int nx = 0, ny = 0;
  double spacing = 0.0;
  std::size_t count = 0;
  while (in >> tok) {
    if (tok == "DIMENSIONS") {
      nx = std::stoi(next_token(in, path));
      ny = std::stoi(next_token(in, path));
      next_token(in, path);
    } else if (tok == "SPACING") {
      spacing = parse_double(next_token(in, path));
      next_token(in, path);
      next_token(in, path);
    } else if (tok == "POINT_DATA") {
      count = std::stoul(next_token(in, path));
      break;
    }
  }
  if (!have_title) {
    spec.bc = Boundary::Periodic;
    spec.cells = {nx, ny};
    spec.extent = {nx * spacing, ny * spacing};
  }
  spec.validate();
  if (spec.nodes(0) != nx || spec.nodes(1) != ny || spec.node_count() != count)
    throw std::runtime_error("VTK dimensions disagree with the recorded grid");

  Snapshot snap{VelocityField(spec), std::nullopt};
  while (in >> tok) {
    if (tok == "VECTORS") {
      next_token(in, path);
      next_token(in, path);
      for (std::size_t k = 0; k < count; ++k) {
        snap.velocity.component(0)[k] = parse_double(next_token(in, path));
        snap.velocity.component(1)[k] = parse_double(next_token(in, path));
        next_token(in, path);
      }
    } else if (tok == "SCALARS") {
      next_token(in, path);
      next_token(in, path);
      next_token(in, path);
      if (next_token(in, path) != "LOOKUP_TABLE") throw std::runtime_error("expected LOOKUP_TABLE");
      next_token(in, path);
      ScalarField p(spec);
      for (std::size_t k = 0; k < count; ++k) p.samples()[k] = parse_double(next_token(in, path));
      snap.pressure = std::move(p);
    }
  }
  return snap;
}

void write_csv(const std::filesystem::path& path, const VelocityField& v,
               const ScalarField* pressure) {
  const auto& spec = v.spec();
  if (pressure != nullptr) require_same_spec(spec, pressure->spec());
  auto out = open_for_write(path);
  for (int j = 0; j < spec.nodes(1); ++j)
    for (int i = 0; i < spec.nodes(0); ++i) {
      const auto k = spec.index(i, j);
      out << format_double(spec.coord(0, i)) << ',' << format_double(spec.coord(1, j)) << ','
          << format_double(v.component(0)[k]) << ',' << format_double(v.component(1)[k]) << ','
          << format_double(pressure != nullptr ? pressure->samples()[k] : 0.0) << '\n';
    }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Snapshot read_csv(const std::filesystem::path& path, const GridSpec& spec) {
  auto in = open_for_read(path);
  Snapshot snap{VelocityField(spec), ScalarField(spec)};
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= spec.node_count()) throw std::runtime_error("CSV has more rows than grid nodes");
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 5) throw std::runtime_error("CSV row needs 5 columns");
    snap.velocity.component(0)[k] = parse_double(cols[2]);
    snap.velocity.component(1)[k] = parse_double(cols[3]);
    snap.pressure->samples()[k] = parse_double(cols[4]);
    ++k;
  }
  if (k != spec.node_count()) throw std::runtime_error("CSV has fewer rows than grid nodes");
  return snap;
}

}  // namespace dns
