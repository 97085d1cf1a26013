#include "dns/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dns/analysis.hpp"
#include "dns/bench.hpp"
#include "dns/io.hpp"
#include "dns/operators.hpp"
#include "dns/projection.hpp"

namespace dns::cli {

namespace fs = std::filesystem;

std::string_view to_string(DatumKind kind) {
  switch (kind) {
    case DatumKind::Zero: return "zero";
    case DatumKind::TaylorGreen: return "taylor_green";
    case DatumKind::Random: return "random";
    case DatumKind::WallVortex: return "wall_vortex";
    case DatumKind::Snapshot: return "snapshot";
  }
  return "?";
}

DatumKind parse_datum_kind(std::string_view text) {
  for (auto k : {DatumKind::Zero, DatumKind::TaylorGreen, DatumKind::Random, DatumKind::WallVortex,
                 DatumKind::Snapshot})
    if (text == to_string(k)) return k;
  throw ConfigError("unknown initial datum kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

namespace {

using Values = std::vector<std::string>;

double to_double(const std::string& key, const std::string& s) {
  try {
    return parse_double(s);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + s + "'");
  }
}

template <class Int>
Int to_integer(const std::string& key, const std::string& s) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(key + ": not an integer: '" + s + "'");
  return value;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(key + ": not a boolean: '" + s + "'");
}

const std::string& single(const std::string& key, const Values& v) {
  if (v.size() != 1) throw ConfigError(key + ": expected one value");
  return v.front();
}

/// Splits CLI11's inputs further on commas so `a, b` and `a b` are both lists.
Values flatten(const Values& in) {
  Values out;
  for (const auto& item : in) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const auto b = part.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(part.substr(b, part.find_last_not_of(" \t") - b + 1));
    }
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + format_double(v[k]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + std::to_string(v[k]);
  return s;
}

std::string quote(const fs::path& p) { return '"' + p.string() + '"'; }

}  // namespace

void RunManifest::validate() const {
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cadence < 1) throw ConfigError("output.cadence must be >= 1");
  if (initial.kind == DatumKind::Snapshot && initial.snapshot.empty())
    throw ConfigError("initial.snapshot is required for kind = snapshot");
  if (initial.max_mode < 1) throw ConfigError("initial.max_mode must be >= 1");
  if (ladder_h.empty()) throw ConfigError("ladder.h is empty");
  for (double h : ladder_h)
    if (!(h > 0.0) || std::floor(config.T / h * (1.0 + 1e-12)) < 1.0)
      throw ConfigError("ladder.h entries must be positive and not exceed T");
  for (int c : ladder_cells)
    if (c < 8) throw ConfigError("ladder.cells entries must be >= 8");
}

RunManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  RunManifest m;
  bool ladder_h_set = false, ladder_cells_set = false;
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string section = item.parents.empty() ? "" : item.parents.front();
    if (item.parents.size() > 1) throw ConfigError("nested sections are not supported");
    const std::string key = section + "." + item.name;
    if (!seen.insert(key).second) throw ConfigError(key + ": duplicate key");
    const Values v = flatten(item.inputs);
    if (v.empty()) throw ConfigError(key + ": missing value");
    auto& c = m.config;

    if (key == "run.h") c.h = to_double(key, single(key, v));
    else if (key == "run.T") c.T = to_double(key, single(key, v));
    else if (key == "run.cells") {
      if (v.size() > 2) throw ConfigError(key + ": expected one or two values");
      c.grid.cells[0] = to_integer<int>(key, v[0]);
      c.grid.cells[1] = to_integer<int>(key, v.back());
    } else if (key == "run.extent") {
      if (v.size() > 2) throw ConfigError(key + ": expected one or two values");
      c.grid.extent[0] = to_double(key, v[0]);
      c.grid.extent[1] = to_double(key, v.back());
    } else if (key == "run.bc") {
      try {
        c.grid.bc = parse_boundary(single(key, v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "run.interp") {
      try {
        c.interp = parse_interp_order(single(key, v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "run.path") {
      try {
        c.path = parse_step_path(single(key, v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "run.viscosity") c.viscosity = to_double(key, single(key, v));
    else if (key == "run.minimizer_tol") c.minimizer_tol = to_double(key, single(key, v));
    else if (key == "run.minimizer_max_iters") c.minimizer_max_iters = to_integer<int>(key, single(key, v));
    else if (key == "run.cross_check") c.cross_check = to_bool(key, single(key, v));
    else if (key == "run.cross_check_tol") c.cross_check_tol = to_double(key, single(key, v));
    else if (key == "run.solver_tol") c.solver.rel_tol = to_double(key, single(key, v));
    else if (key == "run.solver_max_iters") c.solver.max_iters = to_integer<int>(key, single(key, v));
    else if (key == "initial.kind") m.initial.kind = parse_datum_kind(single(key, v));
    else if (key == "initial.amplitude") m.initial.amplitude = to_double(key, single(key, v));
    else if (key == "initial.seed") m.initial.seed = to_integer<std::uint64_t>(key, single(key, v));
    else if (key == "initial.max_mode") m.initial.max_mode = to_integer<int>(key, single(key, v));
    else if (key == "initial.smooth") m.initial.smooth = to_bool(key, single(key, v));
    else if (key == "initial.snapshot") m.initial.snapshot = single(key, item.inputs);
    else if (key == "output.dir") m.output_dir = single(key, item.inputs);
    else if (key == "output.cadence") m.cadence = to_integer<int>(key, single(key, v));
    else if (key == "ladder.h") {
      m.ladder_h.clear();
      for (const auto& s : v) m.ladder_h.push_back(to_double(key, s));
      ladder_h_set = true;
    } else if (key == "ladder.cells") {
      m.ladder_cells.clear();
      for (const auto& s : v) m.ladder_cells.push_back(to_integer<int>(key, s));
      ladder_cells_set = true;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  if (!ladder_h_set) m.ladder_h = {m.config.h, m.config.h / 2.0, m.config.h / 4.0};
  if (!ladder_cells_set) m.ladder_cells = {m.config.grid.cells[0]};
  std::sort(m.ladder_h.begin(), m.ladder_h.end(), std::greater<>());
  std::sort(m.ladder_cells.begin(), m.ladder_cells.end());
  m.validate();
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string serialize_manifest(const RunManifest& m) {
  const auto& c = m.config;
  std::ostringstream out;
  out << "[run]\n"
      << "h = " << format_double(c.h) << '\n'
      << "T = " << format_double(c.T) << '\n'
      << "cells = " << c.grid.cells[0] << ' ' << c.grid.cells[1] << '\n'
      << "extent = " << format_double(c.grid.extent[0]) << ' ' << format_double(c.grid.extent[1]) << '\n'
      << "bc = " << to_string(c.grid.bc) << '\n'
      << "interp = " << to_string(c.interp) << '\n'
      << "path = " << to_string(c.path) << '\n'
      << "viscosity = " << format_double(c.viscosity) << '\n'
      << "minimizer_tol = " << format_double(c.minimizer_tol) << '\n'
      << "minimizer_max_iters = " << c.minimizer_max_iters << '\n'
      << "cross_check = " << (c.cross_check ? "true" : "false") << '\n'
      << "cross_check_tol = " << format_double(c.cross_check_tol) << '\n'
      << "solver_tol = " << format_double(c.solver.rel_tol) << '\n'
      << "solver_max_iters = " << c.solver.max_iters << '\n'
      << "\n[initial]\n"
      << "kind = " << to_string(m.initial.kind) << '\n'
      << "amplitude = " << format_double(m.initial.amplitude) << '\n'
      << "seed = " << m.initial.seed << '\n'
      << "max_mode = " << m.initial.max_mode << '\n'
      << "smooth = " << (m.initial.smooth ? "true" : "false") << '\n';
  if (!m.initial.snapshot.empty()) out << "snapshot = " << quote(m.initial.snapshot) << '\n';
  out << "\n[output]\n"
      << "dir = " << quote(m.output_dir) << '\n'
      << "cadence = " << m.cadence << '\n'
      << "\n[ladder]\n"
      << "h = " << join(m.ladder_h) << '\n'
      << "cells = " << join(m.ladder_cells) << '\n';
  return out.str();
}

int resolve_threads(std::optional<int> flag) {
  if (flag) return std::max(1, *flag);
  if (const char* env = std::getenv("DNS_FLOW_THREADS")) {
    int value = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size() && value >= 1) return value;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

namespace {

TaylorGreenOracle oracle_for(const RunManifest& m) {
  return TaylorGreenOracle{m.initial.amplitude, m.config.viscosity};
}

VelocityField build_datum(const RunManifest& m) {
  const auto& spec = m.config.grid;
  try {
    switch (m.initial.kind) {
      case DatumKind::Zero: return VelocityField(spec);
      case DatumKind::TaylorGreen: return taylor_green_field(0.0, spec, oracle_for(m)).first;
      case DatumKind::Random:
        return m.initial.amplitude * random_solenoidal(spec, m.initial.seed, m.initial.max_mode, m.initial.smooth);
      case DatumKind::WallVortex: return wall_vortex(spec, m.initial.amplitude);
      case DatumKind::Snapshot: {
        auto snap = read_vtk(m.initial.snapshot);
        if (!(snap.velocity.spec() == spec))
          throw ConfigError("snapshot grid does not match the [run] grid");
        return std::move(snap.velocity);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("initial datum: ") + e.what());
  }
  return VelocityField(spec);
}

/// Creates the output directory and probes it for writing.
fs::path prepare_output(const RunManifest& m, const CommandOptions& o) {
  const fs::path dir = o.out.value_or(m.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto probe = dir / ".dns_flow_probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

void apply_overrides(RunManifest& m, const CommandOptions& o) {
  if (o.seed) m.initial.seed = *o.seed;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << std::setprecision(17);
  return f;
}

/// Runs one trajectory per step size, up to `threads` at a time.
std::vector<Trajectory> run_ladder(const RunManifest& m, const VelocityField& a, int threads) {
  std::vector<Trajectory> out(m.ladder_h.size());
  auto one = [&](std::size_t k) {
    DnsConfig cfg = m.config;
    cfg.h = m.ladder_h[k];
    return run(a, cfg);
  };
  const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t begin = 0; begin < out.size(); begin += width) {
    const std::size_t end = std::min(out.size(), begin + width);
    std::vector<std::future<Trajectory>> jobs;
    for (std::size_t k = begin; k < end; ++k)
      jobs.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, one, k));
    for (std::size_t k = begin; k < end; ++k) out[k] = jobs[k - begin].get();
  }
  return out;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StepFailure& e) {
    log << "solver failure at step " << e.step() << ": " << e.what() << '\n';
    return kExitSolver;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(RunManifest m, const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    apply_overrides(m, options);
    m.validate();
    const auto a = build_datum(m);
    const auto dir = prepare_output(m, options);
    const auto& cfg = m.config;

    write_vtk(dir / "snapshot_0.vtk", a);
    const int last = cfg.steps();
    const StepSink snapshots = [&](int n, double, const StepResult& r) {
      if (n % m.cadence == 0 || n == last)
        write_vtk(dir / ("snapshot_" + std::to_string(n) + ".vtk"), r.v, &r.p);
    };

    Trajectory traj;
    try {
      traj = run(a, cfg, std::span(&snapshots, 1));
    } catch (const StepFailure& e) {
      auto report = open_output(dir / "report.txt");
      report << "status=solver_failure\nfailed_step=" << e.step() << "\nmessage=" << e.what() << '\n';
      throw;
    }

    const auto ledger = build_ledger(traj);
    {
      auto f = open_output(dir / "ledger.csv");
      write_ledger_csv(f, ledger);
    }
    const auto step = check_step_inequality(ledger);
    const auto cum = check_cumulative_estimate(ledger, traj.end_time());

    double max_div = 0.0, max_el = 0.0;
    int max_iters = 0;
    for (int n = 1; n <= traj.steps(); ++n) {
      const auto& r = traj.record(n);
      max_div = std::max(max_div, r.divergence_max);
      if (r.el_scale > 0.0) max_el = std::max(max_el, r.el_residual / r.el_scale);
      max_iters = std::max(max_iters, r.report.iterations);
    }

    auto report = open_output(dir / "report.txt");
    report << "status=ok\n"
           << "datum=" << to_string(m.initial.kind) << '\n'
           << "bc=" << to_string(cfg.grid.bc) << '\n'
           << "cells=" << cfg.grid.cells[0] << ',' << cfg.grid.cells[1] << '\n'
           << "h=" << format_double(cfg.h) << '\n'
           << "T=" << format_double(cfg.T) << '\n'
           << "steps=" << traj.steps() << '\n'
           << "end_time=" << format_double(traj.end_time()) << '\n'
           << "interp=" << to_string(cfg.interp) << '\n'
           << "path=" << to_string(cfg.path) << '\n'
           << "viscosity=" << format_double(cfg.viscosity) << '\n'
           << "initial_projected=" << (traj.initial_projected ? "true" : "false") << '\n'
           << "initial_divergence=" << format_double(traj.initial_divergence) << '\n'
           << "max_divergence=" << format_double(max_div) << '\n'
           << "max_relative_el_residual=" << format_double(max_el) << '\n'
           << "max_solver_iterations=" << max_iters << '\n'
           << "step_inequality_holds=" << (step.holds ? "true" : "false") << '\n'
           << "max_fitted_c=" << format_double(step.max_fitted_c) << '\n'
           << "max_raw_c=" << format_double(step.max_raw_c) << '\n'
           << "cumulative_holds=" << (cum.holds ? "true" : "false") << '\n'
           << "cumulative_lhs=" << format_double(cum.lhs) << '\n'
           << "cumulative_bound=" << format_double(cum.bound) << '\n'
           << "cumulative_tight_constant=" << format_double(cum.tight_constant) << '\n'
           << "initial_dirichlet=" << format_double(cum.initial_dirichlet) << '\n'
           << "final_dirichlet=" << format_double(grad_norm_sq(traj.velocity(traj.steps()))) << '\n';
    if (m.initial.kind == DatumKind::TaylorGreen) {
      const auto exact = taylor_green_field(traj.end_time(), cfg.grid, oracle_for(m)).first;
      report << "final_l2_error=" << format_double(norm_l2(traj.velocity(traj.steps()) - exact)) << '\n'
             << "final_l2_error_note=strong L2 norm against the exact solution at t=N_T*h\n";
    }
    log << "run: " << traj.steps() << " steps to t=" << format_double(traj.end_time()) << ", output in "
        << dir.string() << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct Check {
  Check(std::string n, bool p = true, bool required = true)
      : name(std::move(n)), pass(p), mandatory(required) {}

  std::string name;
  bool pass;
  bool mandatory;
  std::vector<std::pair<std::string, std::string>> values;

  void add(const std::string& key, double v) { values.emplace_back(key, format_double(v)); }
  void add(const std::string& key, const std::string& v) { values.emplace_back(key, v); }
};

/// |b| <= |a| along the ladder, treating values at roundoff level as equal.
bool non_increasing(const std::vector<double>& v, double scale) {
  const double floor = 1e-13 * std::max(1.0, scale);
  for (std::size_t k = 1; k < v.size(); ++k)
    if (std::abs(v[k]) >= std::abs(v[k - 1]) && std::abs(v[k]) > floor) return false;
  return true;
}

}  // namespace

int cmd_verify(RunManifest m, const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    apply_overrides(m, options);
    m.validate();
    const auto a = build_datum(m);
    const auto dir = prepare_output(m, options);
    const auto& cfg = m.config;
    const auto kind = m.initial.kind;
    const bool smooth = kind == DatumKind::Zero || kind == DatumKind::TaylorGreen || kind == DatumKind::WallVortex;
    const bool reference = kind == DatumKind::Zero || kind == DatumKind::TaylorGreen;

    auto ladder = run_ladder(m, a, options.threads);
    if (options.corrupt_step) {
      auto& finest = ladder.back();
      const int n = *options.corrupt_step;
      if (n < 1 || n > finest.steps())
        throw ConfigError("--corrupt-step must lie in 1.." + std::to_string(finest.steps()));
      finest.velocity(n) = -finest.velocity(n);
      log << "verify: negated snapshot " << n << " of the finest rung\n";
    }

    std::vector<Check> checks;
    std::vector<EnergyLedger> ledgers;
    for (const auto& t : ladder) ledgers.push_back(build_ledger(t));

    {
      Check c{"divergence"};
      double worst = 0.0;
      for (const auto& t : ladder)
        for (int n = 1; n <= t.steps(); ++n) worst = std::max(worst, divergence(t.velocity(n)).max_abs());
      c.pass = worst < divergence_tolerance(cfg.grid);
      c.add("max_divergence", worst);
      c.add("tolerance", divergence_tolerance(cfg.grid));
      checks.push_back(c);
    }
    {
      Check c{"stationarity"};
      double worst = 0.0;
      for (const auto& t : ladder)
        for (int n = 1; n <= t.steps(); ++n)
          if (t.record(n).el_scale > 0.0) worst = std::max(worst, t.record(n).el_residual / t.record(n).el_scale);
      c.pass = worst <= 1e-8;
      c.add("max_relative_el_residual", worst);
      c.add("tolerance", 1e-8);
      checks.push_back(c);
    }
    {
      Check c{"step_inequality"};
      std::vector<double> fitted, raw;
      std::string failing;
      for (std::size_t k = 0; k < ledgers.size(); ++k) {
        const auto rep = check_step_inequality(ledgers[k]);
        c.pass = c.pass && rep.holds;
        fitted.push_back(rep.max_fitted_c);
        raw.push_back(std::abs(rep.max_raw_c));
        for (int n : rep.failing_steps) failing += (failing.empty() ? "" : ",") + std::to_string(n);
      }
      const bool stable = stable_across_ladder(fitted) && stable_across_ladder(raw);
      c.pass = c.pass && stable;
      c.add("max_fitted_c", list(fitted));
      c.add("max_raw_c_magnitude", list(raw));
      c.add("stable_across_ladder", stable ? "true" : "false");
      if (!failing.empty()) c.add("failing_steps", failing);
      checks.push_back(c);
    }
    {
      Check c{"cumulative_estimate"};
      std::vector<double> tight, lhs, bound;
      for (std::size_t k = 0; k < ledgers.size(); ++k) {
        const auto rep = check_cumulative_estimate(ledgers[k], ladder[k].end_time());
        c.pass = c.pass && rep.holds;
        tight.push_back(rep.tight_constant);
        lhs.push_back(rep.lhs);
        bound.push_back(rep.bound);
      }
      c.add("lhs", list(lhs));
      c.add("bound", list(bound));
      checks.push_back(c);
      Check s{"cumulative_constant_stability", stable_across_ladder(tight), smooth};
      s.add("tight_constant", list(tight));
      checks.push_back(s);
    }
    {
      std::vector<const Trajectory*> ptrs;
      for (const auto& t : ladder) ptrs.push_back(&t);
      const auto rep = monitor_assumption_a(ptrs);
      Check finite{"gradient_scaling_report"};
      finite.pass = rep.finite && std::isfinite(rep.alpha);
      finite.add("alpha", rep.alpha);
      finite.add("max_gradient", list(rep.max_gradient));
      checks.push_back(finite);
      Check bound{"gradient_scaling_bound", rep.within_bound, smooth};
      bound.add("alpha", rep.alpha);
      bound.add("limit", 0.6);
      checks.push_back(bound);
    }
    {
      Check c{"material_derivative_constant"};
      AnalyticVelocity k;
      k.value = [](long double, long double) { return Vec2L{0.5L, -0.25L}; };
      k.jacobian = [](long double, long double) { return Mat2L{}; };
      double r = 0.0;
      for (int M : {2, 8, 16}) r = std::max(r, material_derivative_identity(k, cfg.grid, cfg.h, M).residual);
      if (cfg.grid.periodic()) {
        const auto grid_k = VelocityField::constant(cfg.grid, {0.5, -0.25});
        r = std::max(r, material_derivative_identity(grid_k, cfg.h, 16, cfg.interp).residual);
      }
      c.pass = r < 1e-12;
      c.add("residual", r);
      checks.push_back(c);
      if (kind == DatumKind::TaylorGreen) {
        Check q{"material_derivative_quadrature"};
        const auto exact = oracle_for(m).at_time(0.0);
        const double r8 = material_derivative_identity(exact, cfg.grid, cfg.h, 8).residual;
        const double r16 = material_derivative_identity(exact, cfg.grid, cfg.h, 16).residual;
        q.pass = r16 > 0.0 ? r8 / r16 >= 3.5 : r8 == 0.0;
        q.add("residual_m8", r8);
        q.add("residual_m16", r16);
        q.add("ratio", r16 > 0.0 ? r8 / r16 : 0.0);
        checks.push_back(q);
      }
      Check g{"material_derivative_grid", true, false};
      const auto rep = material_derivative_identity(a, cfg.h, 16, cfg.interp);
      g.pass = std::isfinite(rep.residual);
      g.add("residual", rep.residual);
      g.add("lhs_norm", rep.lhs_norm);
      checks.push_back(g);
    }
    {
      Check c{"weak_residual", true, reference};
      const auto lib = standard_test_functions(cfg.grid, ladder.front().end_time());
      bool same_horizon = true;
      for (const auto& t : ladder) same_horizon = same_horizon && std::abs(t.end_time() - ladder.front().end_time()) < 1e-12;
      if (!same_horizon) {
        c.pass = false;
        c.add("note", "ladder rungs end at different times");
      } else {
        int decreasing = 0;
        for (const auto& phi : lib) {
          std::vector<double> stokes, ns;
          double scale = 0.0;
          for (const auto& t : ladder) {
            const auto r = weak_residual(t, phi);
            stokes.push_back(r.stokes);
            ns.push_back(r.navier_stokes);
            scale = std::max(scale, r.magnitude);
          }
          const bool ok = non_increasing(stokes, scale);
          decreasing += ok;
          c.pass = c.pass && ok;
          c.add(phi.name, list(stokes));
          c.add(phi.name + "_navier_stokes", list(ns));
        }
        c.add("decreasing", static_cast<double>(decreasing));
        c.add("test_functions", static_cast<double>(lib.size()));
      }
      checks.push_back(c);
    }
    {
      Check c{"interpolant_consistency", true, reference};
      std::vector<double> change;
      for (const auto& t : ladder) change.push_back(max_step_change(t));
      for (std::size_t k = 1; k < change.size(); ++k) {
        const double expected = m.ladder_h[k - 1] / m.ladder_h[k];
        if (change[k] == 0.0 && change[k - 1] == 0.0) continue;
        const double ratio = change[k] > 0.0 ? change[k - 1] / change[k] : 0.0;
        c.pass = c.pass && ratio >= 0.75 * expected && ratio <= 1.25 * expected;
      }
      c.add("max_step_change", list(change));
      checks.push_back(c);
    }
    if (kind == DatumKind::TaylorGreen) {
      Check c{"oracle_error", true, false};
      std::vector<double> err;
      for (const auto& t : ladder) {
        const auto exact = taylor_green_field(t.end_time(), cfg.grid, oracle_for(m)).first;
        err.push_back(norm_l2(t.velocity(t.steps()) - exact));
      }
      for (std::size_t k = 1; k < err.size(); ++k) c.pass = c.pass && err[k] < err[k - 1];
      c.add("final_l2_error", list(err));
      checks.push_back(c);
    }

    bool all = true;
    auto f = open_output(dir / "verify.txt");
    f << "datum=" << to_string(kind) << '\n'
      << "bc=" << to_string(cfg.grid.bc) << '\n'
      << "cells=" << cfg.grid.cells[0] << ',' << cfg.grid.cells[1] << '\n'
      << "ladder_h=" << list(m.ladder_h) << '\n'
      << "corrupted_step=" << (options.corrupt_step ? std::to_string(*options.corrupt_step) : "none") << '\n';
    for (const auto& c : checks) {
      if (c.mandatory) all = all && c.pass;
      f << "check=" << c.name << " status=" << (c.pass ? "pass" : "fail")
        << " mandatory=" << (c.mandatory ? "yes" : "no");
      for (const auto& [k, v] : c.values) f << ' ' << k << '=' << v;
      f << '\n';
      log << (c.pass ? "PASS " : "FAIL ") << c.name << (c.mandatory ? "" : " (advisory)") << '\n';
    }
    f << "result=" << (all ? "pass" : "fail") << '\n';
    return all ? kExitOk : kExitCheckFailed;
  });
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

int cmd_converge(RunManifest m, const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    apply_overrides(m, options);
    m.validate();
    if (m.initial.kind != DatumKind::TaylorGreen)
      throw ConfigError("converge requires initial.kind = taylor_green");
    build_datum(m);
    const auto dir = prepare_output(m, options);
    const auto table = convergence_study(m.config, m.ladder_h, m.ladder_cells, oracle_for(m),
                                         options.threads);
    {
      auto f = open_output(dir / "convergence.csv");
      f << table.to_csv();
    }
    bool failed = false, monotone = true;
    auto f = open_output(dir / "convergence.txt");
    f << table.to_text() << '\n';
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
      const auto& r = table.rows[k];
      failed = failed || r.failure.has_value();
      if (k > 0 && table.rows[k - 1].cells == r.cells && !(r.l2_error < table.rows[k - 1].l2_error))
        monotone = false;
      const double nominal = m.config.T;
      if (std::abs(r.comparison_time - nominal) > 1e-12 * nominal)
        f << "note: h=" << format_double(r.h) << " does not divide T=" << format_double(nominal)
          << "; compared at N_T*h=" << format_double(r.comparison_time) << " with N_T=" << r.steps << '\n';
    }
    f << "comparison_time=N_T*h with N_T=floor(T/h)\n"
      << "error_norm=strong L2 against the exact solution\n"
      << "monotone=" << (monotone ? "true" : "false") << '\n';
    log << table.to_text();
    return failed ? kExitSolver : kExitOk;
  });
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"Semi-Lagrangian variational Navier-Stokes stepping and verification"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<int> corrupt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run manifest")->required();
    sub->add_option("--out", out, "Output directory (overrides [output] dir)");
    sub->add_option("--threads", threads, "Worker threads (default: DNS_FLOW_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Seed for random initial data");
  };
  auto* run_cmd = app.add_subcommand("run", "Run the scheme and write ledger, snapshots and report");
  auto* verify_cmd = app.add_subcommand("verify", "Run the step-size ladder and every analysis check");
  auto* converge_cmd = app.add_subcommand("converge", "Convergence study against the exact solution");
  common(run_cmd);
  common(verify_cmd);
  common(converge_cmd);
  verify_cmd->add_option("--corrupt-step", corrupt, "Test hook: negate this snapshot of the finest rung");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest manifest;
  try {
    manifest = load_manifest(config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CommandOptions options;
  if (out) options.out = *out;
  options.threads = resolve_threads(threads);
  options.seed = seed;
  options.corrupt_step = corrupt;

  try {
    if (*run_cmd) return cmd_run(std::move(manifest), options, std::cerr);
    if (*verify_cmd) return cmd_verify(std::move(manifest), options, std::cerr);
    return cmd_converge(std::move(manifest), options, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace dns::cli
