#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dns/scheme.hpp"

namespace dns::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DatumKind { Zero, TaylorGreen, Random, WallVortex, Snapshot };

std::string_view to_string(DatumKind kind);
DatumKind parse_datum_kind(std::string_view text);

struct InitialDatum {
  DatumKind kind = DatumKind::TaylorGreen;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  int max_mode = 4;
  bool smooth = true;
  std::filesystem::path snapshot;
};

struct RunManifest {
  DnsConfig config;
  InitialDatum initial;
  std::filesystem::path output_dir = "dns_flow_out";
  int cadence = 1;
  /// Time steps for `verify` and `converge`; defaults to h, h/2, h/4.
  std::vector<double> ladder_h;
  /// Grid sizes for `converge`; defaults to the run grid.
  std::vector<int> ladder_cells;

  void validate() const;
};

/// Parses `key = value` lines grouped under [run], [initial], [output] and [ladder].
/// Unknown sections or keys are errors.
RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const std::filesystem::path& path);

/// Canonical text: every key in a fixed order, numbers in shortest round-trip form.
std::string serialize_manifest(const RunManifest& manifest);

struct CommandOptions {
  std::optional<std::filesystem::path> out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  /// Test hook for `verify`: negate this snapshot of the finest rung after the run.
  std::optional<int> corrupt_step;
};

/// --threads if given, else DNS_FLOW_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

int cmd_run(RunManifest manifest, const CommandOptions& options, std::ostream& log);
int cmd_verify(RunManifest manifest, const CommandOptions& options, std::ostream& log);
int cmd_converge(RunManifest manifest, const CommandOptions& options, std::ostream& log);

/// Full command line entry point; returns the process exit status.
int main(int argc, char** argv);

}  // namespace dns::cli
