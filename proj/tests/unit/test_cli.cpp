#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dns/cli.hpp"
#include "dns/io.hpp"

using namespace dns;
using namespace dns::cli;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  const auto dir = fs::temp_directory_path() / "dns_flow_cli_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = workdir() / name;
  std::ofstream(p) << text;
  return p;
}

int invoke(const std::string& args) {
  const std::string cmd = std::string(DNS_FLOW_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest(R"(# comment
[run]
h = 0.025
T   =   0.5
cells = 32
bc = dirichlet
interp = cubic
path = direct_minimize
cross_check = yes

[initial]
kind = random
seed = 42
smooth = false

[output]
dir = "out dir"
cadence = 5

[ladder]
h = 0.0125, 0.025
cells = 64 32
)");
  CHECK(m.config.h == 0.025);
  CHECK(m.config.grid.cells == std::array<int, 2>{32, 32});
  CHECK(m.config.grid.bc == Boundary::DirichletZero);
  CHECK(m.config.interp == InterpOrder::Cubic);
  CHECK(m.config.path == StepPath::DirectMinimize);
  CHECK(m.config.cross_check);
  CHECK(m.initial.kind == DatumKind::Random);
  CHECK(m.initial.seed == 42);
  CHECK_FALSE(m.initial.smooth);
  CHECK(m.output_dir == fs::path("out dir"));
  CHECK(m.cadence == 5);
  CHECK(m.ladder_h == std::vector<double>{0.025, 0.0125});
  CHECK(m.ladder_cells == std::vector<int>{32, 64});
}

TEST_CASE("manifest defaults") {
  const auto m = parse_manifest("[run]\nh = 0.1\n");
  CHECK(m.ladder_h == std::vector<double>{0.1, 0.05, 0.025});
  CHECK(m.ladder_cells == std::vector<int>{64});
  CHECK(m.initial.kind == DatumKind::TaylorGreen);
  CHECK(m.config.T == 0.5);
}

TEST_CASE("manifest round trip") {
  const std::string texts[] = {
      "",
      "[run]\nh = 0.3\nT = 1\ncells = 16 8\nextent = 2 1\n[initial]\nkind = zero\n",
      "[run]\nbc = dirichlet\n[initial]\nkind = snapshot\nsnapshot = \"a/b c.vtk\"\n[output]\ndir = x\n",
      "[run]\nviscosity = 0.1\nminimizer_tol = 1e-9\nsolver_tol = 3e-11\nsolver_max_iters = 77\n"
      "[initial]\nkind = random\namplitude = 0.3\nmax_mode = 9\n[ladder]\nh = 0.1 0.03 0.01\ncells = 16,32,64\n",
  };
  for (const auto& text : texts) {
    const auto canonical = serialize_manifest(parse_manifest(text));
    CHECK(serialize_manifest(parse_manifest(canonical)) == canonical);
  }
  const auto canonical = serialize_manifest(parse_manifest("[run]\nh=0.1\n[initial]\nkind=zero\n"));
  CHECK(canonical.find("[run]\nh = 0.1\nT = 0.5\ncells = 64 64\n") == 0);
  CHECK(canonical.find("kind = zero\n") != std::string::npos);
  CHECK(canonical.find("[ladder]\nh = 0.1 0.05 0.025\ncells = 64\n") != std::string::npos);
}

TEST_CASE("manifest errors") {
  CHECK_THROWS_AS(parse_manifest("[run]\nh = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[run]\nwarp = 9\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[nowhere]\nh = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[run]\nh = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[run]\nbc = slip\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[output]\ncadence = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[initial]\nkind = snapshot\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[run]\nh = 0.1\nh = 0.2\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("[run]\ncells = 7\n"), ConfigError);
  CHECK_THROWS_AS(load_manifest(workdir() / "does_not_exist.ini"), ConfigError);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) == 3);
  ::setenv("DNS_FLOW_THREADS", "5", 1);
  CHECK(resolve_threads(std::nullopt) == 5);
  CHECK(resolve_threads(2) == 2);
  ::setenv("DNS_FLOW_THREADS", "junk", 1);
  CHECK(resolve_threads(std::nullopt) == 1);
  ::unsetenv("DNS_FLOW_THREADS");
  CHECK(resolve_threads(std::nullopt) == 1);
}

TEST_CASE("run subcommand") {
  SUBCASE("missing config") {
    const auto out = workdir() / "missing_out";
    fs::remove_all(out);
    CHECK(invoke("run --config " + (workdir() / "nope.ini").string() + " --out " + out.string()) == kExitUsage);
    CHECK_FALSE(fs::exists(out));
  }
  SUBCASE("unknown subcommand") { CHECK(invoke("launch") == kExitUsage); }
  SUBCASE("zero datum") {
    const auto cfg = write_config("zero.ini", "[run]\nh = 0.1\nT = 0.2\ncells = 16\n[initial]\nkind = zero\n");
    const auto out = workdir() / "zero_out";
    fs::remove_all(out);
    REQUIRE(invoke("run --config " + cfg.string() + " --out " + out.string()) == kExitOk);
    CHECK(slurp(out / "ledger.csv") ==
          "n,t,kinetic_shifted,kinetic_plain,dirichlet,fitted_c\n1,0.1,0,0,0,0\n2,0.2,0,0,0,0\n");
    CHECK(fs::exists(out / "snapshot_2.vtk"));
    CHECK(slurp(out / "report.txt").find("status=ok") == 0);
  }
  SUBCASE("Taylor-Green") {
    const auto cfg = write_config("tg.ini", "[run]\nh = 0.0125\nT = 0.5\ncells = 64\n[output]\ncadence = 20\n");
    const auto out = workdir() / "tg_out";
    fs::remove_all(out);
    REQUIRE(invoke("run --config " + cfg.string() + " --out " + out.string()) == kExitOk);
    CHECK(count_lines(out / "ledger.csv") == 41);
    const auto report = slurp(out / "report.txt");
    CHECK(report.find("final_l2_error=") != std::string::npos);
    CHECK(report.find("steps=40\n") != std::string::npos);
    for (int n : {0, 20, 40}) CHECK(fs::exists(out / ("snapshot_" + std::to_string(n) + ".vtk")));
    CHECK_FALSE(fs::exists(out / "snapshot_10.vtk"));
    const auto snap = read_vtk(out / "snapshot_40.vtk");
    CHECK(snap.pressure.has_value());
  }
  SUBCASE("solver failure") {
    const auto cfg = write_config("starved.ini",
                                  "[run]\nh = 0.05\nT = 0.2\ncells = 16\nbc = dirichlet\nsolver_max_iters = 1\n"
                                  "[initial]\nkind = wall_vortex\n");
    const auto out = workdir() / "starved_out";
    fs::remove_all(out);
    CHECK(invoke("run --config " + cfg.string() + " --out " + out.string()) == kExitSolver);
    CHECK(slurp(out / "report.txt").find("failed_step=1") != std::string::npos);
  }
  SUBCASE("snapshot datum") {
    const auto first = write_config("first.ini", "[run]\nh = 0.05\nT = 0.1\ncells = 16\n[initial]\nkind = random\n");
    const auto out = workdir() / "first_out";
    fs::remove_all(out);
    REQUIRE(invoke("run --config " + first.string() + " --out " + out.string() + " --seed 9") == kExitOk);
    const auto second =
        write_config("second.ini", "[run]\nh = 0.05\nT = 0.1\ncells = 16\n[initial]\nkind = snapshot\nsnapshot = \"" +
                                       (out / "snapshot_2.vtk").string() + "\"\n");
    CHECK(invoke("run --config " + second.string() + " --out " + (workdir() / "second_out").string()) == kExitOk);
    const auto wrong = write_config(
        "wrong.ini", "[run]\ncells = 32\n[initial]\nkind = snapshot\nsnapshot = \"" + (out / "snapshot_2.vtk").string() + "\"\n");
    CHECK(invoke("run --config " + wrong.string() + " --out " + (workdir() / "wrong_out").string()) == kExitUsage);
  }
}

TEST_CASE("verify subcommand") {
  const auto zero = write_config("vzero.ini", "[run]\nh = 0.1\nT = 0.4\ncells = 16\n[initial]\nkind = zero\n");
  CHECK(invoke("verify --config " + zero.string() + " --out " + (workdir() / "vzero").string()) == kExitOk);
  CHECK(slurp(workdir() / "vzero" / "verify.txt").find("result=pass") != std::string::npos);

  const auto tg = write_config("vtg.ini", "[run]\nh = 0.025\nT = 0.5\ncells = 32\ninterp = cubic\n");
  const auto out = workdir() / "vtg";
  CHECK(invoke("verify --config " + tg.string() + " --out " + out.string() + " --threads 3") == kExitOk);
  const auto clean = slurp(out / "verify.txt");
  CHECK(clean.find("check=step_inequality status=pass") != std::string::npos);
  CHECK(invoke("verify --config " + tg.string() + " --out " + out.string() + " --corrupt-step 40") == kExitCheckFailed);
  CHECK(slurp(out / "verify.txt").find("check=step_inequality status=fail") != std::string::npos);
  CHECK(invoke("verify --config " + tg.string() + " --out " + out.string() + " --corrupt-step 400") == kExitUsage);
}

TEST_CASE("converge subcommand") {
  const auto single = write_config("single.ini", "[run]\nh = 0.1\nT = 0.5\ncells = 16\n[ladder]\nh = 0.1\n");
  const auto out = workdir() / "conv_single";
  REQUIRE(invoke("converge --config " + single.string() + " --out " + out.string()) == kExitOk);
  CHECK(count_lines(out / "convergence.csv") == 2);

  const auto odd = write_config("odd.ini", "[run]\nh = 0.3\nT = 1\ncells = 16\n[ladder]\nh = 0.3 0.15\n");
  const auto out2 = workdir() / "conv_odd";
  REQUIRE(invoke("converge --config " + odd.string() + " --out " + out2.string()) == kExitOk);
  const auto text = slurp(out2 / "convergence.txt");
  CHECK(text.find("does not divide T=1") != std::string::npos);
  CHECK(text.find("comparison_time=N_T*h") != std::string::npos);

  const auto rnd = write_config("crand.ini", "[initial]\nkind = random\n");
  CHECK(invoke("converge --config " + rnd.string() + " --out " + (workdir() / "crand").string()) == kExitUsage);
}
