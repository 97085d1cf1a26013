#include <cmath>

#include "doctest.h"
#include "dns/bench.hpp"
#include "dns/projection.hpp"
#include "dns/scheme.hpp"
#include "test_support.hpp"

using namespace dns;

namespace {

DnsConfig config(const GridSpec& spec, double h, double T) {
  DnsConfig cfg;
  cfg.grid = spec;
  cfg.h = h;
  cfg.T = T;
  return cfg;
}

/// Exact Taylor-Green advection oracle: v - h (v.D)v with analytic derivatives.
VelocityField taylor_backtrace(const GridSpec& spec, double h) {
  return VelocityField::from_function(spec, [h](double x, double y) {
    const double u = std::sin(x) * std::cos(y), v = -std::cos(x) * std::sin(y);
    const double ux = std::cos(x) * std::cos(y), uy = -std::sin(x) * std::sin(y);
    const double vx = std::sin(x) * std::sin(y), vy = -std::cos(x) * std::cos(y);
    return Vec2{u - h * (u * ux + v * uy), v - h * (u * vx + v * vy)};
  });
}

}  // namespace

TEST_CASE("config") {
  DnsConfig cfg;
  CHECK(cfg.steps() == 40);
  cfg.h = 0.3;
  cfg.T = 1.0;
  CHECK(cfg.steps() == 3);
  CHECK(cfg.end_time() == doctest::Approx(0.9));
  cfg.h = 0.1;
  CHECK(cfg.steps() == 10);
  cfg.h = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.h = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.h = 0.1;
  cfg.path = StepPath::DirectMinimize;
  cfg.minimizer_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_step_path("direct_minimize") == StepPath::DirectMinimize);
  CHECK_THROWS(parse_step_path("newton"));
}

TEST_CASE("backtrace") {
  for (auto bc : {Boundary::Periodic, Boundary::DirichletZero}) {
    const auto spec = GridSpec::square(16, bc);
    CHECK(backtrace(VelocityField(spec), 0.1).max_abs() == 0.0);
  }
  const auto spec = test::torus(32);
  const auto c = VelocityField::constant(spec, {0.7, -0.3});
  for (auto order : {InterpOrder::Linear, InterpOrder::Cubic})
    CHECK(test::max_abs_diff(backtrace(c, 0.37, order), c) < 1e-14);

  SUBCASE("second-order agreement with the Taylor expansion") {
    const auto fine = test::torus(128);
    const auto [tg, p] = taylor_green_field(0.0, fine);
    const double e1 = norm_l2(backtrace(tg, 1e-3, InterpOrder::Cubic) - taylor_backtrace(fine, 1e-3));
    const double e2 = norm_l2(backtrace(tg, 5e-4, InterpOrder::Cubic) - taylor_backtrace(fine, 5e-4));
    CHECK(e1 / e2 >= 3.9);
  }
}

TEST_CASE("functional value") {
  const auto spec = test::torus(32);
  CHECK(functional_value(VelocityField(spec), VelocityField(spec), 0.1) == 0.0);
  const auto v_prev = random_solenoidal(spec, 5);
  const double h = 0.05;
  const auto w = backtrace(v_prev, h);
  const double s = inner_product_l2(w, w);
  CHECK(functional_value(VelocityField(spec), v_prev, h) == doctest::Approx(s / (2.0 * h)).epsilon(1e-14));
}

TEST_CASE("minimality of the step") {
  for (auto bc : {Boundary::Periodic, Boundary::DirichletZero}) {
    CAPTURE(to_string(bc));
    const auto spec = GridSpec::square(32, bc);
    const auto v_prev = random_solenoidal(spec, 17);
    auto cfg = config(spec, 0.02, 0.02);
    const auto step = dns_step(v_prev, cfg);
    const double base = step.functional_value;
    CHECK(base == doctest::Approx(functional_value_backtraced(step.v, step.w, cfg.h)).epsilon(1e-12));
    for (std::uint64_t k = 0; k < 20; ++k) {
      auto phi = random_solenoidal(spec, 1000 + k);
      const double eps = 1e-3;
      CHECK(functional_value_backtraced(step.v + eps * phi, step.w, cfg.h) >= base - 1e-12);
    }
    const auto pw = leray_project(step.w).solenoidal;
    CHECK(base <= functional_value_backtraced(pw, step.w, cfg.h) + 1e-12);
    CHECK(base <= functional_value_backtraced(v_prev, step.w, cfg.h) + 1e-12);
    CHECK(base <= functional_value_backtraced(VelocityField(spec), step.w, cfg.h) + 1e-12);
  }
}

TEST_CASE("dns_step") {
  SUBCASE("zero field") {
    for (auto path : {StepPath::EulerLagrange, StepPath::DirectMinimize}) {
      auto cfg = config(test::box(16), 0.1, 0.1);
      cfg.path = path;
      const auto r = dns_step(VelocityField(cfg.grid), cfg);
      CHECK(r.v.max_abs() == 0.0);
      CHECK(r.p.max_abs() == 0.0);
      CHECK(r.functional_value == 0.0);
    }
  }
  SUBCASE("paths agree on Taylor-Green") {
    auto cfg = config(test::torus(64), 1e-2, 1e-2);
    const auto [tg, p] = taylor_green_field(0.0, cfg.grid);
    const auto el = dns_step(tg, cfg);
    cfg.path = StepPath::DirectMinimize;
    const auto dm = dns_step(tg, cfg);
    CHECK(norm_l2(el.v - dm.v) < 1e-8);
    CHECK(std::abs(el.functional_value - dm.functional_value) < 1e-9 * el.functional_value);
  }
  SUBCASE("paths agree on random solenoidal data") {
    for (auto bc : {Boundary::Periodic, Boundary::DirichletZero}) {
      CAPTURE(to_string(bc));
      auto cfg = config(GridSpec::square(32, bc), 0.05, 0.05);
      cfg.cross_check = true;
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto a = random_solenoidal(cfg.grid, seed);
        const auto r = dns_step(a, cfg);
        REQUIRE(r.cross_check_gap.has_value());
        CHECK(*r.cross_check_gap < 1e-6);
      }
    }
  }
  SUBCASE("result invariants") {
    for (auto bc : {Boundary::Periodic, Boundary::DirichletZero}) {
      for (auto path : {StepPath::EulerLagrange, StepPath::DirectMinimize}) {
        CAPTURE(to_string(bc));
        CAPTURE(to_string(path));
        auto cfg = config(GridSpec::square(32, bc), 0.02, 0.02);
        cfg.path = path;
        const auto r = dns_step(random_solenoidal(cfg.grid, 8), cfg);
        CHECK(r.divergence_max < divergence_tolerance(cfg.grid));
        CHECK(r.v.satisfies_boundary_condition());
        CHECK(r.el_residual <= 1e-8 * r.el_scale);
        CHECK(std::isfinite(r.functional_value));
        CHECK(std::abs(r.p.mean()) <= 1e-12 * std::max(1.0, r.p.max_abs()));
      }
    }
  }
  SUBCASE("local second-order error against the exact solution") {
    const auto spec = test::torus(128);
    const auto [tg, p] = taylor_green_field(0.0, spec);
    double err[2];
    int k = 0;
    for (double h : {1e-3, 5e-4}) {
      auto cfg = config(spec, h, h);
      cfg.interp = InterpOrder::Cubic;
      const auto r = dns_step(tg, cfg);
      err[k++] = norm_l2(r.v - taylor_green_field(h, spec).first);
    }
    CHECK(err[0] / err[1] >= 3.5);
  }
}

TEST_CASE("step pressure follows the exact pressure") {
  const auto spec = test::torus(64);
  const auto a = taylor_green_field(0.0, spec).first;
  double err[2];
  int k = 0;
  for (double h : {1e-2, 5e-3}) {
    auto cfg = config(spec, h, h);
    cfg.interp = InterpOrder::Cubic;
    for (auto path : {StepPath::EulerLagrange, StepPath::DirectMinimize}) {
      cfg.path = path;
      const auto r = dns_step(a, cfg);
      const auto exact = taylor_green_field(h, spec).second;
      const double e = (r.p - exact).max_abs();
      CHECK(e < 0.05);
      if (path == StepPath::EulerLagrange) err[k] = e;
    }
    ++k;
  }
  CHECK(err[0] / err[1] > 1.8);
}

TEST_CASE("run") {
  SUBCASE("zero datum") {
    const auto traj = run(VelocityField(test::box(16)), config(test::box(16), 0.1, 0.5));
    CHECK(traj.steps() == 5);
    for (int n = 0; n <= traj.steps(); ++n) CHECK(traj.velocity(n).max_abs() == 0.0);
  }
  SUBCASE("sinks see every step") {
    auto cfg = config(test::torus(16), 0.1, 0.35);
    std::vector<int> seen;
    const StepSink sink = [&](int n, double t, const StepResult& r) {
      seen.push_back(n);
      CHECK(t == doctest::Approx(n * 0.1));
      CHECK(r.v.finite());
    };
    run(random_solenoidal(cfg.grid, 1), cfg, std::span(&sink, 1));
    CHECK(seen == std::vector<int>{1, 2, 3});
  }
  SUBCASE("divergent datum is projected once") {
    auto cfg = config(test::torus(16), 0.1, 0.1);
    const auto a = gradient(test::random_smooth_scalar(cfg.grid, 2)) + random_solenoidal(cfg.grid, 2);
    const auto traj = run(a, cfg);
    CHECK(traj.initial_projected);
    CHECK(traj.initial_divergence > 1e-3);
    CHECK(divergence(traj.velocity(0)).max_abs() < 1e-10);
  }
  SUBCASE("datum violating the wall condition is rejected") {
    auto cfg = config(test::box(16), 0.1, 0.1);
    CHECK_THROWS_AS(run(VelocityField::constant(cfg.grid, {1.0, 0.0}), cfg), std::invalid_argument);
  }
  SUBCASE("solver failure names the step") {
    auto cfg = config(test::box(16), 0.1, 0.3);
    cfg.solver.max_iters = 1;
    try {
      run(wall_vortex(cfg.grid), cfg);
      FAIL("expected a step failure");
    } catch (const StepFailure& e) {
      CHECK(e.step() == 1);
    }
  }
  SUBCASE("Taylor-Green invariants") {
    auto cfg = config(test::torus(64), 1.0 / 80.0, 0.5);
    const auto traj = run(taylor_green_field(0.0, cfg.grid).first, cfg);
    CHECK(traj.steps() == 40);
    double prev = grad_norm_sq(traj.velocity(0));
    for (int n = 1; n <= traj.steps(); ++n) {
      CHECK(traj.record(n).divergence_max < 1e-10);
      const double e = grad_norm_sq(traj.velocity(n));
      CHECK(e <= prev);
      prev = e;
    }
  }
  SUBCASE("wall-bounded run stays admissible") {
    auto cfg = config(test::box(32), 0.02, 0.1);
    const auto traj = run(random_solenoidal(cfg.grid, 4), cfg);
    for (int n = 1; n <= traj.steps(); ++n) {
      CHECK(traj.record(n).divergence_max < 1e-8);
      CHECK(traj.velocity(n).satisfies_boundary_condition());
      CHECK(traj.record(n).report.converged);
    }
  }
  SUBCASE("determinism") {
    for (auto bc : {Boundary::Periodic, Boundary::DirichletZero}) {
      auto cfg = config(GridSpec::square(16, bc), 0.05, 0.2);
      const auto a = random_solenoidal(cfg.grid, 12);
      const auto t1 = run(a, cfg), t2 = run(a, cfg);
      for (int n = 0; n <= t1.steps(); ++n)
        for (int c = 0; c < 2; ++c) CHECK(t1.velocity(n).component(c) == t2.velocity(n).component(c));
    }
  }
}

TEST_CASE("first-order convergence on Taylor-Green") {
  const auto spec = test::torus(64);
  const auto a = taylor_green_field(0.0, spec).first;
  std::vector<double> err;
  for (double h : {1.0 / 40, 1.0 / 80, 1.0 / 160}) {
    auto cfg = config(spec, h, 0.5);
    cfg.interp = InterpOrder::Cubic;
    const auto traj = run(a, cfg);
    err.push_back(norm_l2(traj.velocity(traj.steps()) - taylor_green_field(traj.end_time(), spec).first));
  }
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
  CHECK(std::log2(err[1] / err[2]) >= 0.9);
}
