#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "dispml/certify.hpp"
#include "dispml/tdsim.hpp"

using namespace dispml;

namespace {

SimConfig vacuum_cfg(int n_cells = 512, double dx = 0.02) {
  SimConfig cfg;
  cfg.grid.n_cells = n_cells;
  cfg.grid.dx = dx;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.omega0 = 6.0;
  cfg.source.width = 0.5;
  cfg.source.position = 0.5;
  return cfg;
}

double linf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("vacuum pulse arrives at unit speed") {
  SimConfig cfg = vacuum_cfg();
  cfg.n_steps = 400;
  cfg.probe_positions = {0.75};  // 0.25 * L away from the source
  const RunResult res = run(cfg);
  const TimeSeries* probe = res.find("probe_0");
  REQUIRE(probe != nullptr);

  // first-arrival: earliest time the probe exceeds 1% of its eventual peak
  const double peak = linf(probe->values);
  double t_arrive = 0.0;
  for (std::size_t i = 0; i < probe->values.size(); ++i) {
    if (std::abs(probe->values[i]) > 0.01 * peak) {
      t_arrive = probe->times[i];
      break;
    }
  }
  const double distance = 0.25 * cfg.grid.length();
  // the envelope turns on ~2 widths before its center
  const double t_emit = cfg.source.center_time() - 2.0 * cfg.source.width;
  CHECK(t_arrive - distance == doctest::Approx(t_emit).epsilon(0.15));
}

TEST_CASE("uniform-sigma conjugation: fields decay at exp(-sigma dt) per step") {
  SimConfig cfg = vacuum_cfg(256);
  cfg.variant = SystemVariant::DispersionUpml;
  cfg.grid.uniform_sigma = 2.0;
  cfg.n_steps = 600;
  cfg.source.width = 0.3;
  cfg.source.t0 = 1.5;

  Simulator sim(cfg);
  for (int i = 0; i < 300; ++i) sim.step();  // source done well before t = 300 dt
  const double t1 = sim.time();
  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const double e1 = norm2(sim.state().block("E"));
  const double h1 = norm2(sim.state().block("H"));
  for (int i = 0; i < 120; ++i) sim.step();
  const double dt_total = sim.time() - t1;
  const double e2 = norm2(sim.state().block("E"));
  const double h2 = norm2(sim.state().block("H"));

  // conjugation u -> exp(sigma t) u maps the run onto the undamped one,
  // whose component norms are steady once the pulses separate
  const double expected = std::exp(-2.0 * dt_total);
  CHECK(e2 / e1 == doctest::Approx(expected).epsilon(0.01));
  CHECK(h2 / h1 == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("uniform-sigma UPML: log-energy slope is -2 sigma") {
  SimConfig cfg = vacuum_cfg(256);
  cfg.variant = SystemVariant::DispersionUpml;
  cfg.grid.uniform_sigma = 2.0;
  cfg.n_steps = 700;
  cfg.source.width = 0.3;
  cfg.source.t0 = 1.5;
  const RunResult res = run(cfg);
  const DecayFit fit = fit_decay_rate(*res.find("energy_total"), 4.0, 11.0);
  CHECK(fit.rate == doctest::Approx(2.0).epsilon(0.02));
  CHECK(fit.r_squared > 0.999);

  SUBCASE("energy strictly decreasing once the source is off") {
    const TimeSeries* e = res.find("energy_total");
    for (std::size_t i = 1; i < e->values.size(); ++i) {
      if (e->times[i] < 4.0) continue;
      CHECK(e->values[i] < e->values[i - 1]);
    }
  }
}

TEST_CASE("fit_decay_rate: synthetic exponential") {
  TimeSeries s;
  s.name = "synthetic";
  for (int i = 0; i <= 1000; ++i) {
    const double t = i * 0.01;
    s.times.push_back(t);
    s.values.push_back(std::exp(-3.0 * t));
  }
  const DecayFit fit = fit_decay_rate(s, 0.0, 10.0);
  CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(fit.rate == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(fit.r_squared > 0.999999);

  s.values[500] = -1.0;
  CHECK_THROWS_AS(fit_decay_rate(s, 0.0, 10.0), NonPositiveValues);
}

TEST_CASE("Debye medium: probe amplitude ratio matches the dispersion relation") {
  SimConfig cfg;
  cfg.variant = SystemVariant::DispersionUpml;  // absorbing ends
  cfg.material.debye = {{1.0, 1.0}};
  cfg.grid.n_cells = 1200;
  cfg.grid.dx = 0.02;
  cfg.grid.pml_left = {StretchKind::Uniaxial, 32, 0.0, true, 0.0, 3,
                       PmlProfile::AlphaGrading::LinearDecay};
  cfg.grid.pml_right = cfg.grid.pml_left;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.omega0 = 3.0;
  cfg.source.width = 18.0;
  cfg.source.position = 0.15;
  cfg.probe_positions = {0.5, 0.55};
  cfg.n_steps = 6500;

  const RunResult res = run(cfg);
  const double a1 = linf(res.find("probe_0")->values);
  const double a2 = linf(res.find("probe_1")->values);

  // rightward mode ~ exp(-i omega sqrt(eps(i omega)) x): amplitude falls at
  // exp(Im(omega sqrt(eps)) x)
  const cplx eps = eval_epsilon(cfg.material, {0.0, cfg.source.omega0});
  const double dist = 0.05 * cfg.grid.length();
  const double expected = std::exp(cfg.source.omega0 * std::sqrt(eps).imag() * dist);
  CHECK(a2 / a1 == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("discrete causality: sources equal up to t = a give equal states up to a") {
  SimConfig cfg = vacuum_cfg(128);
  cfg.n_steps = 400;
  const double a = 3.0;

  std::vector<std::vector<double>> f1, f2;
  run_custom(cfg, [](int, double) { return 0.0; }, &f1, nullptr);
  run_custom(cfg,
             [a](int node, double t) {
               return (t > a && node == 40) ? 0.7 * std::sin(9.0 * t) : 0.0;
             },
             &f2, nullptr);

  const double dt = cfg.resolved_dt();
  bool diverged_later = false;
  for (std::size_t n = 0; n < f1.size(); ++n) {
    const double t = n * dt;
    REQUIRE(f1[n].size() == f2[n].size());
    if (t <= a) {
      for (std::size_t i = 0; i < f1[n].size(); ++i) REQUIRE(f1[n][i] == f2[n][i]);
    } else {
      for (std::size_t i = 0; i < f1[n].size(); ++i)
        if (f1[n][i] != f2[n][i]) diverged_later = true;
    }
  }
  CHECK(diverged_later);
}

TEST_CASE("restart determinism and serial/parallel equivalence") {
  SimConfig cfg = vacuum_cfg(200);
  cfg.variant = SystemVariant::DispersionCfs;
  cfg.material.debye = {{0.5, 1.0}};
  cfg.grid.pml_left = {StretchKind::CFS, 12, 0.0, true, 0.1, 3,
                       PmlProfile::AlphaGrading::LinearDecay};
  cfg.grid.pml_right = cfg.grid.pml_left;
  cfg.n_steps = 300;

  const RunResult r1 = run(cfg);
  const RunResult r2 = run(cfg);
  CHECK(r1.final_state.block("E") == r2.final_state.block("E"));
  CHECK(r1.final_state.block("H") == r2.final_state.block("H"));

  SimConfig serial = cfg;
  serial.exec = Exec::Serial;
  const RunResult r3 = run(serial);
  for (std::size_t b = 0; b < r1.final_state.data.size(); ++b)
    CHECK(r1.final_state.data[b] == r3.final_state.data[b]);
}

TEST_CASE("zero-strength CFS layer reproduces the plain run exactly") {
  SimConfig plain = vacuum_cfg(200);
  plain.material.debye = {{0.8, 1.3}};
  plain.n_steps = 250;

  SimConfig pml = plain;
  pml.variant = SystemVariant::DispersionCfs;
  pml.grid.pml_left = {StretchKind::CFS, 16, 0.0, false, 0.0, 3,
                       PmlProfile::AlphaGrading::LinearDecay};
  pml.grid.pml_right = pml.grid.pml_left;

  const RunResult a = run(plain);
  const RunResult b = run(pml);
  const auto& ea = a.final_state.block("E");
  const auto& eb = b.final_state.block("E");
  double worst = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i)
    worst = std::max(worst, std::abs(ea[i] - eb[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("second-order convergence of the vacuum pulse") {
  std::vector<std::vector<double>> finals;
  std::vector<int> cells = {256, 512, 1024, 2048};
  for (int nc : cells) {
    SimConfig cfg;
    cfg.grid.n_cells = nc;
    cfg.grid.dx = 20.48 / nc;
    cfg.cfl_safety = 0.5;
    cfg.dt = 0.5 * cfg.grid.dx;
    cfg.n_steps = int(std::lround(6.0 / cfg.dt));
    cfg.record_stride = cfg.n_steps;
    cfg.source.type = SourceSpec::Type::GaussianSine;
    cfg.source.omega0 = 4.0;
    cfg.source.width = 0.5;
    cfg.source.t0 = 2.0;
    cfg.source.position = 0.25;
    cfg.source.spatial_width = 0.4 / cfg.grid.dx;
    finals.push_back(run(cfg).final_state.block("E"));
  }

  std::vector<double> errs;
  for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
    const auto& coarse = finals[k];
    const auto& fine = finals[k + 1];
    double acc = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      const double d = coarse[i] - fine[2 * i];
      acc += d * d;
    }
    errs.push_back(std::sqrt(acc / coarse.size()));
  }
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    const double order = std::log2(errs[k] / errs[k + 1]);
    CAPTURE(k);
    CHECK(order >= 1.9);
  }
}

TEST_CASE("vacuum energy drift stays small after the source turns off") {
  SimConfig cfg = vacuum_cfg(256, 0.04);
  cfg.cfl_safety = 0.02;
  cfg.source.omega0 = 2.0;
  cfg.source.width = 1.0;
  cfg.source.t0 = 4.0;
  cfg.n_steps = 11000;
  cfg.record_stride = 10;
  const RunResult res = run(cfg);
  const TimeSeries* e = res.find("state_norm");
  double base = 0.0, lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < e->values.size(); ++i) {
    if (e->times[i] < 7.5) continue;
    if (base == 0.0) base = e->values[i];
    lo = std::min(lo, e->values[i]);
    hi = std::max(hi, e->values[i]);
  }
  CHECK((hi - lo) / base < 1e-6);
}

TEST_CASE("CFS layers on both sides absorb the pulse to below 1e-6 of peak") {
  SimConfig cfg;
  cfg.variant = SystemVariant::DispersionCfs;
  cfg.grid.n_cells = 512;
  cfg.grid.dx = 0.02;
  cfg.grid.pml_left = {StretchKind::CFS, 16, 0.0, true, 0.05, 3,
                       PmlProfile::AlphaGrading::LinearDecay};
  cfg.grid.pml_right = cfg.grid.pml_left;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.omega0 = 6.0;
  cfg.source.width = 0.5;
  cfg.source.t0 = 2.5;
  cfg.source.position = 0.5;
  cfg.n_steps = 1200;  // pulse reaches the layers by t ~ 7.6, run to ~21.6
  const RunResult res = run(cfg);
  const TimeSeries* phys = res.find("energy_phys");
  CHECK(phys->values.back() < 1e-6 * res.peak_field_energy);
}

TEST_CASE("Debye+CFS decay rate clears the certified-rate sanity floor") {
  ScalarLaw law;
  law.params.debye = {{1.0, 1.0}};
  law.stretch = {StretchKind::CFS, 1.0, 1.0};
  law.component = Component::Electric;
  const Certificate cert =
      find_nu0_stability(law, HalfPlaneGrid::defaults(law), 0.0, 0.5);
  REQUIRE(cert.verdict == Verdict::Accretive);

  SimConfig cfg;
  cfg.variant = SystemVariant::DispersionCfs;
  cfg.material = law.params;
  cfg.grid.n_cells = 384;
  cfg.grid.dx = 0.02;
  cfg.grid.pml_left = {StretchKind::CFS, 24, 0.0, true, 0.05, 3,
                       PmlProfile::AlphaGrading::LinearDecay};
  cfg.grid.pml_right = cfg.grid.pml_left;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.omega0 = 5.0;
  cfg.source.width = 0.4;
  cfg.source.t0 = 2.0;
  cfg.source.position = 0.5;
  cfg.n_steps = 700;
  const RunResult res = run(cfg);
  const DecayFit fit = fit_decay_rate(*res.find("energy_total"), 4.0, 9.0);
  // a sanity floor, not an equality: the measured absorption-driven rate
  // must not undercut half the certified continuous rate
  CHECK(fit.rate >= 0.5 * cert.nu0);
}

TEST_CASE("reflection: hard wall reflects everything") {
  SimConfig cfg;
  cfg.grid.n_cells = 400;
  cfg.grid.dx = 0.025;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.omega0 = 6.0;
  cfg.source.width = 0.5;
  cfg.source.t0 = 2.5;
  cfg.source.position = 0.5;
  cfg.n_steps = int(std::lround(18.0 / cfg.resolved_dt()));
  const SimConfig ref = make_reference_config(cfg, 4);
  const double r_db = reflection_coefficient(cfg, ref);
  CHECK(r_db > -3.0);
  CHECK(r_db < 7.0);
}

TEST_CASE("reflection: tuned 16-cell CFS layer absorbs below -60 dB") {
  SimConfig cfg;
  cfg.variant = SystemVariant::DispersionCfs;
  cfg.grid.n_cells = 400;
  cfg.grid.dx = 0.025;
  cfg.grid.pml_left = {StretchKind::CFS, 16, 0.0, true, 0.05, 3,
                       PmlProfile::AlphaGrading::LinearDecay};
  cfg.grid.pml_right = cfg.grid.pml_left;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.omega0 = 6.0;
  cfg.source.width = 0.5;
  cfg.source.t0 = 2.5;
  cfg.source.position = 0.5;
  cfg.n_steps = int(std::lround(18.0 / cfg.resolved_dt()));
  const double r_db = reflection_coefficient(cfg, make_reference_config(cfg, 4));
  CHECK(r_db <= -60.0);
}

TEST_CASE("reflection decreases as the layer thickens") {
  auto reflect = [](int thickness) {
    SimConfig cfg;
    cfg.variant = SystemVariant::DispersionCfs;
    cfg.grid.n_cells = 400;
    cfg.grid.dx = 0.025;
    cfg.grid.pml_left = {StretchKind::CFS, thickness, 40.0, false, 0.05, 3,
                         PmlProfile::AlphaGrading::LinearDecay};
    cfg.grid.pml_right = cfg.grid.pml_left;
    cfg.source.type = SourceSpec::Type::GaussianSine;
    cfg.source.omega0 = 6.0;
    cfg.source.width = 0.5;
    cfg.source.t0 = 2.5;
    cfg.source.position = 0.5;
    cfg.n_steps = int(std::lround(18.0 / cfg.resolved_dt()));
    return reflection_coefficient(cfg, make_reference_config(cfg, 4));
  };
  const double r4 = reflect(4);
  const double r8 = reflect(8);
  const double r16 = reflect(16);
  CHECK(r8 < r4);
  CHECK(r16 < r8);
}

TEST_CASE("reflection window validation") {
  SimConfig cfg;
  cfg.grid.n_cells = 400;
  cfg.grid.dx = 0.025;
  cfg.source.type = SourceSpec::Type::GaussianSine;
  cfg.source.position = 0.5;
  cfg.n_steps = int(std::lround(60.0 / cfg.resolved_dt()));  // too long
  CHECK_THROWS_AS(reflection_coefficient(cfg, make_reference_config(cfg, 4)),
                  WindowTooLong);
}

TEST_CASE("CFL violation is rejected up front") {
  SimConfig cfg = vacuum_cfg(64);
  cfg.dt = cfg.grid.dx * 2.0;
  CHECK_THROWS_AS(Simulator{cfg}, CflViolation);
}

TEST_CASE("non-finite states abort with context") {
  SimConfig cfg = vacuum_cfg(64);
  Simulator sim(cfg);
  FieldState bad = sim.state();
  bad.block("E")[10] = std::numeric_limits<double>::quiet_NaN();
  sim.set_state(bad);
  CHECK_THROWS_AS(sim.step(), NonFiniteField);
}

TEST_CASE("energy accessor: zero state has zero energy") {
  SimConfig cfg = vacuum_cfg(64);
  Simulator sim(cfg);
  const EnergyReport er = sim.energy();
  CHECK(er.field_physical == 0.0);
  CHECK(er.field_total == 0.0);
  CHECK(er.state_norm == 0.0);
}

TEST_CASE("discrete stability estimate against the block certificate") {
  SimConfig cfg;
  cfg.material.debye = {{1.0, 1.0}};
  cfg.grid.n_cells = 192;
  cfg.grid.dx = 0.05;
  cfg.n_steps = 600;
  cfg.record_stride = cfg.n_steps;

  const double nu = 1.0;
  const BlockSystem sys = assemble(SystemVariant::Dispersion, cfg.material, {});
  const double gamma = certify_block(sys, nu).gamma;
  REQUIRE(gamma > 0.0);
  const double dt = cfg.resolved_dt();

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> amp(0.2, 2.0), om(1.0, 8.0), w(0.2, 1.0),
      onset(0.5, 3.0), posd(0.2, 0.8);
  for (int trial = 0; trial < 3; ++trial) {
    const double A = amp(rng), W = om(rng), wd = w(rng), t0 = onset(rng);
    const int node = int(posd(rng) * cfg.grid.n_cells);
    const SourceFn src = [&](int i, double t) {
      if (i != node || t <= 0.0) return 0.0;
      const double arg = (t - 4.0 * wd - t0) / wd;
      return A * std::exp(-arg * arg) * std::sin(W * t);
    };
    std::vector<std::vector<double>> full;
    run_custom(cfg, src, nullptr, &full);

    double u2 = 0.0, f2 = 0.0;
    for (std::size_t n = 0; n < full.size(); ++n) {
      double fr = 0.0;
      for (double v : full[n]) fr += v * v;
      u2 += fr * std::exp(-2.0 * nu * n * dt);
      const double th = (n + 0.5) * dt;
      const double sv = src(node, th);
      f2 += sv * sv * std::exp(-2.0 * nu * th);
    }
    const double un = std::sqrt(u2 * cfg.grid.dx * dt);
    const double fn = std::sqrt(f2 * cfg.grid.dx * dt);
    CAPTURE(trial);
    CHECK(un <= (1.0 / gamma) * (1.0 + 5.0 * dt) * fn);
  }
}
