// Serial vs OpenMP timings for the three data-parallel kernels: half-plane
// scans, 1D stepping, and kernel quadratures.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "dispml/certify.hpp"
#include "dispml/nlsolve.hpp"
#include "dispml/tdsim.hpp"

using namespace dispml;

namespace {

template <typename F>
double time_ms(F&& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    ScalarLaw law;
    law.params.debye = {{1.0, 1.0}};
    law.params.lorentz = {{0.5, 0.0, 2.0, 0.2}};
    law.stretch = {StretchKind::CFS, 1.0, 1.0};
    HalfPlaneGrid grid = HalfPlaneGrid::defaults(law);
    grid.t_count = 16384;
    double sink = 0.0;
    const double s = time_ms([&] { sink += scan_halfplane(law, -0.01, grid, Exec::Serial).inf; });
    const double p = time_ms([&] { sink += scan_halfplane(law, -0.01, grid, Exec::Parallel).inf; });
    report("halfplane scan", s, p);
    if (sink == 12345.0) std::printf("?\n");
  }

  {
    SimConfig cfg;
    cfg.variant = SystemVariant::DispersionCfs;
    cfg.material.debye = {{1.0, 1.0}};
    cfg.material.lorentz = {{0.5, 0.0, 2.0, 0.2}};
    cfg.grid.n_cells = 20000;
    cfg.grid.dx = 0.01;
    cfg.grid.pml_left = {StretchKind::CFS, 24, 0.0, true, 0.05, 3,
                         PmlProfile::AlphaGrading::LinearDecay};
    cfg.grid.pml_right = cfg.grid.pml_left;
    cfg.n_steps = 400;
    cfg.record_stride = cfg.n_steps;
    cfg.source.type = SourceSpec::Type::GaussianSine;
    const double s = time_ms([&] {
      SimConfig c = cfg;
      c.exec = Exec::Serial;
      run(c);
    }, 2);
    const double p = time_ms([&] {
      SimConfig c = cfg;
      c.exec = Exec::Parallel;
      run(c);
    }, 2);
    report("1d stepper", s, p);
  }

  {
    NonlinearPolarization nl;
    nl.kind = NonlinKind::QuadraticNonlocal;
    nl.kernel2 = make_separable_exp_kernel2(5e-4, 0.5, 2.0);
    const double s = time_ms([&] { kernel_constants(nl, 1.0, Exec::Serial); });
    const double p = time_ms([&] { kernel_constants(nl, 1.0, Exec::Parallel); });
    report("kernel quadrature", s, p);
  }

  return 0;
}
