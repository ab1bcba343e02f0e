#include "dispml/nlsolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dispml {

double weighted_norm(const WeightedSignal& u) {
  double acc = 0.0;
  for (std::size_t n = 0; n < u.frames.size(); ++n) {
    double frame = 0.0;
    for (double v : u.frames[n]) frame += v * v;
    acc += frame * u.dx * std::exp(-2.0 * u.nu * n * u.dt);
  }
  return std::sqrt(acc * u.dt);
}

double weighted_distance(const WeightedSignal& a, const WeightedSignal& b) {
  if (a.frames.size() != b.frames.size())
    throw std::invalid_argument("signals have different lengths");
  double acc = 0.0;
  for (std::size_t n = 0; n < a.frames.size(); ++n) {
    if (a.frames[n].size() != b.frames[n].size())
      throw std::invalid_argument("signal frames have different shapes");
    double frame = 0.0;
    for (std::size_t i = 0; i < a.frames[n].size(); ++i) {
      const double d = a.frames[n][i] - b.frames[n][i];
      frame += d * d;
    }
    acc += frame * a.dx * std::exp(-2.0 * a.nu * n * a.dt);
  }
  return std::sqrt(acc * a.dt);
}

SampledKernel make_delta_kernel(double dt) { return {dt, {1.0 / dt}}; }

SampledKernel make_exp_kernel(double dt, double theta, double t_max) {
  SampledKernel k;
  k.dt = dt;
  const int n = int(std::ceil(t_max / dt));
  k.values.resize(n + 1);
  for (int j = 0; j <= n; ++j) k.values[j] = std::exp(-j * dt / theta) / theta;
  return k;
}

SampledKernel2 make_box_kernel2(double dt, double t_max, double value) {
  SampledKernel2 k;
  k.dt = dt;
  const int n = int(std::ceil(t_max / dt));
  k.values.assign(n + 1, std::vector<double>(n + 1, value));
  return k;
}

SampledKernel2 make_separable_exp_kernel2(double dt, double theta, double t_max,
                                          bool zero_instantaneous) {
  SampledKernel2 k;
  k.dt = dt;
  const int n = int(std::ceil(t_max / dt));
  k.values.assign(n + 1, std::vector<double>(n + 1, 0.0));
  for (int j1 = 0; j1 <= n; ++j1)
    for (int j2 = 0; j2 <= n; ++j2)
      k.values[j1][j2] = std::exp(-(j1 + j2) * dt / theta);
  if (zero_instantaneous) {
    for (int j = 0; j <= n; ++j) {
      k.values[0][j] = 0.0;
      k.values[j][0] = 0.0;
    }
  }
  return k;
}

double saturable_q_scalar(double u, int k, double tau) {
  const double p = std::pow(std::abs(u), k - 1);
  return p / (1.0 + tau * p) * u;
}

std::vector<double> saturable_q(const std::vector<double>& u, int k, double tau) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = saturable_q_scalar(u[i], k, tau);
  return out;
}

double saturable_lipschitz_bound(int k, double tau, double s_max, int samples) {
  // d/ds [ s^k / (1 + tau s^{k-1}) ] = s^{k-1} (k + tau s^{k-1}) / (1 + tau s^{k-1})^2
  double best = 0.0;
  const double llo = std::log(1e-9), lhi = std::log(s_max);
  for (int i = 0; i < samples; ++i) {
    const double s = std::exp(llo + (lhi - llo) * i / double(samples - 1));
    const double p = std::pow(s, k - 1);
    const double den = 1.0 + tau * p;
    best = std::max(best, p * (k + tau * p) / (den * den));
  }
  // s -> infinity tail: slope approaches 1/tau
  return std::max(best, 1.0 / tau);
}

namespace {

void check_kernel_dt(double kdt, double edt) {
  if (std::abs(kdt - edt) > 1e-12 * std::max(kdt, edt)) {
    std::ostringstream os;
    os << "kernel sampled at dt = " << kdt << " but signal has dt = " << edt;
    throw KernelResolutionMismatch(os.str());
  }
}

double trap_w(std::size_t j, std::size_t m) {
  if (m == 0) return 1.0;
  return (j == 0 || j == m) ? 0.5 : 1.0;
}

}  // namespace

WeightedSignal convolve_polarization(const WeightedSignal& e,
                                     const NonlinearPolarization& nl, Exec exec) {
  check_kernel_dt(nl.kernel.dt, e.dt);
  const std::size_t nk = nl.kernel.values.size();
  WeightedSignal out = e;

  std::vector<std::vector<double>> qe(e.frames.size());
  for (std::size_t n = 0; n < e.frames.size(); ++n)
    qe[n] = saturable_q(e.frames[n], nl.k, nl.tau);

  const auto compute = [&](std::size_t n) {
    const std::size_t m = std::min(n, nk - 1);
    std::vector<double> acc(e.frames[n].size(), 0.0);
    for (std::size_t j = 0; j <= m; ++j) {
      const double w = trap_w(j, m) * nl.kernel.values[j] * e.dt;
      const auto& src = qe[n - j];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * src[i];
    }
    out.frames[n] = std::move(acc);
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < e.frames.size(); ++n) compute(n);
  } else {
    for (std::size_t n = 0; n < e.frames.size(); ++n) compute(n);
  }
  return out;
}

WeightedSignal quadratic_polarization(const WeightedSignal& e,
                                      const NonlinearPolarization& nl,
                                      double cutoff_T, Exec exec) {
  check_kernel_dt(nl.kernel2.dt, e.dt);
  if (nl.kernel2.values.empty())
    throw std::invalid_argument("quadratic polarization needs a sampled kernel2");
  const std::size_t nk = nl.kernel2.values.size();
  WeightedSignal out = e;

  const auto compute = [&](std::size_t n) {
    const double t = n * e.dt;
    const std::size_t ncell = e.frames[n].size();
    std::vector<double> acc(ncell, 0.0);
    if (t <= cutoff_T) {
      const std::size_t m1 = std::min(n, nk - 1);
      for (std::size_t j1 = 0; j1 <= m1; ++j1) {
        const double w1 = trap_w(j1, m1) * e.dt;
        const auto& e1 = e.frames[n - j1];
        const auto& row = nl.kernel2.values[j1];
        const std::size_t m2 = std::min(n, nk - 1);
        for (std::size_t j2 = 0; j2 <= m2; ++j2) {
          const double w = w1 * trap_w(j2, m2) * row[j2] * e.dt;
          if (w == 0.0) continue;
          const auto& e2 = e.frames[n - j2];
          for (std::size_t i = 0; i < ncell; ++i) acc[i] += w * e1[i] * e2[i];
        }
      }
    }
    out.frames[n] = std::move(acc);
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < e.frames.size(); ++n) compute(n);
  } else {
    for (std::size_t n = 0; n < e.frames.size(); ++n) compute(n);
  }
  return out;
}

KernelConstants kernel_constants(const NonlinearPolarization& nl, double nu_K,
                                 Exec exec) {
  if (nl.kernel2.values.empty())
    throw std::invalid_argument("kernel constants need a sampled kernel2");
  KernelConstants kc;
  kc.nu_K = nu_K;
  const std::size_t nk = nl.kernel2.values.size();
  const double dt = nl.kernel2.dt;

  double l_total = 0.0;
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) reduction(+ : l_total)
    for (std::size_t j1 = 0; j1 < nk; ++j1) {
      double row = 0.0;
      for (std::size_t j2 = 0; j2 < nk; ++j2)
        row += trap_w(j2, nk - 1) * std::abs(nl.kernel2.values[j1][j2]) *
               std::exp(-nu_K * (j1 + j2) * dt);
      l_total += trap_w(j1, nk - 1) * row;
    }
  } else {
    for (std::size_t j1 = 0; j1 < nk; ++j1) {
      double row = 0.0;
      for (std::size_t j2 = 0; j2 < nk; ++j2)
        row += trap_w(j2, nk - 1) * std::abs(nl.kernel2.values[j1][j2]) *
               std::exp(-nu_K * (j1 + j2) * dt);
      l_total += trap_w(j1, nk - 1) * row;
    }
  }
  kc.L_K = l_total * dt * dt;

  // sup over the sampled offsets of the diagonal line integral
  // int |K(u, u + d)| exp(-nu_K (2u + d)) du.
  double best = 0.0;
  for (std::ptrdiff_t d = -std::ptrdiff_t(nk) + 1; d < std::ptrdiff_t(nk); ++d) {
    const std::size_t lo1 = d >= 0 ? 0 : std::size_t(-d);
    const std::size_t hi1 = d >= 0 ? nk - 1 - d : nk - 1;
    if (hi1 < lo1) continue;
    const std::size_t m = hi1 - lo1;
    double acc = 0.0;
    for (std::size_t u = lo1; u <= hi1; ++u) {
      const std::size_t i1 = u;
      const std::size_t i2 = std::size_t(std::ptrdiff_t(u) + d);
      acc += trap_w(u - lo1, m) * std::abs(nl.kernel2.values[i1][i2]) *
             std::exp(-nu_K * (2.0 * u + d) * dt);
    }
    best = std::max(best, acc * dt);
  }
  kc.ell_K = best;
  return kc;
}

double kernel_l1_mass(const SampledKernel& k, double nu) {
  const std::size_t n = k.values.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    acc += trap_w(j, n - 1) * std::abs(k.values[j]) * std::exp(-nu * j * k.dt);
  return acc * k.dt;
}

namespace {

/// Nonlinearity image of the E history, as integer-step frames.
std::vector<std::vector<double>> apply_nonlinearity(
    const NonlinearPolarization& nl, const std::vector<std::vector<double>>& e_frames,
    double dt, double dx, Exec exec) {
  WeightedSignal e;
  e.dt = dt;
  e.dx = dx;
  e.nu = 0.0;
  e.frames = e_frames;
  if (nl.kind == NonlinKind::SaturableConvolved)
    return convolve_polarization(e, nl, exec).frames;
  const double cutoff = nl.cutoff_T.value_or(e.t_end());
  return quadratic_polarization(e, nl, cutoff, exec).frames;
}

/// The stepper samples sources at half steps; average the two neighboring
/// integer-step frames (strictly causal: frame n+1 is part of the input
/// history up to the output step it feeds).
double half_step_value(const std::vector<std::vector<double>>& frames, int node,
                       double t_half, double dt) {
  const int n = std::clamp(int(std::floor(t_half / dt)), 0, int(frames.size()) - 1);
  const int n1 = std::min<int>(n + 1, int(frames.size()) - 1);
  return 0.5 * (frames[n][node] + frames[n1][node]);
}

}  // namespace

PicardResult picard_solve(const SimConfig& cfg, const NonlinearPolarization& nl,
                          const PicardOptions& opt) {
  SimConfig run_cfg = cfg;
  run_cfg.record_stride = std::max(cfg.n_steps, 1);
  const double dt = run_cfg.resolved_dt();
  const double dx = run_cfg.grid.dx;

  PicardResult res;

  double lips = opt.lipschitz_override;
  if (lips <= 0.0 && nl.kind == NonlinKind::SaturableConvolved)
    lips = saturable_lipschitz_bound(nl.k, nl.tau) * kernel_l1_mass(nl.kernel, 0.0);
  res.lipschitz_estimate = lips;
  res.predicted_ratio = opt.slope_d * lips / opt.nu;
  res.contraction_predicted = lips > 0.0 && res.predicted_ratio < 1.0;

  auto make_signal = [&](std::vector<std::vector<double>>&& frames) {
    WeightedSignal s;
    s.dt = dt;
    s.nu = opt.nu;
    s.dx = dx;
    s.frames = std::move(frames);
    return s;
  };

  // u^0 = S(g): one run with the configured source alone.
  std::vector<std::vector<double>> e_prev, full_prev;
  run_custom(run_cfg, [](int, double) { return 0.0; }, &e_prev, &full_prev);
  WeightedSignal u_prev = make_signal(std::move(full_prev));

  double prev_diff = 0.0;
  int stall = 0;
  for (int m = 1; m <= opt.max_iter; ++m) {
    const std::vector<std::vector<double>> nlf =
        apply_nonlinearity(nl, e_prev, dt, dx, run_cfg.exec);
    const SourceFn src = [&](int node, double t_half) {
      return half_step_value(nlf, node, t_half, dt);
    };

    std::vector<std::vector<double>> ef, ff;
    run_custom(run_cfg, src, &ef, &ff);

    WeightedSignal u = make_signal(std::move(ff));
    const double diff = weighted_distance(u, u_prev);
    PicardIteration it;
    it.iter = m;
    it.diff_norm = diff;
    it.ratio = (m > 1 && prev_diff > 0.0) ? diff / prev_diff : 0.0;
    res.log.push_back(it);

    u_prev = std::move(u);
    e_prev = std::move(ef);
    res.iterations = m;
    res.final_diff = diff;

    if (diff <= opt.tol) {
      res.converged = true;
      break;
    }
    if (m > 1 && it.ratio >= 1.0) {
      if (++stall >= 5) throw NoContraction("5 consecutive non-contracting iterations");
    } else {
      stall = 0;
    }
    prev_diff = diff;
  }

  if (!res.converged && opt.throw_on_max_iter)
    throw MaxIterReached("fixed point did not converge within max_iter");

  res.solution = std::move(u_prev);
  res.e_signal = make_signal(std::move(e_prev));
  return res;
}

double picard_residual(const SimConfig& cfg, const NonlinearPolarization& nl,
                       const PicardResult& result, double nu) {
  SimConfig run_cfg = cfg;
  run_cfg.record_stride = std::max(cfg.n_steps, 1);
  const double dt = run_cfg.resolved_dt();
  const std::vector<std::vector<double>> nlf = apply_nonlinearity(
      nl, result.e_signal.frames, dt, run_cfg.grid.dx, run_cfg.exec);
  const SourceFn src = [&](int node, double t_half) {
    return half_step_value(nlf, node, t_half, dt);
  };
  std::vector<std::vector<double>> ef, ff;
  run_custom(run_cfg, src, &ef, &ff);
  WeightedSignal mapped;
  mapped.dt = dt;
  mapped.nu = nu;
  mapped.dx = run_cfg.grid.dx;
  mapped.frames = std::move(ff);
  WeightedSignal sol = result.solution;
  sol.nu = nu;
  return weighted_distance(mapped, sol);
}

}  // namespace dispml
