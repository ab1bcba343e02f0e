#ifndef DISPML_NLSOLVE_HPP
#define DISPML_NLSOLVE_HPP

#include <optional>
#include <string>
#include <vector>

#include "dispml/tdsim.hpp"
#include "dispml/types.hpp"

namespace dispml {

/// Causal discrete signal on [0, n*dt] with the exponentially weighted norm
///   ||u||_nu^2 = sum_n ||u_n||_H^2 exp(-2 nu t_n) dt,
/// where ||.||_H is the dx-weighted Euclidean norm of one frame.
struct WeightedSignal {
  double dt = 1e-3;
  double nu = 0.0;
  double dx = 1.0;
  std::vector<std::vector<double>> frames;

  std::size_t steps() const { return frames.size(); }
  double t_end() const { return frames.empty() ? 0.0 : (frames.size() - 1) * dt; }
};

double weighted_norm(const WeightedSignal& u);
/// ||a - b||_nu with a's weight; frame shapes must match.
double weighted_distance(const WeightedSignal& a, const WeightedSignal& b);

/// Causal kernel sampled at multiples of dt: values[j] = K(j*dt).
struct SampledKernel {
  double dt = 1e-3;
  std::vector<double> values;
};

/// Two-argument kernel sampled on a dt-grid: values[j1][j2] = K(j1*dt, j2*dt).
/// Polarization kernels keep the instantaneous edge (j1 = 0 or j2 = 0) at
/// zero so that the response carries a strictly positive delay.
struct SampledKernel2 {
  double dt = 1e-3;
  std::vector<std::vector<double>> values;
};

SampledKernel make_delta_kernel(double dt);
SampledKernel make_exp_kernel(double dt, double theta, double t_max);
SampledKernel2 make_box_kernel2(double dt, double t_max, double value = 1.0);
SampledKernel2 make_separable_exp_kernel2(double dt, double theta, double t_max,
                                          bool zero_instantaneous = true);

enum class NonlinKind { SaturableConvolved, QuadraticNonlocal };

struct NonlinearPolarization {
  NonlinKind kind = NonlinKind::SaturableConvolved;
  int k = 3;          // power of the saturable envelope
  double tau = 1.0;   // saturation constant
  SampledKernel kernel;
  SampledKernel2 kernel2;
  std::optional<double> cutoff_T;
};

/// Saturable envelope map q(u) = |u|^{k-1} u / (1 + tau |u|^{k-1}):
/// smooth, asymptotically linear, q(0) = 0, |q(u)| <= min(|u|^k, |u|/tau).
double saturable_q_scalar(double u, int k, double tau);
std::vector<double> saturable_q(const std::vector<double>& u, int k, double tau);

/// Numeric estimate of sup |d/ds (V(s) s)| by dense log-spaced sampling of
/// the closed-form derivative of the scalar envelope.
double saturable_lipschitz_bound(int k, double tau, double s_max = 1e8,
                                 int samples = 200000);

/// Discrete causal convolution (trapezoid in the kernel variable) of the
/// saturable image: out_n = sum_j w_j K_j q(e_{n-j}) dt.
/// Throws KernelResolutionMismatch when kernel.dt != e.dt.
WeightedSignal convolve_polarization(const WeightedSignal& e,
                                     const NonlinearPolarization& nl,
                                     Exec exec = Exec::Parallel);

/// Double causal convolution of the pointwise product against the sampled
/// two-argument kernel, multiplied by the temporal cutoff [t <= cutoff_T].
WeightedSignal quadratic_polarization(const WeightedSignal& e,
                                      const NonlinearPolarization& nl,
                                      double cutoff_T, Exec exec = Exec::Parallel);

struct KernelConstants {
  double L_K = 0.0;    // double integral of |K| with weight exp(-nu_K (tau1+tau2))
  double ell_K = 0.0;  // sup over offsets of the diagonal line integral
  double nu_K = 0.0;
};

/// 2D trapezoid quadrature of the kernel integrability constants at the
/// given weight.
KernelConstants kernel_constants(const NonlinearPolarization& nl, double nu_K,
                                 Exec exec = Exec::Parallel);

/// Weighted L1 mass of a one-argument kernel at weight nu (trapezoid).
double kernel_l1_mass(const SampledKernel& k, double nu);

struct PicardIteration {
  int iter = 0;
  double diff_norm = 0.0;
  double ratio = 0.0;
};

struct PicardResult {
  WeightedSignal solution;  // full-state frames
  WeightedSignal e_signal;  // E frames feeding the nonlinearity
  std::vector<PicardIteration> log;
  int iterations = 0;
  bool converged = false;
  double final_diff = 0.0;
  double predicted_ratio = 0.0;  // d * L / nu
  double lipschitz_estimate = 0.0;
  bool contraction_predicted = false;
};

struct PicardOptions {
  double nu = 2.0;
  int max_iter = 50;
  double tol = 1e-9;
  /// Slope bound d of the linear part (from a certificate); the linear
  /// solve then satisfies ||S||_nu <= d/nu.
  double slope_d = 1.0;
  /// Override for the nonlinearity Lipschitz estimate; 0 derives it from
  /// the envelope bound and the kernel mass.
  double lipschitz_override = 0.0;
  bool throw_on_max_iter = true;
};

/// Picard iteration u^{m+1} = S(g + f(u^m)), where S is one time-domain run
/// with the configured source g plus the polarization current from the
/// previous iterate. Stops when the successive weighted distance drops
/// below tol; throws NoContraction after 5 consecutive non-contracting
/// ratios and MaxIterReached past max_iter (unless disabled).
PicardResult picard_solve(const SimConfig& cfg, const NonlinearPolarization& nl,
                          const PicardOptions& opt);

/// Weighted distance between u and one more application of the Picard map
/// to u (a fixed point has a small residual).
double picard_residual(const SimConfig& cfg, const NonlinearPolarization& nl,
                       const PicardResult& result, double nu);

}  // namespace dispml

#endif
