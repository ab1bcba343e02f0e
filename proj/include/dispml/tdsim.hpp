#ifndef DISPML_TDSIM_HPP
#define DISPML_TDSIM_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dispml/blocksys.hpp"
#include "dispml/matlaw.hpp"
#include "dispml/types.hpp"

namespace dispml {

/// Graded absorbing layer on one side of the 1D domain. sigma follows a
/// polynomial profile sigma_max * (depth/thickness)^m that vanishes at the
/// interface to the physical region; alpha either stays constant or decays
/// linearly to zero at the outer wall. auto_sigma_max picks sigma_max for a
/// -80 dB theoretical normal-incidence round trip through the layer.
struct PmlProfile {
  StretchKind kind = StretchKind::None;
  int thickness = 0;
  double sigma_max = 0.0;
  bool auto_sigma_max = false;
  double alpha_max = 0.0;
  int grading_exponent = 3;
  enum class AlphaGrading { Constant, LinearDecay };
  AlphaGrading alpha_grading = AlphaGrading::LinearDecay;

  double effective_sigma_max(double layer_len) const;
};

/// Staggered 1D grid: n_cells + 1 electric nodes at integer points (the two
/// endpoints are pinned to zero), n_cells magnetic nodes at half points.
/// When `uniform_sigma` is set the graded profiles are ignored and every
/// node carries that loss rate (a uniformly conductive medium).
struct Grid1D {
  int n_cells = 256;
  double dx = 0.02;
  PmlProfile pml_left, pml_right;
  std::optional<double> uniform_sigma;
  std::optional<double> uniform_alpha;

  double length() const { return n_cells * dx; }
  /// E-node index range [lo, hi] of the physical (non-PML) region.
  int phys_lo() const { return pml_left.thickness; }
  int phys_hi() const { return n_cells - pml_right.thickness; }

  double sigma_at(double x) const;
  double alpha_at(double x) const;
};

/// Additive current on the E row: Gaussian-modulated sinusoid, zero for
/// t <= 0 by construction (the envelope is windowed at its onset).
struct SourceSpec {
  enum class Type { None, GaussianSine };
  Type type = Type::None;
  double amplitude = 1.0;
  double omega0 = 6.0;
  double width = 0.5;
  double t0 = 0.0;  // 0 requests t0 = 4 * width
  double position = 0.5;
  double spatial_width = 0.0;  // in units of dx; 0 = single node

  double center_time() const { return t0 > 0.0 ? t0 : 4.0 * width; }
  double time_factor(double t) const;
};

struct SimConfig {
  SystemVariant variant = SystemVariant::Dispersion;
  DispersionParams material;
  Grid1D grid;
  double dt = 0.0;  // 0 requests cfl_safety * dx * sqrt(min(eps_inf, 1))
  int n_steps = 1000;
  double cfl_safety = 0.9;
  SourceSpec source;
  int record_stride = 1;
  std::vector<double> probe_positions;  // fractions of the domain length
  Exec exec = Exec::Parallel;

  double resolved_dt() const;
  PmlStretch stretch_kind() const;
  /// Throws CflViolation / InvalidVariantParams on bad combinations.
  void validate() const;
};

/// One snapshot of every state block. E-chain blocks live on the n_cells+1
/// integer nodes at `time`; H-chain blocks live on the n_cells half nodes at
/// `time - dt/2`.
struct FieldState {
  double time = 0.0;
  std::vector<std::string> block_names;
  std::vector<char> block_on_e_nodes;
  std::vector<std::vector<double>> data;

  std::vector<double>& block(const std::string& name);
  const std::vector<double>& block(const std::string& name) const;
};

struct TimeSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
};

struct EnergyReport {
  double field_physical = 0.0;  // (1/2) sum dx (eps_inf E^2 + mu H^2), physical region
  double field_total = 0.0;     // same over the whole domain
  double state_norm = 0.0;      // (1/2) <M0 U, U> dx over the whole domain
};

/// Per-node current injected on the E row, evaluated at half steps.
using SourceFn = std::function<double(int node, double t_half)>;

/// Marches the assembled first-order system: leapfrog staggering between the
/// two field chains, trapezoidal rule for the per-node auxiliary blocks with
/// the cell's (sigma, alpha) baked into the update matrices.
class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  void step();
  void step_with_source(const SourceFn& src);
  int steps_taken() const;
  double time() const;
  double dt() const;
  const FieldState& state() const;
  void set_state(const FieldState& s);
  EnergyReport energy() const;
  const BlockSystem& system() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RunResult {
  FieldState final_state;
  std::vector<TimeSeries> series;
  double peak_field_energy = 0.0;
  const TimeSeries* find(const std::string& name) const;
};

/// Advance one state by one step (convenience wrapper over Simulator).
FieldState step(const FieldState& state, const SimConfig& cfg);

/// Full run with the configured source; records energies and probes every
/// record_stride steps. Deterministic for a fixed config.
RunResult run(const SimConfig& cfg);

/// Run with an explicit source term added on top of the configured one,
/// optionally recording per-step E-field frames and full-state frames for
/// the fixed-point driver (frame n holds the state at t = n*dt).
RunResult run_custom(const SimConfig& cfg, const SourceFn& src,
                     std::vector<std::vector<double>>* e_frames = nullptr,
                     std::vector<std::vector<double>>* full_frames = nullptr);

EnergyReport energy(const FieldState& state, const SimConfig& cfg);

struct DecayFit {
  double rate = 0.0;  // field-amplitude convention: minus half the log-energy slope
  double r_squared = 0.0;
  double slope = 0.0;
};

/// Least-squares slope of log(values) over times in [t_lo, t_hi]. Throws
/// NonPositiveValues when the window contains values <= 0.
DecayFit fit_decay_rate(const TimeSeries& series, double t_lo, double t_hi);

/// Reference configuration for reflection measurements: the same physical
/// region embedded centrally in a `factor` times larger vacuum-padded domain
/// with no absorbing layers.
SimConfig make_reference_config(const SimConfig& cfg, int factor = 4);

/// Reflection quality of the small domain's layers versus the enlarged
/// reference: max |E_small - E_ref| at a probe 10 cells inside the physical
/// region, normalized by the reference peak, in dB (negative is better).
/// Throws WindowTooLong when boundary returns would contaminate the
/// reference within the simulated window.
double reflection_coefficient(const SimConfig& cfg_small, const SimConfig& cfg_reference);

}  // namespace dispml

#endif
