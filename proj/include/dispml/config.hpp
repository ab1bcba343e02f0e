#ifndef DISPML_CONFIG_HPP
#define DISPML_CONFIG_HPP

#include <string>

#include "dispml/certify.hpp"
#include "dispml/nlsolve.hpp"
#include "dispml/tdsim.hpp"
#include "json.hpp"

namespace dispml {

// Shared material / stretch schema (used by every config family).
DispersionParams material_from_json(const nlohmann::json& j);
nlohmann::json material_to_json(const DispersionParams& p);
PmlStretch stretch_from_json(const nlohmann::json& j);
nlohmann::json stretch_to_json(const PmlStretch& s);

struct CertifyScenario {
  ScalarLaw law;
  double nu_lo = 0.0;
  double nu_hi = 8.0;
  HalfPlaneGrid grid;
  bool run_m2m3 = false;
};

/// [certify] + [material] + [stretch] (+ optional [grid]) sections.
CertifyScenario certify_scenario_from_json(const nlohmann::json& j);

struct AssembleConfig {
  SystemVariant variant = SystemVariant::Dispersion;
  DispersionParams material;
  PmlStretch stretch;
  int samples = 100;
  double tolerance = 1e-9;
};

AssembleConfig assemble_config_from_json(const nlohmann::json& j);

/// [simulate] + [material] + [grid1d] (+ [pml], [source], [probes]).
SimConfig sim_config_from_json(const nlohmann::json& j);

struct SimulateExtras {
  bool has_fit_window = false;
  double fit_lo = 0.0, fit_hi = 0.0;
  std::string fit_series = "energy_total";
  int reflection_reference_factor = 0;  // 0 = no reflection measurement
  bool snapshot_final = false;          // write the final fields as CSV
};

SimulateExtras simulate_extras_from_json(const nlohmann::json& j);

struct FixedPointConfig {
  SimConfig sim;
  NonlinearPolarization nl;
  PicardOptions picard;
};

/// [fixedpoint] + [nonlinearity] + the simulate sections. Instantaneous
/// (zero-delay) nonlinearities are rejected here: they demand more solution
/// regularity than this discretization provides.
FixedPointConfig fixedpoint_config_from_json(const nlohmann::json& j);

/// Kernels from CSV: rows "tau,value" (one-argument) or "tau1,tau2,value"
/// (two-argument, on a complete dt-grid).
SampledKernel kernel_from_csv(const std::string& path);
SampledKernel2 kernel2_from_csv(const std::string& path);

}  // namespace dispml

#endif
