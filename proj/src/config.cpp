#include "dispml/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dispml {

namespace {

using nlohmann::json;

double num_or(const json& j, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

int int_or(const json& j, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  return j[key].get<int>();
}

bool bool_or(const json& j, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  return j[key].get<bool>();
}

std::string str_or(const json& j, const char* key, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  return j[key].get<std::string>();
}

StretchKind stretch_kind_from(const std::string& s) {
  if (s == "none") return StretchKind::None;
  if (s == "uniaxial") return StretchKind::Uniaxial;
  if (s == "cfs") return StretchKind::CFS;
  throw ConfigError("unknown stretch kind '" + s + "' (none|uniaxial|cfs)");
}

SystemVariant variant_from(const std::string& s) {
  if (s == "dispersion") return SystemVariant::Dispersion;
  if (s == "cfs-vacuum") return SystemVariant::CfsVacuum;
  if (s == "dispersion-cfs") return SystemVariant::DispersionCfs;
  if (s == "dispersion-upml") return SystemVariant::DispersionUpml;
  throw ConfigError("unknown variant '" + s + "'");
}

Component component_from(const std::string& s) {
  if (s == "both") return Component::Both;
  if (s == "electric") return Component::Electric;
  if (s == "magnetic") return Component::Magnetic;
  throw ConfigError("unknown component '" + s + "' (both|electric|magnetic)");
}

}  // namespace

DispersionParams material_from_json(const json& j) {
  DispersionParams p;
  p.eps_inf = num_or(j, "eps_inf", 1.0);
  p.sigma_bar = num_or(j, "sigma_bar", 0.0);
  p.mu = num_or(j, "mu", 1.0);
  if (j.contains("debye")) {
    for (const auto& d : j["debye"])
      p.debye.push_back({d.at("a").get<double>(), d.at("b").get<double>()});
  }
  if (j.contains("lorentz")) {
    for (const auto& l : j["lorentz"])
      p.lorentz.push_back({l.at("c").get<double>(), num_or(l, "d", 0.0),
                           l.at("e").get<double>(), num_or(l, "f", 0.0)});
  }
  if (j.contains("correction_r")) p.correction_r = j["correction_r"].get<double>();
  if (j.contains("correction_z0")) {
    p.correction_z0 = {num_or(j["correction_z0"], "nu", 0.0),
                       num_or(j["correction_z0"], "t", 0.0)};
  }
  p.validate();
  if (p.correction_r) {
    for (const auto& l : p.lorentz)
      if (l.d != 0.0)
        throw ConfigError("the analytic correction applies to branches with d = 0");
  }
  return p;
}

json material_to_json(const DispersionParams& p) {
  json j;
  j["eps_inf"] = p.eps_inf;
  j["sigma_bar"] = p.sigma_bar;
  j["mu"] = p.mu;
  j["debye"] = json::array();
  for (const auto& d : p.debye) j["debye"].push_back({{"a", d.a}, {"b", d.b}});
  j["lorentz"] = json::array();
  for (const auto& l : p.lorentz)
    j["lorentz"].push_back({{"c", l.c}, {"d", l.d}, {"e", l.e}, {"f", l.f}});
  if (p.correction_r) {
    j["correction_r"] = *p.correction_r;
    j["correction_z0"] = {{"nu", p.correction_z0.nu}, {"t", p.correction_z0.t}};
  }
  return j;
}

PmlStretch stretch_from_json(const json& j) {
  PmlStretch s;
  s.kind = stretch_kind_from(str_or(j, "kind", "none"));
  s.sigma = num_or(j, "sigma", 0.0);
  s.alpha = num_or(j, "alpha", 0.0);
  s.validate();
  return s;
}

json stretch_to_json(const PmlStretch& s) {
  const char* kind = s.kind == StretchKind::None
                         ? "none"
                         : s.kind == StretchKind::Uniaxial ? "uniaxial" : "cfs";
  return {{"kind", kind}, {"sigma", s.sigma}, {"alpha", s.alpha}};
}

CertifyScenario certify_scenario_from_json(const json& j) {
  CertifyScenario sc;
  if (j.contains("material")) sc.law.params = material_from_json(j["material"]);
  if (j.contains("stretch")) sc.law.stretch = stretch_from_json(j["stretch"]);
  const json c = j.contains("certify") ? j["certify"] : json::object();
  sc.law.component = component_from(str_or(c, "component", "both"));
  sc.nu_lo = num_or(c, "nu_lo", 0.0);
  sc.nu_hi = num_or(c, "nu_hi", 8.0);
  sc.run_m2m3 = bool_or(c, "run_m2m3", false);
  sc.grid = HalfPlaneGrid::defaults(sc.law);
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.contains("t_max")) sc.grid.t_max = g["t_max"].get<double>();
    sc.grid.t_count = int_or(g, "t_count", sc.grid.t_count);
    sc.grid.log_spaced = bool_or(g, "log_spaced", sc.grid.log_spaced);
    sc.grid.t_min = num_or(g, "t_min", sc.grid.t_min);
    sc.grid.origin_ball_delta = num_or(g, "origin_ball_delta", sc.grid.origin_ball_delta);
    if (g.contains("nu_values")) {
      sc.grid.nu_values.clear();
      for (const auto& v : g["nu_values"]) sc.grid.nu_values.push_back(v.get<double>());
    }
  }
  return sc;
}

AssembleConfig assemble_config_from_json(const json& j) {
  AssembleConfig a;
  const json c = j.contains("assemble") ? j["assemble"] : json::object();
  a.variant = variant_from(str_or(c, "variant", "dispersion"));
  a.samples = int_or(c, "samples", 100);
  a.tolerance = num_or(c, "tolerance", 1e-9);
  if (j.contains("material")) a.material = material_from_json(j["material"]);
  if (j.contains("stretch")) a.stretch = stretch_from_json(j["stretch"]);
  return a;
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  const json s = j.contains("simulate") ? j["simulate"] : json::object();
  cfg.variant = variant_from(str_or(s, "variant", "dispersion"));
  cfg.dt = num_or(s, "dt", 0.0);
  cfg.n_steps = int_or(s, "n_steps", 1000);
  cfg.cfl_safety = num_or(s, "cfl_safety", 0.9);
  cfg.record_stride = int_or(s, "record_stride", 1);
  if (j.contains("material")) cfg.material = material_from_json(j["material"]);

  const json g = j.contains("grid1d") ? j["grid1d"] : json::object();
  cfg.grid.n_cells = int_or(g, "n_cells", 256);
  cfg.grid.dx = num_or(g, "dx", 0.02);
  if (g.contains("uniform_sigma")) cfg.grid.uniform_sigma = g["uniform_sigma"].get<double>();
  if (g.contains("uniform_alpha")) cfg.grid.uniform_alpha = g["uniform_alpha"].get<double>();

  if (j.contains("pml")) {
    const json& pj = j["pml"];
    PmlProfile p;
    p.kind = stretch_kind_from(str_or(pj, "kind", "cfs"));
    p.thickness = int_or(pj, "thickness", 16);
    if (pj.contains("sigma_max") && pj["sigma_max"].is_string()) {
      if (pj["sigma_max"].get<std::string>() != "auto")
        throw ConfigError("sigma_max must be a number or \"auto\"");
      p.auto_sigma_max = true;
    } else {
      p.sigma_max = num_or(pj, "sigma_max", -1.0);
      if (p.sigma_max < 0.0) {
        p.sigma_max = 0.0;
        p.auto_sigma_max = true;
      }
    }
    p.alpha_max = num_or(pj, "alpha_max", 0.0);
    p.grading_exponent = int_or(pj, "grading_exponent", 3);
    p.alpha_grading = str_or(pj, "alpha_grading", "linear") == "constant"
                          ? PmlProfile::AlphaGrading::Constant
                          : PmlProfile::AlphaGrading::LinearDecay;
    cfg.grid.pml_left = p;
    cfg.grid.pml_right = p;
    if (bool_or(pj, "left_only", false)) cfg.grid.pml_right = PmlProfile{};
    if (bool_or(pj, "right_only", false)) cfg.grid.pml_left = PmlProfile{};
  }

  if (j.contains("source")) {
    const json& sj = j["source"];
    const std::string type = str_or(sj, "type", "gaussian-sine");
    if (type == "none") {
      cfg.source.type = SourceSpec::Type::None;
    } else if (type == "gaussian-sine") {
      cfg.source.type = SourceSpec::Type::GaussianSine;
      cfg.source.amplitude = num_or(sj, "amplitude", 1.0);
      cfg.source.omega0 = num_or(sj, "omega0", 6.0);
      cfg.source.width = num_or(sj, "width", 0.5);
      cfg.source.t0 = num_or(sj, "t0", 0.0);
      cfg.source.position = num_or(sj, "position", 0.5);
      cfg.source.spatial_width = num_or(sj, "spatial_width", 0.0);
    } else {
      throw ConfigError("unknown source type '" + type + "'");
    }
  }

  if (j.contains("probes")) {
    for (const auto& v : j["probes"].at("positions"))
      cfg.probe_positions.push_back(v.get<double>());
  }
  return cfg;
}

SimulateExtras simulate_extras_from_json(const json& j) {
  SimulateExtras ex;
  const json s = j.contains("simulate") ? j["simulate"] : json::object();
  if (s.contains("fit_window")) {
    ex.has_fit_window = true;
    ex.fit_lo = s["fit_window"][0].get<double>();
    ex.fit_hi = s["fit_window"][1].get<double>();
    ex.fit_series = str_or(s, "fit_series", "energy_total");
  }
  ex.reflection_reference_factor = int_or(s, "reflection_reference_factor", 0);
  ex.snapshot_final = bool_or(s, "snapshot_final", false);
  return ex;
}

namespace {

SampledKernel kernel_from_json(const json& j, double dt) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "delta") return make_delta_kernel(dt);
  if (type == "exp")
    return make_exp_kernel(dt, j.at("theta").get<double>(),
                           num_or(j, "t_max", 6.0 * j.at("theta").get<double>()));
  if (type == "csv") return kernel_from_csv(j.at("path").get<std::string>());
  if (type == "instantaneous")
    throw ConfigError(
        "instantaneous (zero-delay) nonlinear responses need more solution "
        "regularity than this solver provides; use a kernel with strictly "
        "positive delay (e.g. type = \"exp\")");
  throw ConfigError("unknown kernel type '" + type + "'");
}

SampledKernel2 kernel2_from_json(const json& j, double dt) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "box")
    return make_box_kernel2(dt, j.at("t_max").get<double>(), num_or(j, "value", 1.0));
  if (type == "separable-exp")
    return make_separable_exp_kernel2(dt, j.at("theta").get<double>(),
                                      num_or(j, "t_max", 6.0 * j.at("theta").get<double>()),
                                      bool_or(j, "zero_instantaneous", true));
  if (type == "csv") return kernel2_from_csv(j.at("path").get<std::string>());
  if (type == "instantaneous")
    throw ConfigError(
        "instantaneous (zero-delay) nonlinear responses need more solution "
        "regularity than this solver provides; keep the kernel support off "
        "the axes");
  throw ConfigError("unknown kernel2 type '" + type + "'");
}

}  // namespace

FixedPointConfig fixedpoint_config_from_json(const json& j) {
  FixedPointConfig fp;
  fp.sim = sim_config_from_json(j);
  const double dt = fp.sim.resolved_dt();

  const json n = j.contains("nonlinearity") ? j["nonlinearity"] : json::object();
  const std::string kind = str_or(n, "kind", "saturable");
  if (kind == "saturable") {
    fp.nl.kind = NonlinKind::SaturableConvolved;
    fp.nl.k = int_or(n, "k", 3);
    fp.nl.tau = num_or(n, "tau", 1.0);
    if (fp.nl.k < 2) throw ConfigError("saturable power k must be >= 2");
    if (!(fp.nl.tau > 0.0)) throw ConfigError("saturation tau must be > 0");
    fp.nl.kernel = n.contains("kernel") ? kernel_from_json(n["kernel"], dt)
                                        : make_exp_kernel(dt, 1.0, 6.0);
  } else if (kind == "quadratic") {
    fp.nl.kind = NonlinKind::QuadraticNonlocal;
    if (!n.contains("kernel2"))
      throw ConfigError("quadratic nonlinearity needs a kernel2 section");
    fp.nl.kernel2 = kernel2_from_json(n["kernel2"], dt);
    if (n.contains("cutoff_T")) fp.nl.cutoff_T = n["cutoff_T"].get<double>();
  } else if (kind == "instantaneous") {
    throw ConfigError(
        "instantaneous (zero-delay) nonlinearities are rejected: they need "
        "more solution regularity than this discretization provides; use a "
        "convolved kernel with strictly positive delay");
  } else {
    throw ConfigError("unknown nonlinearity kind '" + kind + "'");
  }

  const json p = j.contains("fixedpoint") ? j["fixedpoint"] : json::object();
  fp.picard.nu = num_or(p, "nu", 2.0);
  fp.picard.max_iter = int_or(p, "max_iter", 50);
  fp.picard.tol = num_or(p, "tol", 1e-9);
  fp.picard.slope_d = num_or(p, "slope_d", 1.0);
  fp.picard.lipschitz_override = num_or(p, "lipschitz_override", 0.0);
  return fp;
}

SampledKernel kernel_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel CSV: " + path);
  SampledKernel k;
  std::map<long long, double> rows;
  std::string line;
  double dt = 0.0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha((unsigned char)line[0])) continue;
    std::istringstream ls(line);
    double tau, value;
    char comma;
    if (!(ls >> tau >> comma >> value)) throw ConfigError("bad kernel CSV row: " + line);
    if (first && tau > 0.0) dt = tau;
    if (!first && dt == 0.0) dt = tau;
    rows[std::llround(tau * 1e12)] = value;
    first = false;
  }
  if (rows.size() < 2) throw ConfigError("kernel CSV needs at least 2 rows");
  auto it = rows.begin();
  const double t0 = it->first * 1e-12;
  ++it;
  k.dt = it->first * 1e-12 - t0;
  if (!(k.dt > 0.0)) throw ConfigError("kernel CSV taus must be increasing");
  for (const auto& [tt, v] : rows) {
    (void)tt;
    k.values.push_back(v);
  }
  return k;
}

SampledKernel2 kernel2_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel CSV: " + path);
  std::map<long long, std::map<long long, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha((unsigned char)line[0])) continue;
    std::istringstream ls(line);
    double t1, t2, value;
    char c1, c2;
    if (!(ls >> t1 >> c1 >> t2 >> c2 >> value))
      throw ConfigError("bad kernel2 CSV row: " + line);
    rows[std::llround(t1 * 1e12)][std::llround(t2 * 1e12)] = value;
  }
  if (rows.size() < 2) throw ConfigError("kernel2 CSV needs a 2D grid");
  SampledKernel2 k;
  auto it = rows.begin();
  const long long t0 = it->first;
  ++it;
  k.dt = (it->first - t0) * 1e-12;
  for (const auto& [t1, row] : rows) {
    (void)t1;
    std::vector<double> r;
    for (const auto& [t2, v] : row) {
      (void)t2;
      r.push_back(v);
    }
    k.values.push_back(std::move(r));
  }
  const std::size_t w = k.values.front().size();
  for (const auto& r : k.values)
    if (r.size() != w) throw ConfigError("kernel2 CSV grid is ragged");
  return k;
}

}  // namespace dispml
