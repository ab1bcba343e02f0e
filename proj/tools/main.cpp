// dispml: certify, assemble, simulate, and fixed-point solve the dispersive
// first-order systems from material/stretch configs.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dispml/config.hpp"
#include "dispml/toml_lite.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMismatch = 3;

struct CommonArgs {
  std::string config;
  std::string scenario;
  std::string out_dir = "out";
  std::string configs_dir;
  std::uint64_t seed = 12345;
  std::string expect;
  bool paper_literal_s3 = false;
};

fs::path find_configs_dir(const std::string& hint, const char* argv0) {
  if (!hint.empty()) return hint;
  std::vector<fs::path> candidates = {"configs", "../configs"};
  std::error_code ec;
  fs::path exe = fs::canonical(argv0, ec);
  if (!ec) {
    candidates.push_back(exe.parent_path() / "configs");
    candidates.push_back(exe.parent_path().parent_path() / "configs");
    candidates.push_back(exe.parent_path().parent_path().parent_path() / "configs");
  }
  for (const auto& c : candidates)
    if (fs::is_directory(c)) return c;
  return "configs";
}

nlohmann::json load_command_config(const CommonArgs& args, const std::string& command,
                                   const char* argv0) {
  if (!args.config.empty()) return dispml::load_config_file(args.config);
  if (args.scenario.empty())
    throw dispml::ConfigError("provide --config PATH or --scenario NAME");
  const fs::path dir = find_configs_dir(args.configs_dir, argv0);
  const fs::path path = dir / command / (args.scenario + ".toml");
  if (!fs::exists(path))
    throw dispml::ConfigError("no scenario file " + path.string());
  return dispml::load_config_file(path.string());
}

void write_file(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  if (!body.empty() && body.back() != '\n') out << "\n";
}

void write_manifest(const CommonArgs& args, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["config"] = args.config.empty() ? ("scenario:" + args.scenario) : args.config;
  j["out_dir"] = args.out_dir;
  j["seed"] = args.seed;
  j["tool_version"] = kToolVersion;
  const auto now = std::chrono::system_clock::now();
  j["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  write_file(fs::path(args.out_dir) / "manifest.json", j.dump(2));
}

std::string series_csv(const std::vector<dispml::TimeSeries>& series) {
  std::ostringstream os;
  os.precision(17);
  os << "time";
  for (const auto& s : series) os << "," << s.name;
  os << "\n";
  if (series.empty()) return os.str();
  for (std::size_t i = 0; i < series[0].times.size(); ++i) {
    os << series[0].times[i];
    for (const auto& s : series) os << "," << s.values[i];
    os << "\n";
  }
  return os.str();
}

int cmd_certify(const CommonArgs& args, const char* argv0) {
  const auto j = load_command_config(args, "certify", argv0);
  const dispml::CertifyScenario sc = dispml::certify_scenario_from_json(j);
  write_manifest(args, "certify");

  const dispml::Certificate cert =
      dispml::find_nu0_stability(sc.law, sc.grid, sc.nu_lo, sc.nu_hi);
  write_file(fs::path(args.out_dir) / "certificate.json",
             dispml::certificate_to_json(cert, sc.grid));

  if (sc.run_m2m3) {
    const dispml::M2M3Report rep =
        dispml::check_m2m3(sc.law.params, sc.grid.origin_ball_delta);
    write_file(fs::path(args.out_dir) / "m2m3.json", dispml::m2m3_to_json(rep));
  }

  const bool stable = cert.verdict == dispml::Verdict::Accretive;
  std::cout << (args.scenario.empty() ? "custom" : args.scenario) << ": "
            << to_string(cert.verdict) << " (nu0 = " << cert.nu0
            << ", gamma = " << cert.gamma << ", component = "
            << to_string(sc.law.component) << ")\n";

  if (!args.expect.empty()) {
    const bool want_stable = args.expect == "stable";
    if (stable != want_stable) {
      std::cerr << "expectation mismatch: wanted " << args.expect << "\n";
      return kExitMismatch;
    }
  }
  return kExitOk;
}

int cmd_assemble(const CommonArgs& args, const char* argv0) {
  const auto j = load_command_config(args, "assemble", argv0);
  const dispml::AssembleConfig ac = dispml::assemble_config_from_json(j);
  write_manifest(args, "assemble");

  dispml::AssembleOptions opt;
  opt.literal_s3 = args.paper_literal_s3;
  const dispml::BlockSystem sys = dispml::assemble(ac.variant, ac.material, ac.stretch, opt);
  write_file(fs::path(args.out_dir) / "blocksystem.json",
             dispml::blocksystem_to_json(sys));

  const dispml::TfEquivalenceReport rep = dispml::tf_equivalence_check(
      sys, ac.material, ac.stretch, ac.samples, args.seed, ac.tolerance);

  ordered_json rj;
  rj["pass"] = rep.pass;
  rj["max_rel_err_electric"] = rep.max_rel_err_electric;
  rj["max_rel_err_magnetic"] = rep.max_rel_err_magnetic;
  rj["worst_z_electric"] = {{"nu", rep.worst_z_electric.nu}, {"t", rep.worst_z_electric.t}};
  rj["worst_z_magnetic"] = {{"nu", rep.worst_z_magnetic.nu}, {"t", rep.worst_z_magnetic.t}};
  rj["samples"] = rep.samples;
  rj["seed"] = rep.seed;
  rj["tolerance"] = rep.tolerance;
  rj["failures"] = rep.failures;
  rj["literal_s3"] = args.paper_literal_s3;
  write_file(fs::path(args.out_dir) / "tf_report.json", rj.dump(2));

  std::cout << "assemble " << to_string(ac.variant) << ": "
            << (rep.pass ? "PASS" : "FAIL")
            << " (max rel err e = " << rep.max_rel_err_electric
            << ", m = " << rep.max_rel_err_magnetic << ")\n";
  return rep.pass ? kExitOk : kExitMismatch;
}

int cmd_simulate(const CommonArgs& args, const char* argv0) {
  const auto j = load_command_config(args, "simulate", argv0);
  dispml::SimConfig cfg = dispml::sim_config_from_json(j);
  const dispml::SimulateExtras extras = dispml::simulate_extras_from_json(j);
  write_manifest(args, "simulate");

  const dispml::RunResult result = dispml::run(cfg);
  write_file(fs::path(args.out_dir) / "timeseries.csv", series_csv(result.series));

  ordered_json summary;
  summary["variant"] = to_string(cfg.variant);
  summary["n_steps"] = cfg.n_steps;
  summary["dt"] = cfg.resolved_dt();
  const auto* ephys = result.find("energy_phys");
  const auto* etot = result.find("energy_total");
  summary["energy"] = {{"initial", etot->values.front()},
                       {"final", etot->values.back()},
                       {"final_physical", ephys->values.back()},
                       {"peak_physical", result.peak_field_energy}};

  if (extras.has_fit_window) {
    const auto* s = result.find(extras.fit_series);
    if (!s) throw dispml::ConfigError("no series named " + extras.fit_series);
    const dispml::DecayFit fit = dispml::fit_decay_rate(*s, extras.fit_lo, extras.fit_hi);
    summary["decay"] = {{"rate", fit.rate},
                        {"slope", fit.slope},
                        {"r_squared", fit.r_squared},
                        {"series", extras.fit_series}};
  } else {
    summary["decay"] = nullptr;
  }

  if (extras.reflection_reference_factor > 0) {
    const dispml::SimConfig ref =
        dispml::make_reference_config(cfg, extras.reflection_reference_factor);
    summary["reflection_db"] = dispml::reflection_coefficient(cfg, ref);
  } else {
    summary["reflection_db"] = nullptr;
  }

  ordered_json probes = ordered_json::array();
  for (std::size_t k = 0; k < cfg.probe_positions.size(); ++k) {
    std::ostringstream name;
    name << "probe_" << k;
    const auto* s = result.find(name.str());
    double peak = 0.0;
    for (double v : s->values) peak = std::max(peak, std::abs(v));
    probes.push_back({{"name", name.str()},
                      {"position", cfg.probe_positions[k]},
                      {"max_abs", peak},
                      {"final", s->values.back()}});
  }
  summary["probes"] = probes;

  if (extras.snapshot_final) {
    std::ostringstream snap;
    snap.precision(17);
    const auto& st = result.final_state;
    snap << "x";
    for (const auto& name : st.block_names) snap << "," << name;
    snap << "\n";
    // H-chain blocks sit at half nodes; their last row stays empty
    for (int i = 0; i <= cfg.grid.n_cells; ++i) {
      snap << i * cfg.grid.dx;
      for (std::size_t b = 0; b < st.data.size(); ++b) {
        snap << ",";
        if (st.block_on_e_nodes[b])
          snap << st.data[b][i];
        else if (i < cfg.grid.n_cells)
          snap << st.data[b][i];
      }
      snap << "\n";
    }
    write_file(fs::path(args.out_dir) / "snapshot.csv", snap.str());
  }

  write_file(fs::path(args.out_dir) / "summary.json", summary.dump(2));
  std::cout << "simulate " << to_string(cfg.variant) << ": " << cfg.n_steps
            << " steps, final energy " << etot->values.back();
  if (extras.has_fit_window)
    std::cout << ", decay rate " << summary["decay"]["rate"].get<double>();
  if (extras.reflection_reference_factor > 0)
    std::cout << ", reflection " << summary["reflection_db"].get<double>() << " dB";
  std::cout << "\n";
  return kExitOk;
}

int cmd_fixedpoint(const CommonArgs& args, const char* argv0) {
  const auto j = load_command_config(args, "fixedpoint", argv0);
  const dispml::FixedPointConfig fc = dispml::fixedpoint_config_from_json(j);
  write_manifest(args, "fixedpoint");

  dispml::PicardOptions opt = fc.picard;
  opt.throw_on_max_iter = false;
  const dispml::PicardResult res = dispml::picard_solve(fc.sim, fc.nl, opt);
  const double residual = dispml::picard_residual(fc.sim, fc.nl, res, opt.nu);

  std::ostringstream log;
  log.precision(17);
  log << "iter,diff_norm,ratio\n";
  for (const auto& it : res.log)
    log << it.iter << "," << it.diff_norm << "," << it.ratio << "\n";
  write_file(fs::path(args.out_dir) / "iterations.csv", log.str());

  std::ostringstream snap;
  snap.precision(17);
  snap << "x,E\n";
  const auto& last = res.e_signal.frames.back();
  for (std::size_t i = 0; i < last.size(); ++i)
    snap << i * fc.sim.grid.dx << "," << last[i] << "\n";
  write_file(fs::path(args.out_dir) / "solution_e.csv", snap.str());

  ordered_json summary;
  summary["converged"] = res.converged;
  summary["iterations"] = res.iterations;
  summary["final_diff"] = res.final_diff;
  summary["residual"] = residual;
  summary["nu"] = opt.nu;
  summary["predicted_ratio"] = res.predicted_ratio;
  summary["lipschitz_estimate"] = res.lipschitz_estimate;
  summary["contraction_predicted"] = res.contraction_predicted;
  write_file(fs::path(args.out_dir) / "summary.json", summary.dump(2));

  std::cout << "fixedpoint: " << (res.converged ? "converged" : "NOT converged")
            << " in " << res.iterations << " iterations, final diff "
            << res.final_diff << ", residual " << residual << "\n";
  if (!res.contraction_predicted)
    std::cout << "warning: predicted ratio " << res.predicted_ratio << " >= 1\n";
  return res.converged ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order dispersive wave systems: certificates, block "
               "assembly, 1D runs, fixed points"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool with_expect, bool with_s3) {
    sub->add_option("--config", args.config, "config file (TOML or JSON)");
    sub->add_option("--scenario", args.scenario, "named scenario from the configs dir");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--configs-dir", args.configs_dir, "scenario config root");
    sub->add_option("--seed", args.seed, "seed for random sampling");
    if (with_expect)
      sub->add_option("--expect", args.expect, "stable|unstable")
          ->check(CLI::IsMember({"stable", "unstable"}));
    if (with_s3)
      sub->add_flag("--paper-literal-s3", args.paper_literal_s3,
                    "assemble the S3 row with the published empty-sum coupling");
  };

  CLI::App* certify = app.add_subcommand("certify", "half-plane accretivity certificates");
  add_common(certify, true, false);
  CLI::App* assemble = app.add_subcommand("assemble", "block matrices + transfer check");
  add_common(assemble, false, true);
  CLI::App* simulate = app.add_subcommand("simulate", "1D staggered-grid run");
  add_common(simulate, false, false);
  CLI::App* fixedpoint = app.add_subcommand("fixedpoint", "Picard iteration driver");
  add_common(fixedpoint, false, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(certify)) return cmd_certify(args, argv[0]);
    if (app.got_subcommand(assemble)) return cmd_assemble(args, argv[0]);
    if (app.got_subcommand(simulate)) return cmd_simulate(args, argv[0]);
    if (app.got_subcommand(fixedpoint)) return cmd_fixedpoint(args, argv[0]);
  } catch (const dispml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
