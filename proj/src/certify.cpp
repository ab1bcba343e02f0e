#include "dispml/certify.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace dispml {

namespace {

constexpr double kBlowup = -1e300;

double sigma_eff(const PmlStretch& s) {
  return s.kind == StretchKind::None ? 0.0 : s.sigma;
}

/// lim_{t -> +-inf} of z chi(z) along a horizontal line (independent of nu).
double zchi_limit(const DispersionParams& p) {
  double rho = 0.0;
  for (const auto& d : p.debye) rho += d.a;
  for (const auto& l : p.lorentz) {
    rho += l.d;
    if (p.correction_r) rho += l.c / *p.correction_r;
  }
  return rho;
}

double asym_electric(const ScalarLaw& law, double nu) {
  return (nu + sigma_eff(law.stretch)) * law.params.eps_inf + law.params.sigma_bar +
         zchi_limit(law.params);
}

double asym_magnetic(const ScalarLaw& law, double nu) {
  return (nu + sigma_eff(law.stretch)) * law.params.mu;
}

double asym_value(const ScalarLaw& law, double nu) {
  switch (law.component) {
    case Component::Electric: return asym_electric(law, nu);
    case Component::Magnetic: return asym_magnetic(law, nu);
    case Component::Both:
      return std::min(asym_electric(law, nu), asym_magnetic(law, nu));
  }
  return 0.0;
}

/// Re of the selected components at z; evaluations that land on a pole
/// despite the pre-checks count as unbounded-below.
double eval_point(const ScalarLaw& law, double nu, double t) {
  try {
    const auto [e, m] = eval_zM(law.params, law.stretch, {nu, t});
    switch (law.component) {
      case Component::Electric: return e.real();
      case Component::Magnetic: return m.real();
      case Component::Both: return std::min(e.real(), m.real());
    }
  } catch (const PoleError&) {
    return kBlowup;
  } catch (const ZeroFrequencyError&) {
    return kBlowup;
  }
  return kBlowup;
}

struct RowBest {
  double value = std::numeric_limits<double>::infinity();
  std::size_t flat = std::numeric_limits<std::size_t>::max();
};

}  // namespace

const char* to_string(Component c) {
  switch (c) {
    case Component::Both: return "both";
    case Component::Electric: return "electric";
    case Component::Magnetic: return "magnetic";
  }
  return "?";
}

const char* to_string(Verdict v) {
  return v == Verdict::Accretive ? "accretive" : "not-accretive";
}

HalfPlaneGrid HalfPlaneGrid::defaults(const ScalarLaw& law) {
  HalfPlaneGrid g;
  const double prad = pole_radius(law.params, law.stretch);
  g.t_max = std::max(1e3, 10.0 * prad);
  const double nu_range = std::max(10.0, 2.0 * prad);
  g.nu_values.push_back(0.0);
  const int extra = 32;
  const double lo = std::log(1e-3), hi = std::log(nu_range);
  for (int i = 0; i < extra; ++i)
    g.nu_values.push_back(std::exp(lo + (hi - lo) * i / double(extra - 1)));
  return g;
}

std::vector<double> HalfPlaneGrid::t_samples() const {
  std::vector<double> ts;
  ts.reserve(2 * t_count + 1);
  ts.push_back(0.0);
  if (log_spaced) {
    const double llo = std::log(t_min), lhi = std::log(t_max);
    for (int i = 0; i < t_count; ++i) {
      const double t = std::exp(llo + (lhi - llo) * i / double(t_count - 1));
      ts.push_back(t);
      ts.push_back(-t);
    }
  } else {
    for (int i = 1; i <= t_count; ++i) {
      const double t = t_max * i / double(t_count);
      ts.push_back(t);
      ts.push_back(-t);
    }
  }
  return ts;
}

ScanResult scan_halfplane(const ScalarLaw& law, double nu_edge,
                          const HalfPlaneGrid& grid, Exec exec) {
  law.params.validate();
  law.stretch.validate();
  if (grid.nu_values.empty()) throw std::invalid_argument("empty nu grid");

  const bool ball = nu_edge < grid.origin_ball_delta;
  const double delta = grid.origin_ball_delta;

  for (const auto& pole : zM_poles(law.params, law.stretch)) {
    if (pole.nu > nu_edge && !(ball && std::hypot(pole.nu, pole.t) <= delta)) {
      std::ostringstream os;
      os << "pole at z = " << pole.nu << " + " << pole.t
         << "i lies inside Re z > " << nu_edge;
      throw PoleInRegion(os.str(), pole);
    }
  }

  const std::vector<double> ts = grid.t_samples();
  const std::size_t nnu = grid.nu_values.size();
  const std::size_t nt = ts.size();

  std::vector<RowBest> rows(nnu);
  const auto scan_row = [&](std::size_t inu) {
    const double nu = nu_edge + grid.nu_values[inu];
    RowBest best;
    for (std::size_t it = 0; it < nt; ++it) {
      const double t = ts[it];
      if (ball && std::hypot(nu, t) <= delta) continue;
      const double v = eval_point(law, nu, t);
      const std::size_t flat = inu * nt + it;
      if (v < best.value || (v == best.value && flat < best.flat)) {
        best.value = v;
        best.flat = flat;
      }
    }
    rows[inu] = best;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t inu = 0; inu < nnu; ++inu) scan_row(inu);
  } else {
    for (std::size_t inu = 0; inu < nnu; ++inu) scan_row(inu);
  }

  ScanResult res;
  RowBest best;
  for (const RowBest& rb : rows)
    if (rb.value < best.value || (rb.value == best.value && rb.flat < best.flat))
      best = rb;
  assert(best.flat != std::numeric_limits<std::size_t>::max());
  res.inf = best.value;
  res.argmin = {nu_edge + grid.nu_values[best.flat / nt], ts[best.flat % nt]};

  res.asym_min = std::numeric_limits<double>::infinity();
  for (double off : grid.nu_values) {
    const double v = asym_value(law, nu_edge + off);
    if (v < res.asym_min) {
      res.asym_min = v;
      res.asym_min_nu = nu_edge + off;
    }
  }
  res.asymptote_ok =
      res.asym_min >= res.inf - 1e-12 * std::max(1.0, std::abs(res.inf));
  return res;
}

namespace {

Counterexample far_field_witness(const ScalarLaw& law, double nu,
                                 const HalfPlaneGrid& grid, double bound) {
  double t = 100.0 * grid.t_max;
  Counterexample cx{{nu, t}, eval_point(law, nu, t)};
  while (cx.value >= bound && t < 1e15) {
    t *= 100.0;
    cx = {{nu, t}, eval_point(law, nu, t)};
  }
  return cx;
}

Counterexample probe_near_pole(const ScalarLaw& law, ComplexFreq pole,
                               double nu_edge, const HalfPlaneGrid& grid) {
  const double scale = std::max(1.0, std::hypot(pole.nu, pole.t));
  const bool ball = nu_edge < grid.origin_ball_delta;
  Counterexample best{pole, std::numeric_limits<double>::infinity()};
  for (double rfrac : {1e-3, 1e-2, 1e-1}) {
    const double r = rfrac * scale;
    for (int k = 0; k < 8; ++k) {
      const double ang = 2.0 * M_PI * k / 8.0;
      const double nu = pole.nu + r * std::cos(ang);
      const double t = pole.t + r * std::sin(ang);
      if (nu < nu_edge) continue;
      if (ball && std::hypot(nu, t) <= grid.origin_ball_delta) continue;
      const double v = eval_point(law, nu, t);
      if (v < best.value) best = {{nu, t}, v};
    }
  }
  return best;
}

}  // namespace

Certificate find_gamma(const ScalarLaw& law, double nu_edge,
                       const HalfPlaneGrid& grid, double tol_gamma, Exec exec) {
  Certificate cert;
  cert.tol_gamma = tol_gamma;
  cert.nu0 = -nu_edge;
  cert.origin_ball_delta =
      nu_edge < grid.origin_ball_delta ? grid.origin_ball_delta : 0.0;

  ScanResult sr;
  try {
    sr = scan_halfplane(law, nu_edge, grid, exec);
  } catch (const PoleInRegion& e) {
    cert.verdict = Verdict::NotAccretive;
    cert.gamma = 0.0;
    cert.counterexample = probe_near_pole(law, e.pole, nu_edge, grid);
    cert.note = e.what();
    return cert;
  }

  cert.asymptote_checked = sr.asymptote_ok;
  cert.gamma = std::max(0.0, std::min(sr.inf, sr.asym_min));
  if (cert.gamma > tol_gamma) {
    cert.verdict = Verdict::Accretive;
  } else {
    cert.verdict = Verdict::NotAccretive;
    if (sr.inf <= sr.asym_min)
      cert.counterexample = Counterexample{sr.argmin, sr.inf};
    else
      cert.counterexample = far_field_witness(law, sr.asym_min_nu, grid, tol_gamma);
  }
  return cert;
}

namespace {

std::optional<double> estimate_slope(const ScalarLaw& law, const HalfPlaneGrid& grid,
                                     Exec exec) {
  const std::vector<double> ts = grid.t_samples();
  const std::size_t nnu = grid.nu_values.size();
  std::vector<double> row_max(nnu, 0.0);
  std::vector<char> row_bad(nnu, 0);

  const auto scan_row = [&](std::size_t inu) {
    const double nu = grid.nu_values[inu];
    if (nu <= 0.0) return;
    double worst = 0.0;
    for (double t : ts) {
      const double v = eval_point(law, nu, t);
      if (v <= 0.0) {
        row_bad[inu] = 1;
        return;
      }
      worst = std::max(worst, nu / v);
    }
    const double asym = asym_value(law, nu);
    if (asym <= 0.0) {
      row_bad[inu] = 1;
      return;
    }
    row_max[inu] = std::max(worst, nu / asym);
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t inu = 0; inu < nnu; ++inu) scan_row(inu);
  } else {
    for (std::size_t inu = 0; inu < nnu; ++inu) scan_row(inu);
  }

  double d = 0.0;
  for (std::size_t i = 0; i < nnu; ++i) {
    if (row_bad[i]) return std::nullopt;
    d = std::max(d, row_max[i]);
  }
  // nu -> +inf limits of Re z / Re(zM): 1/eps_inf and 1/mu.
  if (law.component != Component::Magnetic) d = std::max(d, 1.0 / law.params.eps_inf);
  if (law.component != Component::Electric) d = std::max(d, 1.0 / law.params.mu);
  return d > 0.0 ? std::optional<double>(d) : std::nullopt;
}

}  // namespace

Certificate find_nu0_stability(const ScalarLaw& law, const HalfPlaneGrid& grid,
                               double nu_lo, double nu_hi, double bisect_tol,
                               Exec exec) {
  Certificate edge0 = find_gamma(law, 0.0, grid, 1e-8, exec);
  edge0.slope_d = estimate_slope(law, grid, exec);
  if (edge0.verdict == Verdict::NotAccretive) {
    edge0.nu0 = 0.0;
    edge0.note = edge0.note.empty() ? "not accretive at the imaginary-axis edge"
                                    : edge0.note;
    return edge0;
  }

  const auto accretive_at = [&](double nu0) {
    return find_gamma(law, -nu0, grid, 1e-8, exec).verdict == Verdict::Accretive;
  };

  double lo = std::max(nu_lo, 0.0);
  double hi = std::max(nu_hi, lo);
  if (lo > 0.0 && !accretive_at(lo)) lo = 0.0;
  if (accretive_at(hi)) {
    lo = hi;
  } else {
    while (hi - lo > bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      if (accretive_at(mid))
        lo = mid;
      else
        hi = mid;
    }
  }

  Certificate cert = find_gamma(law, -lo, grid, 1e-8, exec);
  cert.nu0 = lo;
  cert.slope_d = edge0.slope_d;
  if (cert.origin_ball_delta > 0.0)
    cert.note = "stability scan excludes the origin ball; the z*chi -> 0 limit "
                "covers the removed neighborhood";
  return cert;
}

Certificate certify_block(const BlockSystem& sys, double nu_edge, double tol_gamma) {
  if (!sys.M0.is_symmetric())
    throw M0NotSPD("M0 is not symmetric");
  const double m0_min = jacobi_min_eigenvalue(sys.M0);
  if (!(m0_min > 0.0))
    throw M0NotSPD("M0 has a nonpositive eigenvalue");

  Certificate cert;
  cert.tol_gamma = tol_gamma;
  cert.nu0 = -nu_edge;
  cert.asymptote_checked = true;  // finite-dimensional: no frequency tail
  cert.gamma = jacobi_min_eigenvalue(nu_edge * sys.M0 + sys.M1.symmetric_part());
  if (cert.gamma > tol_gamma) {
    cert.verdict = Verdict::Accretive;
  } else {
    cert.verdict = Verdict::NotAccretive;
    cert.counterexample = Counterexample{{nu_edge, 0.0}, cert.gamma};
  }
  cert.note = "block certificate: lambda_min(nu*M0 + sym(M1)) at the edge; "
              "monotone in nu since M0 is positive definite";
  return cert;
}

// ---------------------------------------------------------------------------
// Material-law stability clauses
// ---------------------------------------------------------------------------

namespace {

struct StripScan {
  double min = std::numeric_limits<double>::infinity();
  ComplexFreq witness;
};

/// Minimum of fn over a strip of horizontal lines, t on the grid ladder,
/// optionally excluding the origin ball.
template <typename F>
StripScan strip_min(const std::vector<double>& nus, const std::vector<double>& ts,
                    double ball_delta, F&& fn, Exec exec) {
  const std::size_t nnu = nus.size();
  std::vector<StripScan> rows(nnu);
  const auto scan_row = [&](std::size_t i) {
    StripScan best;
    for (double t : ts) {
      if (ball_delta > 0.0 && std::hypot(nus[i], t) <= ball_delta) continue;
      const double v = fn(nus[i], t);
      if (v < best.min) best = {v, {nus[i], t}};
    }
    rows[i] = best;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < nnu; ++i) scan_row(i);
  } else {
    for (std::size_t i = 0; i < nnu; ++i) scan_row(i);
  }
  StripScan best;
  for (const auto& r : rows)
    if (r.min < best.min) best = r;
  return best;
}

std::vector<double> ladder(double lo, double hi, int n) {
  std::vector<double> v;
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) v.push_back(std::exp(llo + (lhi - llo) * i / double(n - 1)));
  return v;
}

}  // namespace

const ClauseResult* M2M3Report::find(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

M2M3Report check_m2m3(const DispersionParams& p, double origin_ball_delta,
                      Exec exec) {
  p.validate();
  M2M3Report rep;
  const PmlStretch none{};
  const double prad = pole_radius(p, none);
  const double range = std::max(10.0, 2.0 * prad);
  const double t_hi = std::max(1e3, 10.0 * prad);

  std::vector<double> ts{0.0};
  for (double t : ladder(1e-6, t_hi, 1024)) {
    ts.push_back(t);
    ts.push_back(-t);
  }
  std::vector<double> pos_nus = ladder(1e-4, range, 24);

  const double rho = zchi_limit(p);
  const auto re_zeps = [&](double nu, double t) {
    try {
      const cplx z{nu, t};
      return (z * (p.eps_inf + eval_chi(p, {nu, t}))).real() + p.sigma_bar;
    } catch (const PoleError&) {
      return kBlowup;
    }
  };

  // Strict positivity off the origin ball on shrinking left strips.
  {
    ClauseResult cl;
    cl.name = "m2-strict";
    ClauseResult worst = cl;
    worst.value = std::numeric_limits<double>::infinity();
    for (double probe : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      std::vector<double> nus{-0.99 * probe, -0.5 * probe, -0.1 * probe, 0.0};
      nus.insert(nus.end(), pos_nus.begin(), pos_nus.end());
      StripScan sc = strip_min(nus, ts, origin_ball_delta, re_zeps, exec);
      double m = sc.min;
      ComplexFreq w = sc.witness;
      for (double nu : nus) {
        const double asym = nu * p.eps_inf + p.sigma_bar + rho;
        if (asym < m) {
          m = asym;
          w = {nu, std::numeric_limits<double>::infinity()};
        }
      }
      if (m < worst.value) {
        worst.value = m;
        worst.witness = w;
      }
      if (m >= 1e-8) {
        cl.pass = true;
        cl.value = m;
        cl.witness = w;
        std::ostringstream os;
        os << "Re(z eps) >= " << m << " on Re z > " << -probe
           << " outside |z| <= " << origin_ball_delta;
        cl.detail = os.str();
        break;
      }
    }
    if (!cl.pass) {
      cl.value = worst.value;
      cl.witness = worst.witness;
      cl.detail = "no probed left strip keeps Re(z eps) positive off the origin ball";
    }
    rep.clauses.push_back(cl);
  }

  // Right half-plane positivity.
  {
    ClauseResult cl;
    cl.name = "m2-prime";
    StripScan sc = strip_min(pos_nus, ts, 0.0, re_zeps, exec);
    double m = sc.min;
    cl.witness = sc.witness;
    for (double nu : pos_nus) m = std::min(m, nu * p.eps_inf + p.sigma_bar + rho);
    cl.value = m;
    cl.pass = m >= -1e-10;
    cl.detail = "min Re(z eps) over sampled Re z > 0";
    rep.clauses.push_back(cl);
  }

  // Conductive coercivity near the imaginary axis.
  {
    ClauseResult cl;
    cl.name = "accr-perm-strict";
    cl.applicable = p.sigma_bar > 0.0;
    if (cl.applicable) {
      double nu2 = 0.01;
      for (const auto& pole : zM_poles(p, none))
        if (pole.nu < 0.0) nu2 = std::min(nu2, 0.4 * std::abs(pole.nu));
      std::vector<double> nus{-nu2, -0.5 * nu2, 0.0, 0.5 * nu2, nu2};
      StripScan sc = strip_min(nus, ts, 0.0, re_zeps, exec);
      double m = sc.min;
      cl.witness = sc.witness;
      for (double nu : nus) m = std::min(m, nu * p.eps_inf + p.sigma_bar + rho);
      cl.value = m;
      cl.pass = m >= 1e-8;
      std::ostringstream os;
      os << "Re(z eps) + conductivity >= " << m << " on |Re z| <= " << nu2;
      cl.detail = os.str();
    } else {
      cl.detail = "skipped: sigma_bar = 0";
    }
    rep.clauses.push_back(cl);
  }

  // Boundedness of chi and z chi left of the poles.
  {
    ClauseResult cl;
    cl.name = "m3-bounded";
    double nu1 = 1.0;
    bool have_pole = false;
    for (const auto& pole : zM_poles(p, none)) {
      have_pole = true;
      nu1 = std::min(nu1, 0.5 * std::abs(pole.nu));
    }
    if (!have_pole) nu1 = 1.0;
    std::vector<double> nus{-nu1, -0.5 * nu1, 0.0};
    nus.insert(nus.end(), pos_nus.begin(), pos_nus.end());
    double max_chi = 0.0, max_zchi = std::abs(rho);
    ComplexFreq w;
    for (double nu : nus) {
      for (double t : ts) {
        try {
          const cplx chi = eval_chi(p, {nu, t});
          const double a = std::abs(chi);
          const double b = std::abs(cplx(nu, t) * chi);
          if (std::max(a, b) > std::max(max_chi, max_zchi)) w = {nu, t};
          max_chi = std::max(max_chi, a);
          max_zchi = std::max(max_zchi, b);
        } catch (const PoleError&) {
          max_chi = max_zchi = std::numeric_limits<double>::infinity();
          w = {nu, t};
        }
      }
    }
    cl.value = std::max(max_chi, max_zchi);
    cl.witness = w;
    cl.pass = cl.value < 1e6;
    std::ostringstream os;
    os << "max |chi| = " << max_chi << ", max |z chi| = " << max_zchi
       << " on Re z >= " << -nu1;
    cl.detail = os.str();
    rep.clauses.push_back(cl);
  }

  // z chi -> 0 as z -> 0 within the closed right half-plane.
  {
    ClauseResult cl;
    cl.name = "m3-limit";
    double prev = std::numeric_limits<double>::infinity();
    double last = 0.0;
    bool monotone = true;
    for (double r : {1e-2, 1e-4, 1e-6}) {
      double worst = 0.0;
      for (int k = 0; k <= 64; ++k) {
        const double ang = -M_PI / 2.0 + M_PI * k / 64.0;
        const cplx z = r * std::exp(cplx(0.0, ang));
        try {
          worst = std::max(worst, std::abs(z * eval_chi(p, ComplexFreq(z))));
        } catch (const PoleError&) {
          worst = std::numeric_limits<double>::infinity();
        }
      }
      if (worst > prev) monotone = false;
      prev = worst;
      last = worst;
    }
    cl.value = last;
    cl.pass = monotone && last <= 1e-4;
    cl.detail = "max |z chi| on shrinking right semicircles (1e-2, 1e-4, 1e-6)";
    rep.clauses.push_back(cl);
  }

  // Coercivity eps_inf + Re chi >= c1 > 0 on the right half-plane.
  {
    ClauseResult cl;
    cl.name = "m3-coercive";
    std::vector<double> nus{0.0};
    nus.insert(nus.end(), pos_nus.begin(), pos_nus.end());
    StripScan sc = strip_min(nus, ts, 0.0,
                             [&](double nu, double t) {
                               try {
                                 return p.eps_inf + eval_chi(p, {nu, t}).real();
                               } catch (const PoleError&) {
                                 return kBlowup;
                               }
                             },
                             exec);
    cl.value = std::min(sc.min, p.eps_inf);  // chi -> 0 tail
    cl.witness = sc.witness;
    cl.pass = cl.value >= 1e-8;
    cl.detail = "c1 = min(eps_inf + Re chi) over sampled Re z >= 0";
    rep.clauses.push_back(cl);
  }

  rep.all_pass = true;
  for (const auto& c : rep.clauses)
    if (c.applicable && !c.pass) rep.all_pass = false;
  return rep;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string certificate_to_json(const Certificate& cert, const HalfPlaneGrid& grid,
                                int indent) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(cert.verdict);
  j["nu0"] = cert.nu0;
  j["gamma"] = cert.gamma;
  if (cert.slope_d)
    j["slope_d"] = *cert.slope_d;
  else
    j["slope_d"] = nullptr;
  if (cert.counterexample) {
    j["counterexample"] = {{"nu", cert.counterexample->z.nu},
                           {"t", cert.counterexample->z.t},
                           {"value", cert.counterexample->value}};
  } else {
    j["counterexample"] = nullptr;
  }
  j["grid"] = {{"nu_count", grid.nu_values.size()},
               {"t_count", grid.t_count},
               {"t_max", grid.t_max},
               {"log_spaced", grid.log_spaced},
               {"origin_ball_delta", grid.origin_ball_delta}};
  j["asymptote_checked"] = cert.asymptote_checked;
  j["tol_gamma"] = cert.tol_gamma;
  j["origin_ball_delta"] = cert.origin_ball_delta;
  j["note"] = cert.note;
  j["kind"] = "numeric-certificate";
  return j.dump(indent);
}

std::string m2m3_to_json(const M2M3Report& rep, int indent) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : rep.clauses) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["applicable"] = c.applicable;
    j["pass"] = c.pass;
    j["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value)
                                        : nlohmann::ordered_json(nullptr);
    j["witness"] = {{"nu", c.witness.nu}, {"t", c.witness.t}};
    j["detail"] = c.detail;
    arr.push_back(j);
  }
  nlohmann::ordered_json out;
  out["clauses"] = arr;
  out["all_pass"] = rep.all_pass;
  return out.dump(indent);
}

}  // namespace dispml
