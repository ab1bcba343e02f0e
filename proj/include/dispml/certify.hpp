#ifndef DISPML_CERTIFY_HPP
#define DISPML_CERTIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "dispml/blocksys.hpp"
#include "dispml/matlaw.hpp"
#include "dispml/types.hpp"

namespace dispml {

/// Which components of the stretched symbol pair a certificate covers.
/// Dispersive media without a PML are certified on the electric component
/// alone: the magnetic weight is a positive constant there, and
/// Re(z mu) = mu Re z vanishes on the imaginary axis for every law, so a
/// both-component certificate over a left half-plane can never exist.
enum class Component { Both, Electric, Magnetic };

const char* to_string(Component c);

struct ScalarLaw {
  DispersionParams params;
  PmlStretch stretch;
  Component component = Component::Both;
};

/// Finite sample set standing in for a half-plane. `nu_values` are
/// nonnegative offsets added to the scanned edge; `t_count` magnitudes of
/// Im z are log-spaced in [t_min, t_max] and mirrored around t = 0, which is
/// always included. Scans whose region reaches left of `origin_ball_delta`
/// exclude the closed ball of that radius around z = 0: laws with
/// sigma_bar = 0 vanish linearly there, so the raw infimum over any region
/// containing the origin is pinned to zero, and the stability conditions
/// this grid discretizes quantify away from the origin.
struct HalfPlaneGrid {
  std::vector<double> nu_values;
  double t_max = 1e3;
  int t_count = 4097;
  bool log_spaced = true;
  double t_min = 1e-6;
  double origin_ball_delta = 0.1;

  /// 33 nu offsets ({0} plus a log ladder) and 4097 |t| samples up to
  /// max(1e3, 10x the law's pole radius).
  static HalfPlaneGrid defaults(const ScalarLaw& law);

  std::vector<double> t_samples() const;
};

enum class Verdict { Accretive, NotAccretive };

const char* to_string(Verdict v);

struct Counterexample {
  ComplexFreq z;
  double value = 0.0;
};

/// Numeric accretivity certificate: not a proof. `nu0` is the half-plane
/// edge in stability orientation (certified on Re z > -nu0), `gamma` the
/// coercivity constant found there, `slope_d` the smallest d with
/// Re(z M(z)) >= Re z / d over the positive half-plane when one exists.
struct Certificate {
  Verdict verdict = Verdict::NotAccretive;
  double nu0 = 0.0;
  double gamma = 0.0;
  std::optional<double> slope_d;
  std::optional<Counterexample> counterexample;
  bool asymptote_checked = false;
  double tol_gamma = 1e-8;
  double origin_ball_delta = 0.0;
  std::string note;
};

std::string certificate_to_json(const Certificate& cert, const HalfPlaneGrid& grid,
                                int indent = 2);

struct ScanResult {
  double inf = 0.0;          // minimum over the sampled points
  ComplexFreq argmin;        // where it was attained
  double asym_min = 0.0;     // smallest closed-form t -> +-inf limit
  double asym_min_nu = 0.0;  // at which sampled nu
  bool asymptote_ok = true;  // limits do not undercut the sampled minimum
};

/// Minimum of Re(zM(z)) over the sampled region Re z >= nu_edge (selected
/// components), plus the closed-form t -> +-infinity limits at each sampled
/// nu. Throws PoleInRegion when a pole of zM lies strictly inside the
/// region (and outside the excluded origin ball).
ScanResult scan_halfplane(const ScalarLaw& law, double nu_edge,
                          const HalfPlaneGrid& grid, Exec exec = Exec::Parallel);

/// Certificate at a fixed edge: gamma = max(0, min(sampled inf, asymptote
/// inf)); Accretive iff gamma > tol_gamma. PoleInRegion is converted into a
/// NotAccretive certificate whose counterexample probes next to the pole.
Certificate find_gamma(const ScalarLaw& law, double nu_edge,
                       const HalfPlaneGrid& grid, double tol_gamma = 1e-8,
                       Exec exec = Exec::Parallel);

/// Bisects the largest nu0 in [lo, hi] such that the law stays accretive on
/// Re z >= -nu0 (tolerance 1e-6 on nu0). Requires accretivity at the edge
/// nu_edge = 0 first; returns that failure unchanged otherwise. Also
/// estimates slope_d from a positive half-plane scan.
Certificate find_nu0_stability(const ScalarLaw& law, const HalfPlaneGrid& grid,
                               double nu_lo = 0.0, double nu_hi = 8.0,
                               double bisect_tol = 1e-6,
                               Exec exec = Exec::Parallel);

/// Block certificate: gamma = lambda_min(nu_edge*M0 + (M1 + M1^T)/2), by
/// cyclic Jacobi iteration at 1e-12. M0 must be symmetric positive definite
/// (M0NotSPD otherwise). Monotone in nu_edge since M0 >= 0, so the edge
/// value certifies the whole half-plane.
Certificate certify_block(const BlockSystem& sys, double nu_edge,
                          double tol_gamma = 1e-8);

/// One clause of the material-law stability conditions.
struct ClauseResult {
  std::string name;
  bool applicable = true;
  bool pass = false;
  double value = 0.0;  // the attained bound (min or max, per clause)
  ComplexFreq witness;
  std::string detail;
};

struct M2M3Report {
  std::vector<ClauseResult> clauses;
  bool all_pass = false;  // over applicable clauses
  const ClauseResult* find(const std::string& name) const;
};

/// Grid checks of the permittivity stability conditions: strict positivity
/// of Re(z eps) off the origin ball on a left strip (probed over decreasing
/// strip widths), positivity on the right half-plane, the conductive
/// variant Re(z eps) + sigma_bar >= c, boundedness of chi and z chi left of
/// the poles, the z chi -> 0 origin limit, and coercivity
/// eps_inf + Re chi >= c1 > 0.
M2M3Report check_m2m3(const DispersionParams& p, double origin_ball_delta = 0.1,
                      Exec exec = Exec::Parallel);

std::string m2m3_to_json(const M2M3Report& rep, int indent = 2);

}  // namespace dispml

#endif
