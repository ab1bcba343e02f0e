#ifndef DISPML_MATLAW_HPP
#define DISPML_MATLAW_HPP

#include <optional>
#include <utility>
#include <vector>

#include "dispml/types.hpp"

namespace dispml {

/// Single-pole relaxation branch a/(b + z), b > 0.
struct DebyePole {
  double a = 0.0;
  double b = 1.0;
};

/// Resonant branch (c + z d)/(e + z f + z^2), e > 0, f >= 0.
struct LorentzPole {
  double c = 0.0;
  double d = 0.0;
  double e = 1.0;
  double f = 0.0;
};

/// Constants of the generalized dispersion model
///
///   eps(z) = eps_inf + sigma_bar/z + sum_l a_l/(b_l + z)
///                    + sum_l (c_l + z d_l)/(e_l + z f_l + z^2).
///
/// Units are normalized (vacuum permittivity and permeability are 1); `mu`
/// is a scalar permeability defaulting to 1. When `correction_r` is set,
/// every Lorentz branch is multiplied by (1 + (z - z0)/r), the analytic
/// correction that lifts the branch's decay at large |z|.
struct DispersionParams {
  double eps_inf = 1.0;
  double sigma_bar = 0.0;
  double mu = 1.0;
  std::vector<DebyePole> debye;
  std::vector<LorentzPole> lorentz;
  std::optional<double> correction_r;
  ComplexFreq correction_z0{0.0, 0.0};

  /// Throws std::invalid_argument if any constant is out of range
  /// (eps_inf < 0, sigma_bar < 0, b <= 0, e <= 0, f < 0, r <= 0).
  void validate() const;

  bool has_dispersion() const { return !debye.empty() || !lorentz.empty(); }
};

enum class StretchKind { None, Uniaxial, CFS };

/// Pointwise complex coordinate stretching s(z).
///   None:     s = 1
///   Uniaxial: s = 1 + sigma/z
///   CFS:      s = 1 + sigma/(alpha + z)
/// sigma = 0 reproduces the identity stretch exactly, for any kind.
struct PmlStretch {
  StretchKind kind = StretchKind::None;
  double sigma = 0.0;
  double alpha = 0.0;

  void validate() const;
  bool trivial() const { return kind == StretchKind::None || sigma == 0.0; }
};

/// Denominators smaller than this magnitude count as on-pole evaluations.
inline constexpr double kPoleTol = 1e-14;

/// chi(z): the dispersive (non-constant, non-conductive) part of eps.
/// Throws PoleError if z sits within kPoleTol of any branch pole.
cplx eval_chi(const DispersionParams& p, ComplexFreq z);

/// eps(z) = eps_inf + sigma_bar/z + chi(z).
/// Throws ZeroFrequencyError at z = 0 when sigma_bar > 0, PoleError on poles.
cplx eval_epsilon(const DispersionParams& p, ComplexFreq z);

/// s(z). Throws PoleError at z = -alpha (CFS) or z = 0 (Uniaxial) unless
/// sigma = 0, in which case the identity short-circuit applies.
cplx eval_stretch(const PmlStretch& s, ComplexFreq z);

/// z*s(z), with the uniaxial pole at the origin cancelled analytically:
/// z*(1 + sigma/z) = z + sigma everywhere.
cplx eval_zs(const PmlStretch& s, ComplexFreq z);

/// The stretched symbols (z s(z) eps(z), z s(z) mu).
///
/// Removable singularities of the product are cancelled analytically, so
/// the pair is evaluable wherever z s(z) eps(z) itself is finite: at z = 0
/// the conductive term z * sigma_bar/z collapses to sigma_bar, and the
/// uniaxial stretch collapses to z + sigma. Genuine poles (Debye poles,
/// Lorentz roots, z = -alpha for CFS, and z = 0 for uniaxial-with-
/// conductivity) still raise PoleError.
std::pair<cplx, cplx> eval_zM(const DispersionParams& p, const PmlStretch& s,
                              ComplexFreq z);

/// Poles of z s(z) eps(z) after cancellation, as points in the z-plane.
std::vector<ComplexFreq> zM_poles(const DispersionParams& p, const PmlStretch& s);

/// Closed-form variants of Re(z s(z) eps(z)), assembled term by term in real
/// arithmetic. Used as an oracle against the direct complex evaluation.
enum class RealPartModel { DebyePlain, LorentzCFS, DebyeCFS, LorentzUPML, DebyeUPML };

/// Re(zM(z)) through the decomposed real-arithmetic route for the given
/// model family. Preconditions: the params hold only the family's branch
/// type, sigma_bar = 0, and the stretch kind matches (None for DebyePlain).
/// Throws std::invalid_argument on mismatch, PoleError on poles.
double real_part_zM_formula(RealPartModel model, const DispersionParams& p,
                            const PmlStretch& s, double nu, double t);

/// Re chi and Im chi by real arithmetic (no complex division); shared by the
/// formula variants above.
double re_chi_closed(const DispersionParams& p, double nu, double t);
double im_chi_closed(const DispersionParams& p, double nu, double t);

/// Largest pole magnitude of eps and s together (0 for pole-free laws).
double pole_radius(const DispersionParams& p, const PmlStretch& s);

}  // namespace dispml

#endif
