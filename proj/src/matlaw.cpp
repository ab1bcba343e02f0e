#include "dispml/matlaw.hpp"

#include <algorithm>
#include <sstream>

namespace dispml {

namespace {

[[noreturn]] void throw_pole(const char* term, ComplexFreq z) {
  std::ostringstream os;
  os << term << " denominator below " << kPoleTol << " at z = " << z.nu << " + "
     << z.t << "i";
  throw PoleError(os.str());
}

cplx correction_factor(const DispersionParams& p, cplx z) {
  if (!p.correction_r) return 1.0;
  return 1.0 + (z - p.correction_z0.value()) / *p.correction_r;
}

}  // namespace

void DispersionParams::validate() const {
  if (!(eps_inf >= 0.0)) throw std::invalid_argument("eps_inf must be >= 0");
  if (!(sigma_bar >= 0.0)) throw std::invalid_argument("sigma_bar must be >= 0");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  for (const auto& d : debye)
    if (!(d.b > 0.0)) throw std::invalid_argument("Debye pole b must be > 0");
  for (const auto& l : lorentz) {
    if (!(l.e > 0.0)) throw std::invalid_argument("Lorentz e must be > 0");
    if (!(l.f >= 0.0)) throw std::invalid_argument("Lorentz f must be >= 0");
  }
  if (correction_r && !(*correction_r > 0.0))
    throw std::invalid_argument("correction_r must be > 0");
}

void PmlStretch::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("stretch sigma must be >= 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("stretch alpha must be >= 0");
}

cplx eval_chi(const DispersionParams& p, ComplexFreq zf) {
  const cplx z = zf.value();
  cplx chi = 0.0;
  for (const auto& dp : p.debye) {
    const cplx den = dp.b + z;
    if (std::abs(den) < kPoleTol) throw_pole("Debye", zf);
    chi += dp.a / den;
  }
  if (!p.lorentz.empty()) {
    const cplx corr = correction_factor(p, z);
    for (const auto& lp : p.lorentz) {
      const cplx den = lp.e + z * lp.f + z * z;
      if (std::abs(den) < kPoleTol) throw_pole("Lorentz", zf);
      chi += (lp.c + z * lp.d) / den * corr;
    }
  }
  return chi;
}

cplx eval_epsilon(const DispersionParams& p, ComplexFreq zf) {
  const cplx z = zf.value();
  cplx eps = p.eps_inf;
  if (p.sigma_bar != 0.0) {
    if (std::abs(z) < kPoleTol)
      throw ZeroFrequencyError("eps(z) undefined at z = 0 for sigma_bar > 0");
    eps += p.sigma_bar / z;
  }
  return eps + eval_chi(p, zf);
}

cplx eval_stretch(const PmlStretch& s, ComplexFreq zf) {
  if (s.trivial()) return 1.0;
  const cplx z = zf.value();
  switch (s.kind) {
    case StretchKind::CFS: {
      const cplx den = s.alpha + z;
      if (std::abs(den) < kPoleTol) throw_pole("CFS stretch", zf);
      return 1.0 + s.sigma / den;
    }
    case StretchKind::Uniaxial: {
      if (std::abs(z) < kPoleTol) throw_pole("uniaxial stretch", zf);
      return 1.0 + s.sigma / z;
    }
    case StretchKind::None:
      return 1.0;
  }
  return 1.0;
}

cplx eval_zs(const PmlStretch& s, ComplexFreq zf) {
  const cplx z = zf.value();
  if (s.trivial()) return z;
  switch (s.kind) {
    case StretchKind::CFS: {
      const cplx den = s.alpha + z;
      if (std::abs(den) < kPoleTol) throw_pole("CFS stretch", zf);
      return z + s.sigma * z / den;
    }
    case StretchKind::Uniaxial:
      return z + s.sigma;  // z*(1 + sigma/z), pole cancelled
    case StretchKind::None:
      return z;
  }
  return z;
}

std::pair<cplx, cplx> eval_zM(const DispersionParams& p, const PmlStretch& s,
                              ComplexFreq zf) {
  const cplx zs = eval_zs(s, zf);
  cplx electric = zs * (p.eps_inf + eval_chi(p, zf));
  if (p.sigma_bar != 0.0) electric += eval_stretch(s, zf) * p.sigma_bar;
  return {electric, zs * p.mu};
}

std::vector<ComplexFreq> zM_poles(const DispersionParams& p, const PmlStretch& s) {
  std::vector<ComplexFreq> poles;
  for (const auto& d : p.debye) poles.emplace_back(-d.b, 0.0);
  for (const auto& l : p.lorentz) {
    const double disc = l.f * l.f - 4.0 * l.e;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      poles.emplace_back((-l.f + sq) / 2.0, 0.0);
      poles.emplace_back((-l.f - sq) / 2.0, 0.0);
    } else {
      const double sq = std::sqrt(-disc);
      poles.emplace_back(-l.f / 2.0, sq / 2.0);
      poles.emplace_back(-l.f / 2.0, -sq / 2.0);
    }
  }
  if (s.kind == StretchKind::CFS && s.sigma > 0.0) poles.emplace_back(-s.alpha, 0.0);
  if (s.kind == StretchKind::Uniaxial && s.sigma > 0.0 && p.sigma_bar > 0.0)
    poles.emplace_back(0.0, 0.0);
  return poles;
}

double pole_radius(const DispersionParams& p, const PmlStretch& s) {
  double r = 0.0;
  for (const auto& pole : zM_poles(p, s))
    r = std::max(r, std::hypot(pole.nu, pole.t));
  return r;
}

double re_chi_closed(const DispersionParams& p, double nu, double t) {
  double re = 0.0;
  for (const auto& d : p.debye) {
    const double den = (nu + d.b) * (nu + d.b) + t * t;
    if (den < kPoleTol) throw_pole("Debye", {nu, t});
    re += d.a * (nu + d.b) / den;
  }
  const double wr = p.correction_r ? 1.0 + (nu - p.correction_z0.nu) / *p.correction_r : 1.0;
  const double wi = p.correction_r ? (t - p.correction_z0.t) / *p.correction_r : 0.0;
  for (const auto& l : p.lorentz) {
    const double re_den = l.e + l.f * nu + nu * nu - t * t;
    const double im_den = t * (l.f + 2.0 * nu);
    const double den2 = re_den * re_den + im_den * im_den;
    if (den2 < kPoleTol * kPoleTol) throw_pole("Lorentz", {nu, t});
    const double re_num = l.c + l.d * nu;
    const double im_num = l.d * t;
    const double re_t = (re_num * re_den + im_num * im_den) / den2;
    const double im_t = (im_num * re_den - re_num * im_den) / den2;
    re += re_t * wr - im_t * wi;
  }
  return re;
}

double im_chi_closed(const DispersionParams& p, double nu, double t) {
  double im = 0.0;
  for (const auto& d : p.debye) {
    const double den = (nu + d.b) * (nu + d.b) + t * t;
    if (den < kPoleTol) throw_pole("Debye", {nu, t});
    im += -d.a * t / den;
  }
  const double wr = p.correction_r ? 1.0 + (nu - p.correction_z0.nu) / *p.correction_r : 1.0;
  const double wi = p.correction_r ? (t - p.correction_z0.t) / *p.correction_r : 0.0;
  for (const auto& l : p.lorentz) {
    const double re_den = l.e + l.f * nu + nu * nu - t * t;
    const double im_den = t * (l.f + 2.0 * nu);
    const double den2 = re_den * re_den + im_den * im_den;
    if (den2 < kPoleTol * kPoleTol) throw_pole("Lorentz", {nu, t});
    const double re_num = l.c + l.d * nu;
    const double im_num = l.d * t;
    const double re_t = (re_num * re_den + im_num * im_den) / den2;
    const double im_t = (im_num * re_den - re_num * im_den) / den2;
    im += re_t * wi + im_t * wr;
  }
  return im;
}

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

double real_part_zM_formula(RealPartModel model, const DispersionParams& p,
                            const PmlStretch& s, double nu, double t) {
  require(p.sigma_bar == 0.0, "formula variants assume sigma_bar = 0");
  switch (model) {
    case RealPartModel::DebyePlain: {
      require(p.lorentz.empty() && s.trivial(), "DebyePlain: Debye branches, no stretch");
      // eps_inf*nu + sum_l [ (nu^2 a + a t^2) + b nu a ] / (t^2 + (nu+b)^2)
      double v = p.eps_inf * nu;
      for (const auto& d : p.debye) {
        const double den = t * t + (nu + d.b) * (nu + d.b);
        if (den < kPoleTol) throw_pole("Debye", {nu, t});
        v += (nu * nu * d.a + d.a * t * t) / den + d.b * nu * d.a / den;
      }
      return v;
    }
    case RealPartModel::DebyeCFS:
    case RealPartModel::LorentzCFS: {
      require(s.kind == StretchKind::CFS, "CFS variants need a CFS stretch");
      if (model == RealPartModel::DebyeCFS)
        require(p.lorentz.empty(), "DebyeCFS: Debye branches only");
      else
        require(p.debye.empty(), "LorentzCFS: Lorentz branches only");
      const double den = t * t + (nu + s.alpha) * (nu + s.alpha);
      if (den < kPoleTol) throw_pole("CFS stretch", {nu, t});
      // Three-term split: Re(z s) * (eps_inf + Re chi) - Im(z s) * Im chi.
      const double term_a =
          (s.sigma * t * t + s.sigma * nu * nu) / den + s.sigma * s.alpha * nu / den + nu;
      const double term_b = p.eps_inf + re_chi_closed(p, nu, t);
      const double term_c =
          -(1.0 + s.alpha * s.sigma / den) * t * im_chi_closed(p, nu, t);
      return term_a * term_b + term_c;
    }
    case RealPartModel::DebyeUPML:
    case RealPartModel::LorentzUPML: {
      require(s.kind == StretchKind::Uniaxial, "UPML variants need a uniaxial stretch");
      if (model == RealPartModel::DebyeUPML)
        require(p.lorentz.empty(), "DebyeUPML: Debye branches only");
      else
        require(p.debye.empty(), "LorentzUPML: Lorentz branches only");
      // (nu + sigma)(eps_inf + Re chi) - t Im chi
      return (nu + s.sigma) * (p.eps_inf + re_chi_closed(p, nu, t)) -
             t * im_chi_closed(p, nu, t);
    }
  }
  throw std::invalid_argument("unknown model");
}

}  // namespace dispml
