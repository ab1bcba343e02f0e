#include "dispml/blocksys.hpp"

#include <random>
#include <sstream>

#include "json.hpp"

namespace dispml {

const char* to_string(SystemVariant v) {
  switch (v) {
    case SystemVariant::Dispersion: return "dispersion";
    case SystemVariant::CfsVacuum: return "cfs-vacuum";
    case SystemVariant::DispersionCfs: return "dispersion-cfs";
    case SystemVariant::DispersionUpml: return "dispersion-upml";
  }
  return "?";
}

std::size_t StateLayout::index(const std::string& name) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].name == name) return i;
  throw std::out_of_range("no block named " + name);
}

bool StateLayout::has(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return true;
  return false;
}

namespace {

std::string idx_name(const char* base, std::size_t i) {
  std::ostringstream os;
  os << base << "[" << i << "]";
  return os.str();
}

void check_variant(SystemVariant variant, const DispersionParams& p,
                   const PmlStretch& s) {
  p.validate();
  s.validate();
  if (p.mu != 1.0)
    throw InvalidVariantParams("block assembly requires mu = 1");
  const StretchKind want = variant == SystemVariant::Dispersion ? StretchKind::None
                           : variant == SystemVariant::DispersionUpml
                               ? StretchKind::Uniaxial
                               : StretchKind::CFS;
  if (s.kind != want)
    throw InvalidVariantParams(std::string("stretch kind does not match variant ") +
                               to_string(variant));
  if (variant == SystemVariant::CfsVacuum &&
      (p.has_dispersion() || p.sigma_bar != 0.0))
    throw InvalidVariantParams("cfs-vacuum takes no dispersion and sigma_bar = 0");
}

}  // namespace

BlockSystem assemble(SystemVariant variant, const DispersionParams& p,
                     const PmlStretch& s, const AssembleOptions& opt) {
  check_variant(variant, p, s);

  BlockSystem sys;
  sys.variant = variant;
  sys.spatial_tag = opt.spatial_tag;
  for (const auto& d : p.debye) sys.rho += d.a;
  for (const auto& l : p.lorentz) sys.rho += l.d;

  const double sg = s.sigma;
  const double al = s.alpha;

  auto& blocks = sys.layout.blocks;
  blocks.push_back({"E", true});
  blocks.push_back({"H", false});

  if (variant == SystemVariant::CfsVacuum) {
    blocks.push_back({"R", true});   // driven by E
    blocks.push_back({"Q", false});  // driven by H
    const std::size_t n = 4;
    sys.M0 = DenseMatrix::identity(n);
    DenseMatrix m1(n, n);
    // E' + sigma E - alpha R = curl H + f        R' + alpha R - sigma E = 0
    // H' + sigma H - alpha Q = -curl_0 E         Q' + alpha Q - sigma H = 0
    m1(0, 0) = sg;  m1(0, 2) = -al;
    m1(1, 1) = sg;  m1(1, 3) = -al;
    m1(2, 0) = -sg; m1(2, 2) = al;
    m1(3, 1) = -sg; m1(3, 3) = al;
    sys.M1 = m1;
    sys.provenance.push_back(
        "auxiliary roles inferred from M1 sparsity: R pairs with E, Q with H");
    return sys;
  }

  const std::size_t nd = p.debye.size();
  const std::size_t nl = p.lorentz.size();
  for (std::size_t i = 0; i < nd; ++i) blocks.push_back({idx_name("p_L1", i), true});
  for (std::size_t i = 0; i < nl; ++i) blocks.push_back({idx_name("j_L2", i), true});
  for (std::size_t i = 0; i < nl; ++i) blocks.push_back({idx_name("p_L2", i), true});
  if (variant == SystemVariant::DispersionCfs) {
    blocks.push_back({"S1", true});
    blocks.push_back({"S2", true});
    blocks.push_back({"S3", true});
    blocks.push_back({"R", false});  // magnetic auxiliary of this variant
  } else if (variant == SystemVariant::DispersionUpml) {
    blocks.push_back({"S", true});
  }

  const std::size_t n = blocks.size();
  const std::size_t iE = 0, iH = 1;
  const std::size_t ip1 = 2;        // first Debye polarization
  const std::size_t ij2 = ip1 + nd; // first Lorentz current
  const std::size_t ip2 = ij2 + nl; // first Lorentz polarization

  DenseMatrix m0(n, n);
  m0(iE, iE) = p.eps_inf;
  for (std::size_t i = 1; i < n; ++i) m0(i, i) = 1.0;
  sys.M0 = m0;

  const bool pml = variant != SystemVariant::Dispersion;
  const double sigma_pml = pml ? sg : 0.0;

  DenseMatrix m1(n, n);
  // E row: eps_inf E' + (sigma_bar + rho + eps_inf*sigma) E
  //        + sum_L1 -(b_l - sigma) p_l + sum_L2 (j_l + sigma p_l) + PML terms
  m1(iE, iE) = p.sigma_bar + sys.rho + p.eps_inf * sigma_pml;
  for (std::size_t i = 0; i < nd; ++i) m1(iE, ip1 + i) = -(p.debye[i].b - sigma_pml);
  for (std::size_t i = 0; i < nl; ++i) {
    m1(iE, ij2 + i) = 1.0;
    m1(iE, ip2 + i) = sigma_pml;
  }

  // p_l' - a_l E + b_l p_l = 0
  for (std::size_t i = 0; i < nd; ++i) {
    m1(ip1 + i, iE) = -p.debye[i].a;
    m1(ip1 + i, ip1 + i) = p.debye[i].b;
  }
  // j_m' + (d f - c) E + f j_m + e p_m = 0,   p_m' - d E - j_m = 0
  for (std::size_t i = 0; i < nl; ++i) {
    const auto& L = p.lorentz[i];
    m1(ij2 + i, iE) = L.d * L.f - L.c;
    m1(ij2 + i, ij2 + i) = L.f;
    m1(ij2 + i, ip2 + i) = L.e;
    m1(ip2 + i, iE) = -L.d;
    m1(ip2 + i, ij2 + i) = -1.0;
  }

  if (variant == SystemVariant::DispersionCfs) {
    const std::size_t iS1 = ip2 + nl, iS2 = iS1 + 1, iS3 = iS2 + 1, iR = iS3 + 1;
    m1(iE, iS1) = 1.0;
    m1(iE, iS2) = -al;
    m1(iE, iS3) = -al;
    m1(iH, iH) = sg;
    m1(iH, iR) = -al;
    // S1' + alpha S1 - sigma sigma_bar E = 0
    m1(iS1, iE) = -sg * p.sigma_bar;
    m1(iS1, iS1) = al;
    // S2' + alpha S2 - eps_inf sigma E = 0
    m1(iS2, iE) = -p.eps_inf * sg;
    m1(iS2, iS2) = al;
    // S3' + alpha S3 - sigma * sum of all dispersive polarizations = 0.
    // The published sum runs over the intersection of the two index sets,
    // which is empty by construction; the union is what reproduces
    // z s(z) eps(z) under elimination, so the union is assembled unless the
    // verbatim form is requested.
    m1(iS3, iS3) = al;
    if (!opt.literal_s3) {
      for (std::size_t i = 0; i < nd; ++i) m1(iS3, ip1 + i) = -sg;
      for (std::size_t i = 0; i < nl; ++i) m1(iS3, ip2 + i) = -sg;
      sys.provenance.push_back(
          "S3 drives from the union of both branch sets (published sum over the "
          "intersection is empty)");
    } else {
      sys.provenance.push_back("S3 assembled with the verbatim empty-sum coupling");
    }
    sys.provenance.push_back(
        "S3 row carries no conductivity entry; the governing S1 line owns the "
        "sigma*sigma_bar coupling");
    // R' + alpha R - sigma H = 0
    m1(iR, iH) = -sg;
    m1(iR, iR) = al;
  } else if (variant == SystemVariant::DispersionUpml) {
    const std::size_t iS = ip2 + nl;
    m1(iE, iS) = 1.0;
    m1(iH, iH) = sg;
    // S' - sigma sigma_bar E = 0 (pure integrator, no decay entry)
    m1(iS, iE) = -sg * p.sigma_bar;
    sys.provenance.push_back(
        "H row applies the same first-order spatial operator as the other "
        "variants (published line names a gradient)");
  }

  sys.M1 = m1;
  sys.provenance.push_back(
      "entries transcribed from the governing ODE lines, not the typeset "
      "operator matrices");
  return sys;
}

cplx transfer_function(const BlockSystem& sys, ComplexFreq zf, Chain chain) {
  const cplx z = zf.value();
  const std::size_t n = sys.layout.dim();
  const std::size_t field = chain == Chain::Electric ? sys.layout.index("E")
                                                     : sys.layout.index("H");

  // G = z M0 + M1. Schur complement of the auxiliary sub-block onto `field`:
  // G_ff - G_fa * G_aa^{-1} * G_af. The other field's chain never couples
  // through M0/M1, so it is simply excluded from the auxiliary set.
  std::vector<std::size_t> aux;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == field) continue;
    if (sys.layout.blocks[i].coupled_to_E == (chain == Chain::Electric))
      aux.push_back(i);
  }

  auto g = [&](std::size_t i, std::size_t j) -> cplx {
    return z * sys.M0(i, j) + sys.M1(i, j);
  };

  cplx symbol = g(field, field);
  if (aux.empty()) return symbol;

  const std::size_t m = aux.size();
  std::vector<cplx> gaa(m * m);
  std::vector<cplx> gaf(m);
  for (std::size_t r = 0; r < m; ++r) {
    gaf[r] = g(aux[r], field);
    for (std::size_t c = 0; c < m; ++c) gaa[r * m + c] = g(aux[r], aux[c]);
  }
  const std::vector<cplx> x = solve_complex(std::move(gaa), m, std::move(gaf));
  for (std::size_t r = 0; r < m; ++r) symbol -= g(field, aux[r]) * x[r];
  return symbol;
}

TfEquivalenceReport tf_equivalence_check(const BlockSystem& sys,
                                         const DispersionParams& p,
                                         const PmlStretch& s, int sample_count,
                                         std::uint64_t seed, double tolerance) {
  TfEquivalenceReport rep;
  rep.samples = sample_count;
  rep.seed = seed;
  rep.tolerance = tolerance;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> nu_dist(1.0, 11.0);
  std::uniform_real_distribution<double> t_dist(-50.0, 50.0);

  for (int i = 0; i < sample_count; ++i) {
    const ComplexFreq z{nu_dist(rng), t_dist(rng)};
    const auto [ref_e, ref_m] = eval_zM(p, s, z);
    try {
      const cplx tf_e = transfer_function(sys, z, Chain::Electric);
      const cplx tf_m = transfer_function(sys, z, Chain::Magnetic);
      const double err_e = std::abs(tf_e - ref_e) / std::max(std::abs(ref_e), 1e-30);
      const double err_m = std::abs(tf_m - ref_m) / std::max(std::abs(ref_m), 1e-30);
      if (err_e > rep.max_rel_err_electric) {
        rep.max_rel_err_electric = err_e;
        rep.worst_z_electric = z;
      }
      if (err_m > rep.max_rel_err_magnetic) {
        rep.max_rel_err_magnetic = err_m;
        rep.worst_z_magnetic = z;
      }
    } catch (const SingularElimination& e) {
      std::ostringstream os;
      os << "singular elimination at z = " << z.nu << " + " << z.t << "i: "
         << e.what();
      rep.failures.push_back(os.str());
    }
  }
  rep.pass = rep.failures.empty() &&
             rep.max_rel_err_electric <= tolerance &&
             rep.max_rel_err_magnetic <= tolerance;
  return rep;
}

namespace {

void append_term(std::ostringstream& os, double coeff, const std::string& name) {
  if (coeff == 0.0) return;
  os << (coeff < 0.0 ? " - " : " + ");
  const double mag = std::abs(coeff);
  if (mag != 1.0) os << mag << "*";
  os << name;
}

}  // namespace

std::vector<std::string> describe_rows(const BlockSystem& sys) {
  std::vector<std::string> rows;
  const std::size_t n = sys.layout.dim();
  const bool oned = sys.spatial_tag == SpatialTag::Dx1D;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream os;
    const std::string& ni = sys.layout.blocks[i].name;
    os << "d/dt[";
    if (sys.M0(i, i) != 1.0) os << sys.M0(i, i) << "*";
    os << ni << "]";
    for (std::size_t j = 0; j < n; ++j)
      append_term(os, sys.M1(i, j), sys.layout.blocks[j].name);
    if (ni == "E") os << (oned ? " - dx(H)" : " - curl(H)") << " = F";
    else if (ni == "H") os << (oned ? " - dx(E)" : " + curl0(E)") << " = 0";
    else os << " = 0";
    rows.push_back(os.str());
  }
  return rows;
}

std::string blocksystem_to_json(const BlockSystem& sys, int indent) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(sys.variant);
  j["dim"] = sys.layout.dim();
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (const auto& b : sys.layout.blocks)
    blocks.push_back({{"name", b.name}, {"chain", b.coupled_to_E ? "E" : "H"}});
  j["layout"] = blocks;
  j["M0"] = sys.M0.data();
  j["M1"] = sys.M1.data();
  j["rho"] = sys.rho;
  j["spatial_tag"] = sys.spatial_tag == SpatialTag::Dx1D ? "dx-1d" : "curl-3d";
  j["provenance"] = sys.provenance;
  return j.dump(indent);
}

}  // namespace dispml
