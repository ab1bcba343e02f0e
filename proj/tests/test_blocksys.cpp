#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "json.hpp"

#include "dispml/blocksys.hpp"
#include "dispml/certify.hpp"

using namespace dispml;

namespace {

DispersionParams mixed_medium() {
  DispersionParams p;
  p.eps_inf = 1.5;
  p.debye = {{0.8, 1.2}, {0.3, 2.5}};
  p.lorentz = {{1.0, 0.2, 2.0, 0.4}};
  return p;
}

}  // namespace

TEST_CASE("assemble: vacuum dispersion is the bare field pair") {
  DispersionParams vac;
  const BlockSystem sys = assemble(SystemVariant::Dispersion, vac, {});
  CHECK(sys.layout.dim() == 2);
  CHECK(sys.M0(0, 0) == 1.0);
  CHECK(sys.M0(1, 1) == 1.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(sys.M1(i, j) == 0.0);
}

TEST_CASE("assemble: single Debye rows follow the governing lines") {
  DispersionParams p;
  p.debye = {{0.7, 1.3}};
  const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
  const std::size_t e = sys.layout.index("E");
  const std::size_t pp = sys.layout.index("p_L1[0]");
  CHECK(sys.M1(e, e) == doctest::Approx(0.7));    // sigma_bar + rho = a
  CHECK(sys.M1(e, pp) == doctest::Approx(-1.3));  // -b
  CHECK(sys.M1(pp, e) == doctest::Approx(-0.7));  // -a
  CHECK(sys.M1(pp, pp) == doctest::Approx(1.3));  // +b
}

TEST_CASE("assemble: UPML Debye E-row diagonal carries sigma_bar + rho + eps_inf sigma") {
  DispersionParams p;
  p.eps_inf = 2.0;
  p.sigma_bar = 0.5;
  p.debye = {{1.0, 1.0}};
  const PmlStretch s{StretchKind::Uniaxial, 1.0, 0.0};
  const BlockSystem sys = assemble(SystemVariant::DispersionUpml, p, s);
  const std::size_t e = sys.layout.index("E");
  CHECK(sys.M1(e, e) == doctest::Approx(0.5 + 1.0 + 2.0 * 1.0));
  // p column folds the sigma coupling: -(b - sigma)
  CHECK(sys.M1(e, sys.layout.index("p_L1[0]")) == doctest::Approx(-(1.0 - 1.0)));
  CHECK(sys.M1(sys.layout.index("S"), e) == doctest::Approx(-0.5));
  CHECK(sys.M1(e, sys.layout.index("S")) == doctest::Approx(1.0));
}

TEST_CASE("assemble rejects mismatched inputs") {
  DispersionParams p;
  CHECK_THROWS_AS(assemble(SystemVariant::CfsVacuum, p, {StretchKind::None, 0, 0}),
                  InvalidVariantParams);
  DispersionParams disp;
  disp.debye = {{1.0, 1.0}};
  CHECK_THROWS_AS(
      assemble(SystemVariant::CfsVacuum, disp, {StretchKind::CFS, 1.0, 1.0}),
      InvalidVariantParams);
  DispersionParams mu2;
  mu2.mu = 2.0;
  CHECK_THROWS_AS(assemble(SystemVariant::Dispersion, mu2, {}), InvalidVariantParams);
}

TEST_CASE("M0 is diagonal SPD with lambda_min = min(eps_inf, 1)") {
  DispersionParams p = mixed_medium();
  for (auto variant : {SystemVariant::Dispersion, SystemVariant::DispersionCfs,
                       SystemVariant::DispersionUpml}) {
    const PmlStretch s = variant == SystemVariant::Dispersion
                             ? PmlStretch{}
                             : variant == SystemVariant::DispersionCfs
                                   ? PmlStretch{StretchKind::CFS, 1.0, 0.5}
                                   : PmlStretch{StretchKind::Uniaxial, 1.0, 0.0};
    const BlockSystem sys = assemble(variant, p, s);
    CHECK(sys.M0.is_symmetric());
    CHECK(jacobi_min_eigenvalue(sys.M0) == doctest::Approx(std::min(p.eps_inf, 1.0)));
  }
}

TEST_CASE("transfer_function: Debye elimination against partial fractions") {
  DispersionParams p;
  p.debye = {{1.0, 1.0}};
  const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
  // hat p = a E / (z + b), so the symbol is z(eps_inf + a/(z+b)) = 1.5 at z=1
  const cplx tf = transfer_function(sys, {1.0, 0.0});
  CHECK(std::abs(tf - cplx(1.5)) < 1e-12);
}

TEST_CASE("transfer_function: Lorentz elimination matches the rational symbol") {
  DispersionParams p;
  p.eps_inf = 1.2;
  p.lorentz = {{0.8, 0.3, 1.7, 0.25}};
  const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> nu_d(1.0, 8.0), t_d(-20.0, 20.0);
  for (int i = 0; i < 100; ++i) {
    const ComplexFreq z{nu_d(rng), t_d(rng)};
    const cplx zc = z.value();
    const cplx expected =
        zc * (p.eps_inf + (0.8 + zc * 0.3) / (1.7 + zc * 0.25 + zc * zc));
    const cplx tf = transfer_function(sys, z);
    CHECK(std::abs(tf - expected) <= 1e-10 * std::abs(expected));
  }
}

TEST_CASE("transfer_function equals z*eps from the scalar law for sigma = 0") {
  DispersionParams p = mixed_medium();
  const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> nu_d(1.0, 10.0), t_d(-30.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const ComplexFreq z{nu_d(rng), t_d(rng)};
    const cplx expected = z.value() * eval_epsilon(p, z);
    const cplx tf = transfer_function(sys, z);
    CHECK(std::abs(tf - expected) <= 1e-10 * std::abs(expected));
  }
}

TEST_CASE("transfer_function: singular at a resonance") {
  DispersionParams p;
  p.lorentz = {{1.0, 0.0, 1.0, 0.0}};
  const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
  CHECK_THROWS_AS(transfer_function(sys, {0.0, 1.0}), SingularElimination);
}

TEST_CASE("tf_equivalence_check passes for all four variants") {
  DispersionParams p = mixed_medium();
  DispersionParams vac;

  SUBCASE("dispersion") {
    const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
    CHECK(tf_equivalence_check(sys, p, {}, 100).pass);
  }
  SUBCASE("cfs vacuum") {
    const PmlStretch s{StretchKind::CFS, 1.0, 1.0};
    const BlockSystem sys = assemble(SystemVariant::CfsVacuum, vac, s);
    const auto rep = tf_equivalence_check(sys, vac, s, 100);
    CHECK(rep.pass);
  }
  SUBCASE("dispersion + CFS, all sigma/alpha corners") {
    for (double sg : {0.0, 1.0}) {
      for (double al : {0.0, 1.0}) {
        const PmlStretch s{StretchKind::CFS, sg, al};
        const BlockSystem sys = assemble(SystemVariant::DispersionCfs, p, s);
        const auto rep = tf_equivalence_check(sys, p, s, 100);
        CAPTURE(sg);
        CAPTURE(al);
        CHECK(rep.pass);
      }
    }
  }
  SUBCASE("dispersion + UPML") {
    for (double sg : {0.0, 1.0}) {
      const PmlStretch s{StretchKind::Uniaxial, sg, 0.0};
      const BlockSystem sys = assemble(SystemVariant::DispersionUpml, p, s);
      CHECK(tf_equivalence_check(sys, p, s, 100).pass);
    }
  }
}

TEST_CASE("literal S3 coupling leaves a residual when sigma and alpha are on") {
  DispersionParams p = mixed_medium();
  const PmlStretch s{StretchKind::CFS, 1.0, 1.0};
  AssembleOptions opt;
  opt.literal_s3 = true;
  const BlockSystem sys = assemble(SystemVariant::DispersionCfs, p, s, opt);
  const auto rep = tf_equivalence_check(sys, p, s, 100);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_rel_err_electric > 1e-3);
}

TEST_CASE("transfer function is conjugate symmetric") {
  DispersionParams p = mixed_medium();
  const PmlStretch s{StretchKind::CFS, 0.7, 0.4};
  const BlockSystem sys = assemble(SystemVariant::DispersionCfs, p, s);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> nu_d(1.0, 6.0), t_d(0.1, 25.0);
  for (int i = 0; i < 50; ++i) {
    const double nu = nu_d(rng), t = t_d(rng);
    const cplx a = transfer_function(sys, {nu, t});
    const cplx b = transfer_function(sys, {nu, -t});
    CHECK(std::abs(std::conj(a) - b) < 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("zero PML parameters reduce both PML variants to the plain one") {
  DispersionParams p = mixed_medium();
  const BlockSystem plain = assemble(SystemVariant::Dispersion, p, {});
  const BlockSystem cfs =
      assemble(SystemVariant::DispersionCfs, p, {StretchKind::CFS, 0.0, 0.0});
  const BlockSystem upml =
      assemble(SystemVariant::DispersionUpml, p, {StretchKind::Uniaxial, 0.0, 0.0});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> nu_d(1.0, 5.0), t_d(-15.0, 15.0);
  for (int i = 0; i < 50; ++i) {
    const ComplexFreq z{nu_d(rng), t_d(rng)};
    const cplx a = transfer_function(plain, z);
    CHECK(std::abs(transfer_function(cfs, z) - a) <= 1e-12 * std::abs(a));
    CHECK(std::abs(transfer_function(upml, z) - a) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("row rendering matches the governing equations (golden)") {
  DispersionParams p;
  p.eps_inf = 2.0;
  p.sigma_bar = 0.125;
  p.debye = {{1.0, 3.0}};
  p.lorentz = {{2.0, 0.5, 4.0, 0.25}};
  const PmlStretch s{StretchKind::Uniaxial, 0.5, 0.0};
  const BlockSystem sys = assemble(SystemVariant::DispersionUpml, p, s);
  const std::vector<std::string> rows = describe_rows(sys);
  // rho = a + d = 1.5; E diag = sigma_bar + rho + eps_inf*sigma = 2.625
  const std::vector<std::string> expected = {
      "d/dt[2*E] + 2.625*E - 2.5*p_L1[0] + j_L2[0] + 0.5*p_L2[0] + S - dx(H) = F",
      "d/dt[H] + 0.5*H - dx(E) = 0",
      "d/dt[p_L1[0]] - E + 3*p_L1[0] = 0",
      "d/dt[j_L2[0]] - 1.875*E + 0.25*j_L2[0] + 4*p_L2[0] = 0",
      "d/dt[p_L2[0]] - 0.5*E - j_L2[0] = 0",
      "d/dt[S] - 0.0625*E = 0",
  };
  REQUIRE(rows.size() == expected.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i] == expected[i]);
}

TEST_CASE("blocksystem JSON roundtrips the matrices") {
  DispersionParams p = mixed_medium();
  const BlockSystem sys = assemble(SystemVariant::Dispersion, p, {});
  const std::string js = blocksystem_to_json(sys);
  CHECK(js.find("\"variant\": \"dispersion\"") != std::string::npos);
  CHECK(js.find("p_L1[0]") != std::string::npos);
}

TEST_CASE("stretched-vacuum block serializes to the golden document") {
  DispersionParams vac;
  const BlockSystem sys =
      assemble(SystemVariant::CfsVacuum, vac, {StretchKind::CFS, 1.0, 1.0});
  const auto expected = nlohmann::json::parse(R"({
    "variant": "cfs-vacuum",
    "dim": 4,
    "layout": [
      {"name": "E", "chain": "E"},
      {"name": "H", "chain": "H"},
      {"name": "R", "chain": "E"},
      {"name": "Q", "chain": "H"}
    ],
    "M0": [1.0, 0.0, 0.0, 0.0,  0.0, 1.0, 0.0, 0.0,
           0.0, 0.0, 1.0, 0.0,  0.0, 0.0, 0.0, 1.0],
    "M1": [ 1.0, 0.0, -1.0,  0.0,   0.0,  1.0, 0.0, -1.0,
           -1.0, 0.0,  1.0,  0.0,   0.0, -1.0, 0.0,  1.0],
    "rho": 0.0,
    "spatial_tag": "dx-1d",
    "provenance": [
      "auxiliary roles inferred from M1 sparsity: R pairs with E, Q with H"
    ]
  })");
  CHECK(nlohmann::json::parse(blocksystem_to_json(sys)) == expected);
}
