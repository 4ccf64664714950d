#include <doctest.h>

#include "cafqmc/observables.hpp"
#include "cafqmc/sampler.hpp"
#include "oracles.hpp"

#include <random>

using namespace cafqmc;

namespace {

FieldConfiguration random_fields(const SliceFactory& f, std::mt19937_64& rng) {
  const auto& d = f.discretization();
  const int ns = f.model().site_count();
  FieldConfiguration fc = FieldConfiguration::constant(f.field_kind(), d.slices, ns, 0.0);
  std::normal_distribution<double> g;
  for (int l = 0; l < d.slices; ++l)
    for (int i = 0; i < ns; ++i)
      fc.values(l, i) = f.field_kind() == FieldKind::discrete ? (rng() % 2 ? 1.0 : -1.0) : g(rng);
  return fc;
}

}  // namespace

TEST_CASE("fermion density matrices match Fock traces") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const ModelSpec m = fermi_hubbard(chain(2, Boundary::open), 1.0, 4.0, 1, 1);
    const SliceFactory f(m, DiscretizationSpec::make(0.6, 0.1, 2));
    const auto fields = random_fields(f, rng);
    std::vector<Eigen::MatrixXcd> prods;
    std::vector<EffectiveSpectrum> specs;
    std::vector<OccupationTable> tables;
    for (int s = 0; s < 2; ++s) {
      const Eigen::MatrixXd p = dense_product<double>(f.fermion_slices(s, fields));
      prods.push_back(p.cast<cplx>());
      specs.push_back(effective_spectrum(p, 0.6));
      tables.push_back(ratio_chain(specs.back().weights, 1, Statistics::fermion));
    }
    for (int s = 0; s < 2; ++s) {
      const auto ref = oracle::fock_observables(prods[s], 1, true);
      CHECK((one_body_dm(specs[s], tables[s]) - ref.d1).cwiseAbs().maxCoeff() < 1e-10);
    }
    const auto [z, dbl] = oracle::spinful_doublon(prods[0], 1, prods[1], 1);
    const auto d = local_doublon(specs[0], specs[1], tables[0], tables[1]);
    CHECK((d - dbl).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("three-site fermion, two particles of one spin") {
  std::mt19937_64 rng(4);
  const ModelSpec m = fermi_hubbard(chain(3), 1.0, 2.0, 2, 1);
  const SliceFactory f(m, DiscretizationSpec::make(0.5, 0.05, 1));
  const auto fields = random_fields(f, rng);
  const Eigen::MatrixXd p = dense_product<double>(f.fermion_slices(0, fields));
  const auto spec = effective_spectrum(p, 0.5);
  const auto table = ratio_chain(spec.weights, 2, Statistics::fermion);
  const auto ref = oracle::fock_observables(p.cast<cplx>(), 2, true);
  const Eigen::MatrixXcd d1 = one_body_dm(spec, table);
  CHECK((d1 - ref.d1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(d1.trace() - 2.0) < 1e-8);
  // A single sample is not Hermitian; reversing the slice order transposes it.
  const Eigen::MatrixXd pt = p.transpose();
  const auto spec_t = effective_spectrum(pt, 0.5);
  const Eigen::MatrixXcd d1t = one_body_dm(spec_t, ratio_chain(spec_t.weights, 2, Statistics::fermion));
  CHECK((d1t - d1.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("free fermion chain matches the single-particle thermal density matrix") {
  const ModelSpec m = fermi_hubbard(chain(3, Boundary::open), 1.0, 0.0, 1, 0);
  const SliceFactory f(m, DiscretizationSpec::make(1.0, 0.1, 1));
  const auto fields = FieldConfiguration::constant(FieldKind::discrete, 10, 3, 1.0);
  const Eigen::MatrixXd p = dense_product<double>(f.fermion_slices(0, fields));
  const auto spec = effective_spectrum(p, 1.0);
  const auto d1 = one_body_dm(spec, ratio_chain(spec.weights, 1, Statistics::fermion));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.hopping());
  const Eigen::MatrixXd rho = es.eigenvectors() * (-es.eigenvalues().array()).exp().matrix().asDiagonal() *
                              es.eigenvectors().transpose();
  CHECK((d1 - (rho / rho.trace()).cast<cplx>()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("boson local moments match Fock traces") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const ModelSpec m = bose_hubbard(chain(2, Boundary::open), 1.0, 2.0, 2);
    const SliceFactory f(m, DiscretizationSpec::make(0.4, 0.1, 1));
    const auto fields = random_fields(f, rng);
    const Eigen::MatrixXcd p = dense_product<cplx>(f.boson_slices(fields));
    const auto spec = effective_spectrum(p, 0.4);
    const auto table = full_table(spec.weights, 2, Statistics::boson);
    const auto ref = oracle::fock_observables(p, 2, false);
    CHECK((one_body_dm(spec, table) - ref.d1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((local_moment_boson(spec, table) - ref.n2).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("three sites, three bosons") {
    const ModelSpec m = bose_hubbard(chain(3), 1.0, 4.0, 3);
    const SliceFactory f(m, DiscretizationSpec::make(0.3, 0.05, 1));
    const auto fields = random_fields(f, rng);
    const Eigen::MatrixXcd p = dense_product<cplx>(f.boson_slices(fields));
    const auto spec = effective_spectrum(p, 0.3);
    const auto table = full_table(spec.weights, 3, Statistics::boson);
    const auto ref = oracle::fock_observables(p, 3, false);
    CHECK((local_moment_boson(spec, table) - ref.n2).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("diagonal spectra") {
  EffectiveSpectrum s;
  s.weights = Eigen::Vector3cd(2.0, 1.0, 0.5);
  s.P = Eigen::MatrixXcd::Identity(3, 3);
  s.P_inv = s.P;
  const auto fermions = ratio_chain(s.weights, 2, Statistics::fermion);
  const Eigen::MatrixXcd d1 = one_body_dm(s, fermions);
  CHECK((d1.diagonal() - fermions.occupations).norm() < 1e-15);
  CHECK((d1 - Eigen::MatrixXcd(d1.diagonal().asDiagonal())).norm() == 0.0);

  const auto bosons = full_table(s.weights, 3, Statistics::boson);
  CHECK((local_moment_boson(s, bosons) - bosons.squares).norm() < 1e-14);
  const auto one = full_table(s.weights, 1, Statistics::boson);
  CHECK((local_moment_boson(s, one) - one.occupations).norm() < 1e-14);

  const auto none = ratio_chain(s.weights, 0, Statistics::fermion);
  CHECK(local_doublon(d1, one_body_dm(s, none)).norm() == 0.0);
}

TEST_CASE("energies") {
  SUBCASE("single site, full filling") {
    const ModelSpec m = fermi_hubbard(LatticeSpec{{1}, Boundary::open}, 1.0, 3.0, 1, 1);
    const Eigen::MatrixXcd d1 = Eigen::MatrixXcd::Identity(1, 1);
    const std::vector<Eigen::MatrixXcd> ob{d1, d1};
    const auto e = energies(m, build_hopping_matrix(m.lattice, 1.0), ob, local_doublon(d1, d1));
    CHECK(e.potential == cplx(3.0));
    CHECK(e.total == e.kinetic + e.potential);
  }
  SUBCASE("t = 0 fermion at full filling") {
    const ModelSpec m = fermi_hubbard(chain(4), 1.0, 2.5, 4, 4);
    const Eigen::MatrixXcd d1 = Eigen::MatrixXcd::Identity(4, 4);
    const std::vector<Eigen::MatrixXcd> ob{d1, d1};
    const auto e = energies(m, Eigen::MatrixXd::Zero(4, 4), ob, local_doublon(d1, d1));
    CHECK(e.potential == cplx(2.5 * 4));
    CHECK(e.kinetic == cplx(0.0));
  }
  SUBCASE("U = 0") {
    const ModelSpec m = fermi_hubbard(chain(4), 1.0, 0.0, 2, 2);
    const Eigen::MatrixXcd d1 = 0.5 * Eigen::MatrixXcd::Ones(4, 4);
    const std::vector<Eigen::MatrixXcd> ob{d1, d1};
    const auto e = energies(m, build_hopping_matrix(m.lattice, 1.0), ob, local_doublon(d1, d1));
    CHECK(e.potential == cplx(0.0));
    CHECK(std::abs(e.kinetic - cplx(-8.0)) < 1e-14);
  }
  SUBCASE("bosons use U/2 n^2") {
    const ModelSpec m = bose_hubbard(chain(2), 1.0, 4.0, 2);
    const std::vector<Eigen::MatrixXcd> ob{Eigen::MatrixXcd::Identity(2, 2)};
    const auto e = energies(m, Eigen::MatrixXd::Zero(2, 2), ob, Eigen::Vector2cd(1.0, 1.0));
    CHECK(e.potential == cplx(4.0));
  }
}

TEST_CASE("single boson energy equals the ideal canonical average") {
  const ModelSpec m = bose_hubbard(chain(4), 1.0, 0.0, 1);
  const SliceFactory f(m, DiscretizationSpec::make(1.0, 0.1, 1));
  const auto fields = FieldConfiguration::constant(FieldKind::continuous, 10, 4, 0.7);
  const auto ev = evaluate_fields(f, fields);
  const auto meas = measure(m, f.hopping(), ev);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.hopping());
  const Eigen::ArrayXd w = (-es.eigenvalues().array()).exp();
  const double ideal = (w * es.eigenvalues().array()).sum() / w.sum();
  CHECK(std::abs(meas.energy.total - ideal) < 1e-10);
}
