#include <doctest.h>

#include "cafqmc/ed.hpp"
#include "cafqmc/recursion.hpp"

#include <cmath>

using namespace cafqmc;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

TEST_CASE("Fock basis dimensions and lookup") {
  const auto b = FockBasis::bosons(3, 3);
  CHECK(b.size() == 10);
  CHECK(FockBasis::bosons(4, 5).size() == binomial(8, 5));
  const auto f = FockBasis::fermions(6, 3, 3);
  CHECK(f.size() == 400);
  for (Eigen::Index k = 0; k < b.size(); ++k) CHECK(b.index_of(b.occupations(k)) == k);
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const auto [u, d] = f.bits(k);
    CHECK(f.index_of(u, d) == k);
  }
  CHECK(b.index_of(std::vector<int>{3, 1, 0}) == -1);
}

TEST_CASE("two-site Hubbard spectrum") {
  const ModelSpec m = fermi_hubbard(chain(2, Boundary::open), 1.0, 4.0, 1, 1);
  const auto s = diagonalize(m);
  CHECK(s.energies.size() == 4);
  CHECK(s.ground() == doctest::Approx(-0.82842712).epsilon(1e-8));
  const double r = std::sqrt(16.0 + 16.0);
  const std::vector<double> expected{(4.0 - r) / 2.0, 0.0, 4.0, (4.0 + r) / 2.0};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(s.energies(k) - expected[k]) < 1e-10);
}

TEST_CASE("boson Hamiltonian limits") {
  SUBCASE("t = 0 is diagonal in U/2 n^2") {
    ModelSpec m = bose_hubbard(chain(3), 1.0, 2.0, 3);
    m.t = 1e-300;
    const FockBasis b = FockBasis::for_model(m);
    const auto h = build_hamiltonian(m, b);
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      double e = 0.0;
      for (int n : b.occupations(k)) e += 0.5 * 2.0 * n * n;
      CHECK(h.potential(k, k) == doctest::Approx(e));
    }
    CHECK(h.total().cwiseAbs().sum() - h.total().diagonal().cwiseAbs().sum() < 1e-200);
  }
  SUBCASE("one particle sees the hopping matrix") {
    const ModelSpec m = bose_hubbard(chain(4), 1.0, 3.0, 1);
    const FockBasis b = FockBasis::for_model(m);
    const auto h = build_hamiltonian(m, b);
    const Eigen::MatrixXd k = build_hopping_matrix(m.lattice, 1.0);
    Eigen::MatrixXd in_sites(4, 4);
    for (Eigen::Index a = 0; a < 4; ++a)
      for (Eigen::Index c = 0; c < 4; ++c) {
        int sa = 0, sc = 0;
        for (int i = 0; i < 4; ++i) {
          if (b.occupations(a)[i]) sa = i;
          if (b.occupations(c)[i]) sc = i;
        }
        in_sites(sa, sc) = h.total()(a, c) - 0.5 * 3.0 * (a == c);
      }
    CHECK((in_sites - k).norm() < 1e-14);
  }
}

TEST_CASE("ED matches the free canonical gas") {
  const ModelSpec m = fermi_hubbard(chain(5), 1.0, 0.0, 2, 2);
  const auto s = diagonalize(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_hopping_matrix(m.lattice, 1.0));
  for (double beta : {0.3, 1.0, 4.0}) {
    const Eigen::VectorXcd w = (-beta * es.eigenvalues().array()).exp().cast<cplx>();
    const auto t = ratio_chain(w, 2, Statistics::fermion);
    const double per_spin = (t.occupations.real().array() * es.eigenvalues().array()).sum();
    CHECK(canonical_thermal(s, beta).total == doctest::Approx(2.0 * per_spin).epsilon(1e-10));
  }
}

TEST_CASE("canonical energy decreases on cooling") {
  const auto s = diagonalize(fermi_hubbard(chain(4), 1.0, 3.0, 2, 2));
  double prev = canonical_thermal(s, 0.05).total;
  for (double beta = 0.1; beta < 10.0; beta *= 1.5) {
    const double e = canonical_thermal(s, beta).total;
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  const auto th = canonical_thermal(s, 2.0);
  CHECK(th.total == doctest::Approx(th.kinetic + th.potential).epsilon(1e-12));
}

TEST_CASE("grand canonical ED") {
  const ModelSpec m = fermi_hubbard(chain(4), 1.0, 3.0, 2, 2);
  const GrandCanonicalED gc(m);
  CHECK(gc.thermal(2.0, 1.5).particles == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(gc.thermal(1e-6, 0.0).particles == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(gc.thermal(2.0, 0.0).particles < 4.0);
  CHECK(grand_canonical_thermal(m, 2.0, 1.5).total == doctest::Approx(gc.thermal(2.0, 1.5).total));
}

TEST_CASE("size guard") {
  CHECK_THROWS(diagonalize(fermi_hubbard(chain(10), 1.0, 2.0, 5, 5)));
}
