#include <doctest.h>

#include "cafqmc/model.hpp"

#include <stdexcept>

using namespace cafqmc;

TEST_CASE("chain bonds and hopping") {
  const auto open = chain(4, Boundary::open);
  CHECK(open.bonds().size() == 3);
  const auto ring = chain(4);
  CHECK(ring.bonds().size() == 4);
  // extent 2 with periodic wrap yields a single bond
  CHECK(chain(2).bonds().size() == 1);

  const Eigen::MatrixXd k = build_hopping_matrix(ring, 1.5);
  CHECK(k(0, 1) == -1.5);
  CHECK(k(0, 3) == -1.5);
  CHECK(k(0, 2) == 0.0);
  CHECK((k - k.transpose()).norm() == 0.0);
}

TEST_CASE("square lattice numbering") {
  const auto sq = square(3, 2, Boundary::open);
  CHECK(sq.site_count() == 6);
  CHECK(sq.bonds().size() == 7);
  const Eigen::MatrixXd k = build_hopping_matrix(sq, 1.0);
  CHECK(k(0, 3) == -1.0);  // (0,0)-(0,1)
  CHECK(k(2, 3) == 0.0);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(chain(1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(fermi_hubbard(chain(3), 1.0, 2.0, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(bose_hubbard(chain(3), 0.0, 2.0, 3), std::invalid_argument);
  CHECK_NOTHROW(bose_hubbard(chain(3), 1.0, 2.0, 3));
}

TEST_CASE("interaction coefficients") {
  CHECK(interaction_coefficient(fermi_hubbard(chain(4), 1.0, 4.0, 2, 2)) == 4.0);
  CHECK(interaction_coefficient(bose_hubbard(chain(3), 1.0, 4.0, 3)) == 2.0);
  const auto terms = interaction_terms(bose_hubbard(chain(3), 1.0, 4.0, 3));
  CHECK(terms.size() == 3);
  CHECK(terms[1].form == InteractionForm::density_squared);
}
