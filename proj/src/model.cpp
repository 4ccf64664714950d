#include "cafqmc/model.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace cafqmc {

int LatticeSpec::site_count() const {
  int n = 1;
  for (int e : extents) n *= e;
  return n;
}

void LatticeSpec::validate() const {
  if (extents.empty() || extents.size() > 2) {
    throw std::invalid_argument("lattice dimensionality must be 1 or 2");
  }
  for (int e : extents) {
    if (e < 1) throw std::invalid_argument("lattice extent must be positive");
    if (boundary == Boundary::periodic && e < 2) {
      throw std::invalid_argument("periodic lattice extent must be at least 2, got " +
                                  std::to_string(e));
    }
  }
}

std::vector<std::pair<int, int>> LatticeSpec::bonds() const {
  validate();
  std::set<std::pair<int, int>> unique;
  const int lx = extents[0];
  const int ly = extents.size() == 2 ? extents[1] : 1;
  auto add = [&](int a, int b) {
    if (a == b) return;
    unique.emplace(std::min(a, b), std::max(a, b));
  };
  for (int y = 0; y < ly; ++y) {
    for (int x = 0; x < lx; ++x) {
      const int s = x + lx * y;
      if (x + 1 < lx) {
        add(s, s + 1);
      } else if (boundary == Boundary::periodic) {
        add(s, lx * y);
      }
      if (extents.size() == 2) {
        if (y + 1 < ly) {
          add(s, s + lx);
        } else if (boundary == Boundary::periodic) {
          add(s, x);
        }
      }
    }
  }
  return {unique.begin(), unique.end()};
}

LatticeSpec chain(int sites, Boundary boundary) { return LatticeSpec{{sites}, boundary}; }

LatticeSpec square(int lx, int ly, Boundary boundary) { return LatticeSpec{{lx, ly}, boundary}; }

void ModelSpec::validate() const {
  lattice.validate();
  if (!(t > 0.0)) throw std::invalid_argument("hopping t must be positive");
  const int ns = site_count();
  if (statistics == Statistics::boson) {
    if (particles < 0) throw std::invalid_argument("boson particle number must be non-negative");
  } else {
    if (n_up < 0 || n_up > ns) throw std::invalid_argument("n_up must lie in [0, N_s]");
    if (n_down < 0 || n_down > ns) throw std::invalid_argument("n_down must lie in [0, N_s]");
  }
}

ModelSpec fermi_hubbard(LatticeSpec lattice, double t, double U, int n_up, int n_down) {
  ModelSpec m;
  m.lattice = std::move(lattice);
  m.statistics = Statistics::fermion;
  m.t = t;
  m.U = U;
  m.n_up = n_up;
  m.n_down = n_down;
  m.validate();
  return m;
}

ModelSpec bose_hubbard(LatticeSpec lattice, double t, double U, int particles) {
  ModelSpec m;
  m.lattice = std::move(lattice);
  m.statistics = Statistics::boson;
  m.t = t;
  m.U = U;
  m.particles = particles;
  m.validate();
  return m;
}

Eigen::MatrixXd build_hopping_matrix(const LatticeSpec& lattice, double t) {
  const int n = lattice.site_count();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : lattice.bonds()) {
    k(i, j) = -t;
    k(j, i) = -t;
  }
  return k;
}

double interaction_coefficient(const ModelSpec& model) {
  return model.statistics == Statistics::fermion ? model.U : 0.5 * model.U;
}

std::vector<InteractionTerm> interaction_terms(const ModelSpec& model) {
  const auto form = model.statistics == Statistics::fermion ? InteractionForm::doublon
                                                            : InteractionForm::density_squared;
  const double c = interaction_coefficient(model);
  std::vector<InteractionTerm> terms;
  terms.reserve(model.site_count());
  for (int i = 0; i < model.site_count(); ++i) terms.push_back({i, c, form});
  return terms;
}

}  // namespace cafqmc
