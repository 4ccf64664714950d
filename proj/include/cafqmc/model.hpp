#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace cafqmc {

enum class Boundary { periodic, open };
enum class Statistics { boson, fermion };

/// Hypercubic lattice (1D chain or 2D square), sites numbered x + lx * y.
struct LatticeSpec {
  std::vector<int> extents;
  Boundary boundary = Boundary::periodic;

  int dimensionality() const { return static_cast<int>(extents.size()); }
  int site_count() const;

  /// Unique nearest-neighbour pairs (i < j). A periodic dimension of extent 2
  /// contributes a single bond, not two.
  std::vector<std::pair<int, int>> bonds() const;

  /// Throws std::invalid_argument on a malformed lattice.
  void validate() const;
};

LatticeSpec chain(int sites, Boundary boundary = Boundary::periodic);
LatticeSpec square(int lx, int ly, Boundary boundary = Boundary::periodic);

struct ModelSpec {
  LatticeSpec lattice;
  Statistics statistics = Statistics::fermion;
  double t = 1.0;
  double U = 0.0;
  int particles = 0;  // bosons
  int n_up = 0;       // fermions
  int n_down = 0;

  int site_count() const { return lattice.site_count(); }
  void validate() const;
};

ModelSpec fermi_hubbard(LatticeSpec lattice, double t, double U, int n_up, int n_down);
ModelSpec bose_hubbard(LatticeSpec lattice, double t, double U, int particles);

/// K_ij = -t on nearest-neighbour bonds, zero elsewhere.
Eigen::MatrixXd build_hopping_matrix(const LatticeSpec& lattice, double t);

enum class InteractionForm { doublon, density_squared };

struct InteractionTerm {
  int site;
  double coefficient;
  InteractionForm form;
};

/// Coefficient multiplying the local operator: U for n_up n_down, U/2 for n^2.
double interaction_coefficient(const ModelSpec& model);

std::vector<InteractionTerm> interaction_terms(const ModelSpec& model);

}  // namespace cafqmc
