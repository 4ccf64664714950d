#pragma once

#include "cafqmc/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace cafqmc {

inline constexpr Eigen::Index kMaxEdDimension = 20000;

/// Fixed-particle-number occupation basis. Bosons store one occupation vector
/// per state; fermions store (up, down) bitstrings with fermion operators
/// ordered all up sites first, then all down sites.
class FockBasis {
 public:
  static FockBasis bosons(int sites, int particles);
  static FockBasis fermions(int sites, int n_up, int n_down);
  static FockBasis for_model(const ModelSpec& model);

  Statistics statistics() const { return statistics_; }
  int sites() const { return sites_; }
  Eigen::Index size() const;

  const std::vector<int>& occupations(Eigen::Index k) const { return bosons_[k]; }
  std::pair<std::uint32_t, std::uint32_t> bits(Eigen::Index k) const { return fermions_[k]; }

  /// -1 when the state is not in the basis.
  Eigen::Index index_of(const std::vector<int>& occupations) const;
  Eigen::Index index_of(std::uint32_t up, std::uint32_t down) const;

 private:
  Statistics statistics_ = Statistics::fermion;
  int sites_ = 0;
  int particles_ = 0;
  std::vector<std::vector<int>> bosons_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> fermions_;
  std::unordered_map<std::uint64_t, Eigen::Index> lookup_;
};

struct HamiltonianED {
  Eigen::MatrixXd kinetic;
  Eigen::MatrixXd potential;

  Eigen::MatrixXd total() const { return kinetic + potential; }
};

HamiltonianED build_hamiltonian(const ModelSpec& model, const FockBasis& basis);

/// Eigenvalues ascending, with <alpha|K|alpha> and <alpha|V|alpha>.
struct SpectrumED {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd kinetic;
  Eigen::VectorXd potential;

  double ground() const { return energies(0); }
};

SpectrumED diagonalize(const HamiltonianED& h);
SpectrumED diagonalize(const ModelSpec& model);

struct ThermalED {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double log_z = 0.0;
  double particles = 0.0;  // grand canonical only
};

ThermalED canonical_thermal(const SpectrumED& spectrum, double beta);

/// Every (N_up, N_down) sector of a fermion model, diagonalized once and
/// reused for any (beta, mu).
class GrandCanonicalED {
 public:
  explicit GrandCanonicalED(const ModelSpec& model);

  ThermalED thermal(double beta, double mu) const;

 private:
  struct Sector {
    int particles;
    SpectrumED spectrum;
  };
  std::vector<Sector> sectors_;
};

ThermalED grand_canonical_thermal(const ModelSpec& model, double beta, double mu);

}  // namespace cafqmc
