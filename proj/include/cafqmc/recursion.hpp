#pragma once

#include "cafqmc/model.hpp"
#include "cafqmc/propagator.hpp"
#include "cafqmc/scaled.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace cafqmc {

// Canonical recursions over an effective single-particle spectrum. All
// functions take the level weights mu_gamma = exp(-beta eps_gamma), ordered by
// ascending Re(eps) (descending |mu|) as produced by effective_spectrum().

/// Spectral cutoff threshold xi. Infinite disables the cutoff.
class CutoffSpec {
 public:
  CutoffSpec() = default;
  explicit CutoffSpec(double xi);
  static CutoffSpec none() { return {}; }

  double xi() const { return xi_; }
  bool enabled() const { return std::isfinite(xi_); }
  bool operator==(const CutoffSpec&) const = default;

 private:
  double xi_ = std::numeric_limits<double>::infinity();
};

/// z_k = sum_gamma mu_gamma^k for k = 1..k_max (entry k-1).
Eigen::VectorXcd power_sums(const Eigen::VectorXcd& weights, int k_max);
std::vector<ScaledComplex> scaled_power_sums(const Eigen::VectorXcd& weights, int k_max);

/// Z_0..Z_N from Z_N = (1/N) sum_k (+-1)^{k+1} z_k Z_{N-k}, carried in scaled form.
struct PartitionChain {
  std::vector<ScaledComplex> Z;

  int particles() const { return static_cast<int>(Z.size()) - 1; }
  double log_abs(int n) const { return Z.at(n).log_abs(); }
  cplx phase(int n) const { return Z.at(n).phase(); }
  cplx value(int n) const { return Z.at(n).value(); }
};

PartitionChain partition_recursion(const Eigen::VectorXcd& weights, int particles, Statistics statistics);

/// Levels [lo, hi] take part in the recursion; levels below lo are frozen
/// occupied and levels above hi are frozen empty.
struct CutoffWindow {
  int lo = 0;
  int hi = -1;

  int frozen_occupied() const { return lo; }
  int size() const { return hi - lo + 1; }
};

CutoffWindow apply_cutoff(const Eigen::VectorXcd& weights, int particles, const CutoffSpec& cutoff);

inline constexpr double kOccupationTolerance = 1e-8;

/// Output of the joint ratio/occupation recursion for one sector.
struct OccupationTable {
  Statistics statistics = Statistics::fermion;
  int particles = 0;
  Eigen::VectorXcd occupations;  // <n_lambda>_N, frozen levels re-inserted
  Eigen::VectorXcd squares;      // <n_lambda^2>_N (filled by fill_moments)
  Eigen::MatrixXcd pairs;        // <n_lambda n_nu>_N, lambda != nu; zero diagonal
  /// Window ratios r_k = Z_{k-1}/Z_k for k = 1..N - frozen, computed on
  /// weights divided by 2^scale_exponent (ratio(k) undoes the scaling).
  std::vector<cplx> scaled_ratios;
  int scale_exponent = 0;
  double log_abs_z = 0.0;
  cplx phase = 1.0;
  CutoffWindow window;
  bool valid = true;

  cplx ratio(int k) const;
  cplx z() const { return std::exp(log_abs_z) * phase; }
};

/// Joint iteration of Z_{k-1}/Z_k = k / sum_lambda mu_lambda <1 +- n_lambda>_{k-1}
/// and <n_lambda>_k = (Z_{k-1}/Z_k) mu_lambda <1 +- n_lambda>_{k-1}. The cutoff
/// only applies to fermions.
OccupationTable ratio_chain(const Eigen::VectorXcd& weights, int particles, Statistics statistics,
                            const CutoffSpec& cutoff = CutoffSpec::none());

/// <n_lambda^2>_N. Bosons recurse on <(1 + n)^2>_{N-1}; fermions return <n>.
Eigen::VectorXcd occupation_squares(const OccupationTable& table, const Eigen::VectorXcd& weights);

/// Symmetric <n_lambda n_nu>_N for lambda != nu (diagonal left zero).
Eigen::MatrixXcd occupation_pairs(const OccupationTable& table, const Eigen::VectorXcd& weights);

/// Convenience: ratio_chain followed by squares and pairs.
OccupationTable full_table(const Eigen::VectorXcd& weights, int particles, Statistics statistics,
                           const CutoffSpec& cutoff = CutoffSpec::none());

/// Z_N(phi) = Z_{N_up}(phi) Z_{N_down}(phi) for spinful fermions.
struct SpinfulTable {
  OccupationTable up;
  OccupationTable down;
  double log_abs_z = 0.0;
  cplx phase = 1.0;
  bool valid = true;
};

SpinfulTable spinful_partition(const Eigen::VectorXcd& weights_up, const Eigen::VectorXcd& weights_down,
                               int n_up, int n_down, const CutoffSpec& cutoff = CutoffSpec::none());

}  // namespace cafqmc
