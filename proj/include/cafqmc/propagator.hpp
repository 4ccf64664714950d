#pragma once

#include "cafqmc/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace cafqmc {

using cplx = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Imaginary-time grid. `groups` is the number of stabilization groups and
/// divides `slices`.
struct DiscretizationSpec {
  double beta = 1.0;
  double dtau = 0.02;
  int slices = 50;
  int groups = 2;

  /// Rounds beta/dtau to the nearest slice count and readjusts dtau so that
  /// slices * dtau == beta. groups <= 0 picks the default (each group spans at
  /// most 0.5 in imaginary time).
  static DiscretizationSpec make(double beta, double dtau = 0.02, int groups = 0);
};

enum class FieldKind { continuous, discrete };

/// Auxiliary fields, one row per time slice and one column per site.
struct FieldConfiguration {
  FieldKind kind = FieldKind::discrete;
  Eigen::MatrixXd values;

  int slices() const { return static_cast<int>(values.rows()); }
  int sites() const { return static_cast<int>(values.cols()); }
  void validate(int slices, int sites) const;

  static FieldConfiguration constant(FieldKind kind, int slices, int sites, double value);
};

/// Discrete Hirsch decoupling of exp(-dtau U n_up n_down):
///   (1/2) exp(-dtau U (n_up + n_down)/2) sum_s exp(alpha s (n_up - n_down)),
/// with cosh(alpha) = exp(dtau U / 2).
struct HirschCoupling {
  double alpha = 0.0;
  double density_shift = 0.0;  // dtau U / 2
  double prefactor = 0.5;
};

HirschCoupling hirsch_decompose(double U, double dtau);

/// c = sqrt(-dtau U); purely imaginary for U > 0. Averaging exp(c phi n) over a
/// standard normal phi gives exp(-dtau (U/2) n^2).
cplx boson_coupling(double U, double dtau);

/// exp(-dtau K / 2) from the symmetric eigendecomposition of K.
Eigen::MatrixXd half_kinetic_propagator(const Eigen::MatrixXd& hopping, double dtau);

/// Per-slice propagators B_sigma(l) = E_half * D_sigma(l) * E_half.
template <typename Scalar>
struct SlicePropagator {
  std::vector<Matrix<Scalar>> sectors;
};

/// Builds the diagonal interaction factors and slice propagators for one model
/// and time grid. Fermions use real Hirsch fields (two spin sectors), bosons use
/// continuous Gaussian fields with a complex coupling (one sector).
class SliceFactory {
 public:
  SliceFactory(const ModelSpec& model, const DiscretizationSpec& disc);

  const ModelSpec& model() const { return model_; }
  const DiscretizationSpec& discretization() const { return disc_; }
  const Eigen::MatrixXd& hopping() const { return hopping_; }
  const Eigen::MatrixXd& half_kinetic() const { return half_; }
  int sectors() const { return model_.statistics == Statistics::fermion ? 2 : 1; }
  FieldKind field_kind() const {
    return model_.statistics == Statistics::fermion ? FieldKind::discrete : FieldKind::continuous;
  }
  const HirschCoupling& hirsch() const { return hirsch_; }
  cplx boson_coupling() const { return boson_; }

  /// Diagonal factor for a single site: exp(+-alpha s - dtau U/2) or exp(c phi).
  double fermion_factor(int sector, double field) const;
  cplx boson_factor(double field) const;
  /// Bosons: exp(-c nbar sum phi) with nbar = N / N_s. Multiplying Z(phi) by it
  /// turns the decoupled operator n_i into n_i - nbar, which only shifts the
  /// energy by a constant at fixed N but removes the uniform-mode phase.
  /// Fermions: 1.
  cplx background_phase(double field_sum) const;
  cplx background_phase(const FieldConfiguration& fields) const;

  Eigen::VectorXd fermion_diagonal(int sector, const Eigen::Ref<const Eigen::RowVectorXd>& fields) const;
  Eigen::VectorXcd boson_diagonal(const Eigen::Ref<const Eigen::RowVectorXd>& fields) const;

  Eigen::MatrixXd fermion_slice(int sector, const Eigen::Ref<const Eigen::RowVectorXd>& fields) const;
  Eigen::MatrixXcd boson_slice(const Eigen::Ref<const Eigen::RowVectorXd>& fields) const;

  SlicePropagator<double> build_fermion_slice(const FieldConfiguration& fields, int slice) const;
  SlicePropagator<cplx> build_boson_slice(const FieldConfiguration& fields, int slice) const;

  /// All slices of one sector in time order l = 1..L.
  std::vector<Eigen::MatrixXd> fermion_slices(int sector, const FieldConfiguration& fields) const;
  std::vector<Eigen::MatrixXcd> boson_slices(const FieldConfiguration& fields) const;

 private:
  ModelSpec model_;
  DiscretizationSpec disc_;
  Eigen::MatrixXd hopping_;
  Eigen::MatrixXd half_;
  HirschCoupling hirsch_;
  cplx boson_ = 0.0;
};

/// Factored matrix U * diag(D) * V with U unitary and D positive.
template <typename Scalar>
struct UDV {
  Matrix<Scalar> U;
  Eigen::VectorXd D;
  Matrix<Scalar> V;

  static UDV identity(Eigen::Index n) {
    return {Matrix<Scalar>::Identity(n, n), Eigen::VectorXd::Ones(n), Matrix<Scalar>::Identity(n, n)};
  }
  Matrix<Scalar> dense() const { return U * D.asDiagonal() * V; }
  Eigen::Index size() const { return D.size(); }
};

class SingularFactorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Re-factors X = Q R P^T into U = Q, D = |diag R|, V = D^-1 R P^T.
template <typename Scalar>
UDV<Scalar> factorize(const Matrix<Scalar>& x) {
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(x);
  const Eigen::Index n = x.rows();
  Matrix<Scalar> r = qr.matrixR().template triangularView<Eigen::Upper>();
  UDV<Scalar> out;
  out.U = qr.householderQ();
  out.D.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = std::abs(r(i, i));
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SingularFactorError("singular intermediate factor in stabilized product");
    }
    out.D(i) = d;
    r.row(i) /= Scalar(d);
  }
  out.V = r * qr.colsPermutation().transpose();
  return out;
}

/// B * (U D V), keeping the scales in D.
template <typename Scalar>
UDV<Scalar> left_multiply(const Matrix<Scalar>& b, const UDV<Scalar>& f) {
  UDV<Scalar> g = factorize<Scalar>((b * f.U) * f.D.asDiagonal());
  g.V = g.V * f.V;
  return g;
}

/// (Ul Dl Vl) * (Ur Dr Vr).
template <typename Scalar>
UDV<Scalar> multiply(const UDV<Scalar>& left, const UDV<Scalar>& right) {
  const Matrix<Scalar> middle = left.D.asDiagonal() * (left.V * right.U) * right.D.asDiagonal();
  UDV<Scalar> g = factorize<Scalar>(middle);
  g.U = left.U * g.U;
  g.V = g.V * right.V;
  return g;
}

/// Product B_L ... B_1 of slices given in time order. Slices are multiplied
/// densely within each of `groups` groups; the running product is re-factored
/// between groups.
template <typename Scalar>
UDV<Scalar> stabilized_product(std::span<const Matrix<Scalar>> slices, int groups) {
  if (slices.empty()) throw std::invalid_argument("stabilized_product needs at least one slice");
  const int count = static_cast<int>(slices.size());
  if (groups <= 0 || count % groups != 0) {
    throw std::invalid_argument("stabilization group count must divide the slice count");
  }
  const int per_group = count / groups;
  const Eigen::Index n = slices.front().rows();
  UDV<Scalar> acc = UDV<Scalar>::identity(n);
  for (int g = 0; g < groups; ++g) {
    Matrix<Scalar> block = slices[g * per_group];
    for (int l = g * per_group + 1; l < (g + 1) * per_group; ++l) block = slices[l] * block;
    acc = left_multiply<Scalar>(block, acc);
  }
  return acc;
}

template <typename Scalar>
Matrix<Scalar> dense_product(std::span<const Matrix<Scalar>> slices) {
  Matrix<Scalar> m = slices.front();
  for (std::size_t l = 1; l < slices.size(); ++l) m = slices[l] * m;
  return m;
}

/// Eigendecomposition M = P diag(weights) P_inv of the full propagator
/// product, with weights = exp(-beta * energies). Levels are sorted by
/// ascending Re(energy), ties by ascending Im(energy).
struct EffectiveSpectrum {
  double beta = 1.0;
  Eigen::VectorXcd weights;
  Eigen::VectorXcd energies;
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd P_inv;
  double condition = 1.0;
  bool valid = true;

  Eigen::Index size() const { return weights.size(); }
  /// U^{ij}_{lambda mu} = <lambda|i><j|mu> = P_inv(lambda, i) P(j, mu).
  cplx overlap(Eigen::Index lambda, Eigen::Index mu, Eigen::Index i, Eigen::Index j) const {
    return P_inv(lambda, i) * P(j, mu);
  }
  Eigen::MatrixXcd reconstruct() const { return P * weights.asDiagonal() * P_inv; }
};

inline constexpr double kMaxEigenvectorCondition = 1e12;

/// With vectors = false only weights and energies are filled; P, P_inv and
/// the condition check are skipped (valid then only means finite weights).
EffectiveSpectrum effective_spectrum(const Eigen::MatrixXd& product, double beta, bool vectors = true);
EffectiveSpectrum effective_spectrum(const Eigen::MatrixXcd& product, double beta, bool vectors = true);

template <typename Scalar>
EffectiveSpectrum effective_spectrum(const UDV<Scalar>& product, double beta) {
  return effective_spectrum(Matrix<Scalar>(product.dense()), beta);
}

}  // namespace cafqmc
