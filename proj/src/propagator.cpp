#include "cafqmc/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cafqmc {

DiscretizationSpec DiscretizationSpec::make(double beta, double dtau, int groups) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(dtau > 0.0)) throw std::invalid_argument("dtau must be positive");
  DiscretizationSpec d;
  d.beta = beta;
  d.slices = std::max(1, static_cast<int>(std::lround(beta / dtau)));
  d.dtau = beta / d.slices;
  if (groups > 0) {
    if (d.slices % groups != 0) {
      throw std::invalid_argument("stabilization group count must divide the slice count");
    }
    d.groups = groups;
  } else {
    const int max_per_group = std::max(1, static_cast<int>(std::floor(0.5 / d.dtau + 1e-9)));
    d.groups = d.slices;
    for (int m = 1; m <= d.slices; ++m) {
      if (d.slices % m == 0 && d.slices / m <= max_per_group) {
        d.groups = m;
        break;
      }
    }
  }
  return d;
}

void FieldConfiguration::validate(int slices_expected, int sites_expected) const {
  if (values.rows() != slices_expected || values.cols() != sites_expected) {
    throw std::invalid_argument("field configuration shape does not match (L, N_s)");
  }
  if (kind == FieldKind::discrete) {
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      const double v = values.data()[k];
      if (v != 1.0 && v != -1.0) throw std::invalid_argument("discrete fields must be +-1");
    }
  }
}

FieldConfiguration FieldConfiguration::constant(FieldKind kind, int slices, int sites, double value) {
  return {kind, Eigen::MatrixXd::Constant(slices, sites, value)};
}

HirschCoupling hirsch_decompose(double U, double dtau) {
  if (!(U > 0.0)) throw std::domain_error("Hirsch decoupling requires U > 0");
  if (!(dtau > 0.0)) throw std::domain_error("Hirsch decoupling requires dtau > 0");
  HirschCoupling h;
  h.alpha = std::acosh(std::exp(0.5 * dtau * U));
  h.density_shift = 0.5 * dtau * U;
  h.prefactor = 0.5;
  return h;
}

cplx boson_coupling(double U, double dtau) {
  if (!(dtau > 0.0)) throw std::domain_error("boson coupling requires dtau > 0");
  return std::sqrt(cplx(-dtau * U, 0.0));
}

Eigen::MatrixXd half_kinetic_propagator(const Eigen::MatrixXd& hopping, double dtau) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hopping);
  const Eigen::VectorXd f = (-0.5 * dtau * es.eigenvalues().array()).exp();
  return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
}

SliceFactory::SliceFactory(const ModelSpec& model, const DiscretizationSpec& disc)
    : model_(model), disc_(disc) {
  model_.validate();
  hopping_ = build_hopping_matrix(model_.lattice, model_.t);
  half_ = half_kinetic_propagator(hopping_, disc_.dtau);
  if (model_.statistics == Statistics::fermion) {
    if (model_.U < 0.0) throw std::domain_error("attractive U is not supported by the Hirsch decoupling");
    if (model_.U > 0.0) {
      hirsch_ = hirsch_decompose(model_.U, disc_.dtau);
    } else {
      hirsch_ = HirschCoupling{};
    }
  } else {
    boson_ = cafqmc::boson_coupling(model_.U, disc_.dtau);
  }
}

double SliceFactory::fermion_factor(int sector, double field) const {
  const double sign = sector == 0 ? 1.0 : -1.0;
  return std::exp(sign * hirsch_.alpha * field - hirsch_.density_shift);
}

cplx SliceFactory::boson_factor(double field) const { return std::exp(boson_ * field); }

cplx SliceFactory::background_phase(double field_sum) const {
  if (model_.statistics == Statistics::fermion) return 1.0;
  const double nbar = static_cast<double>(model_.particles) / model_.site_count();
  return std::exp(-boson_ * nbar * field_sum);
}

cplx SliceFactory::background_phase(const FieldConfiguration& fields) const {
  return background_phase(fields.values.sum());
}

Eigen::VectorXd SliceFactory::fermion_diagonal(int sector,
                                               const Eigen::Ref<const Eigen::RowVectorXd>& fields) const {
  Eigen::VectorXd d(fields.size());
  for (Eigen::Index i = 0; i < fields.size(); ++i) d(i) = fermion_factor(sector, fields(i));
  return d;
}

Eigen::VectorXcd SliceFactory::boson_diagonal(const Eigen::Ref<const Eigen::RowVectorXd>& fields) const {
  Eigen::VectorXcd d(fields.size());
  for (Eigen::Index i = 0; i < fields.size(); ++i) d(i) = boson_factor(fields(i));
  return d;
}

Eigen::MatrixXd SliceFactory::fermion_slice(int sector,
                                            const Eigen::Ref<const Eigen::RowVectorXd>& fields) const {
  return half_ * fermion_diagonal(sector, fields).asDiagonal() * half_;
}

Eigen::MatrixXcd SliceFactory::boson_slice(const Eigen::Ref<const Eigen::RowVectorXd>& fields) const {
  const Eigen::MatrixXcd h = half_.cast<cplx>();
  return h * boson_diagonal(fields).asDiagonal() * h;
}

SlicePropagator<double> SliceFactory::build_fermion_slice(const FieldConfiguration& fields, int slice) const {
  if (model_.statistics != Statistics::fermion || fields.kind != FieldKind::discrete) {
    throw std::invalid_argument("field kind does not match fermion statistics");
  }
  fields.validate(disc_.slices, model_.site_count());
  return {{fermion_slice(0, fields.values.row(slice)), fermion_slice(1, fields.values.row(slice))}};
}

SlicePropagator<cplx> SliceFactory::build_boson_slice(const FieldConfiguration& fields, int slice) const {
  if (model_.statistics != Statistics::boson || fields.kind != FieldKind::continuous) {
    throw std::invalid_argument("field kind does not match boson statistics");
  }
  fields.validate(disc_.slices, model_.site_count());
  return {{boson_slice(fields.values.row(slice))}};
}

std::vector<Eigen::MatrixXd> SliceFactory::fermion_slices(int sector, const FieldConfiguration& fields) const {
  if (model_.statistics != Statistics::fermion || fields.kind != FieldKind::discrete) {
    throw std::invalid_argument("field kind does not match fermion statistics");
  }
  fields.validate(disc_.slices, model_.site_count());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(disc_.slices);
  for (int l = 0; l < disc_.slices; ++l) out.push_back(fermion_slice(sector, fields.values.row(l)));
  return out;
}

std::vector<Eigen::MatrixXcd> SliceFactory::boson_slices(const FieldConfiguration& fields) const {
  if (model_.statistics != Statistics::boson || fields.kind != FieldKind::continuous) {
    throw std::invalid_argument("field kind does not match boson statistics");
  }
  fields.validate(disc_.slices, model_.site_count());
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(disc_.slices);
  for (int l = 0; l < disc_.slices; ++l) out.push_back(boson_slice(fields.values.row(l)));
  return out;
}

namespace {

EffectiveSpectrum assemble(const Eigen::VectorXcd& mu, const Eigen::MatrixXcd* vectors, double beta) {
  const Eigen::Index n = mu.size();
  EffectiveSpectrum s;
  s.beta = beta;
  Eigen::VectorXcd energies(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    energies(k) = mu(k) == cplx(0.0) ? cplx(std::numeric_limits<double>::infinity(), 0.0)
                                     : -std::log(mu(k)) / beta;
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (energies(a).real() != energies(b).real()) return energies(a).real() < energies(b).real();
    return energies(a).imag() < energies(b).imag();
  });
  s.weights.resize(n);
  s.energies.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.weights(k) = mu(order[k]);
    s.energies(k) = energies(order[k]);
  }
  if (!vectors) {
    s.condition = std::numeric_limits<double>::quiet_NaN();
    s.valid = s.weights.allFinite();
    return s;
  }
  s.P.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) s.P.col(k) = vectors->col(order[k]);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(s.P);
  const double rcond = lu.rcond();
  s.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  s.P_inv = lu.inverse();
  s.valid = std::isfinite(s.condition) && s.condition <= kMaxEigenvectorCondition &&
            s.P_inv.allFinite() && s.weights.allFinite();
  return s;
}

}  // namespace

EffectiveSpectrum effective_spectrum(const Eigen::MatrixXd& product, double beta, bool vectors) {
  if (!product.allFinite()) {
    EffectiveSpectrum s;
    s.beta = beta;
    s.valid = false;
    return s;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(product, vectors);
  if (es.info() != Eigen::Success) {
    EffectiveSpectrum s;
    s.beta = beta;
    s.valid = false;
    return s;
  }
  if (!vectors) return assemble(es.eigenvalues(), nullptr, beta);
  const Eigen::MatrixXcd v = es.eigenvectors();
  return assemble(es.eigenvalues(), &v, beta);
}

EffectiveSpectrum effective_spectrum(const Eigen::MatrixXcd& product, double beta, bool vectors) {
  if (!product.allFinite()) {
    EffectiveSpectrum s;
    s.beta = beta;
    s.valid = false;
    return s;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(product, vectors);
  if (es.info() != Eigen::Success) {
    EffectiveSpectrum s;
    s.beta = beta;
    s.valid = false;
    return s;
  }
  if (!vectors) return assemble(es.eigenvalues(), nullptr, beta);
  const Eigen::MatrixXcd v = es.eigenvectors();
  return assemble(es.eigenvalues(), &v, beta);
}

}  // namespace cafqmc
