#include "cafqmc/ed.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cafqmc {

namespace {

std::uint64_t boson_key(const std::vector<int>& n, int particles) {
  std::uint64_t key = 0;
  for (int v : n) key = key * static_cast<std::uint64_t>(particles + 1) + static_cast<std::uint64_t>(v);
  return key;
}

void compositions(int sites, int remaining, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  const int i = static_cast<int>(current.size());
  if (i == sites - 1) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    current.push_back(n);
    compositions(sites, remaining - n, current, out);
    current.pop_back();
  }
}

std::vector<std::uint32_t> masks_with(int sites, int count) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m < (1u << sites); ++m)
    if (std::popcount(m) == count) out.push_back(m);
  return out;
}

// Sign of c+_i c_j acting on `mask` (j occupied, i empty).
double hop_sign(std::uint32_t mask, int i, int j) {
  const int lo = std::min(i, j), hi = std::max(i, j);
  const std::uint32_t between = mask & (((1u << hi) - 1u) & ~((1u << (lo + 1)) - 1u));
  return std::popcount(between) % 2 ? -1.0 : 1.0;
}

}  // namespace

FockBasis FockBasis::bosons(int sites, int particles) {
  if (sites < 1 || particles < 0) throw std::invalid_argument("invalid boson basis");
  FockBasis b;
  b.statistics_ = Statistics::boson;
  b.sites_ = sites;
  b.particles_ = particles;
  std::vector<int> cur;
  compositions(sites, particles, cur, b.bosons_);
  if (static_cast<Eigen::Index>(b.bosons_.size()) > kMaxEdDimension) {
    throw std::length_error("ED dimension exceeds the size guard");
  }
  for (std::size_t k = 0; k < b.bosons_.size(); ++k) b.lookup_[boson_key(b.bosons_[k], particles)] = k;
  return b;
}

FockBasis FockBasis::fermions(int sites, int n_up, int n_down) {
  if (sites < 1 || sites > 16 || n_up < 0 || n_down < 0 || n_up > sites || n_down > sites) {
    throw std::invalid_argument("invalid fermion basis");
  }
  FockBasis b;
  b.statistics_ = Statistics::fermion;
  b.sites_ = sites;
  const auto ups = masks_with(sites, n_up);
  const auto downs = masks_with(sites, n_down);
  if (static_cast<Eigen::Index>(ups.size() * downs.size()) > kMaxEdDimension) {
    throw std::length_error("ED dimension exceeds the size guard");
  }
  for (auto u : ups)
    for (auto d : downs) {
      b.lookup_[(static_cast<std::uint64_t>(u) << 32) | d] = b.fermions_.size();
      b.fermions_.emplace_back(u, d);
    }
  return b;
}

FockBasis FockBasis::for_model(const ModelSpec& model) {
  return model.statistics == Statistics::boson ? bosons(model.site_count(), model.particles)
                                               : fermions(model.site_count(), model.n_up, model.n_down);
}

Eigen::Index FockBasis::size() const {
  return static_cast<Eigen::Index>(statistics_ == Statistics::boson ? bosons_.size() : fermions_.size());
}

Eigen::Index FockBasis::index_of(const std::vector<int>& occupations) const {
  if (statistics_ != Statistics::boson || occupations.size() != static_cast<std::size_t>(sites_)) return -1;
  int total = 0;
  for (int v : occupations) {
    if (v < 0) return -1;
    total += v;
  }
  if (total != particles_) return -1;
  const auto it = lookup_.find(boson_key(occupations, total));
  return it == lookup_.end() ? -1 : it->second;
}

Eigen::Index FockBasis::index_of(std::uint32_t up, std::uint32_t down) const {
  if (statistics_ != Statistics::fermion) return -1;
  const auto it = lookup_.find((static_cast<std::uint64_t>(up) << 32) | down);
  return it == lookup_.end() ? -1 : it->second;
}

HamiltonianED build_hamiltonian(const ModelSpec& model, const FockBasis& basis) {
  model.validate();
  if (basis.statistics() != model.statistics || basis.sites() != model.site_count()) {
    throw std::invalid_argument("basis does not match the model");
  }
  const Eigen::Index dim = basis.size();
  const auto bonds = model.lattice.bonds();
  const double coeff = interaction_coefficient(model);
  HamiltonianED h{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim)};
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (model.statistics == Statistics::boson) {
      const auto& n = basis.occupations(k);
      double v = 0.0;
      for (int x : n) v += static_cast<double>(x) * x;
      h.potential(k, k) = coeff * v;
      for (const auto& [a, b] : bonds) {
        for (const auto& [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
          if (n[src] == 0) continue;
          std::vector<int> m = n;
          --m[src];
          ++m[dst];
          const Eigen::Index j = basis.index_of(m);
          h.kinetic(j, k) += -model.t * std::sqrt(static_cast<double>(n[src]) * (n[dst] + 1));
        }
      }
    } else {
      const auto [up, down] = basis.bits(k);
      h.potential(k, k) = coeff * std::popcount(up & down);
      for (const auto& [a, b] : bonds) {
        for (const auto& [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
          for (int sector = 0; sector < 2; ++sector) {
            const std::uint32_t mask = sector == 0 ? up : down;
            if (!(mask >> src & 1u) || (mask >> dst & 1u)) continue;
            const std::uint32_t moved = (mask & ~(1u << src)) | (1u << dst);
            const Eigen::Index j = sector == 0 ? basis.index_of(moved, down) : basis.index_of(up, moved);
            h.kinetic(j, k) += -model.t * hop_sign(mask, dst, src);
          }
        }
      }
    }
  }
  return h;
}

SpectrumED diagonalize(const HamiltonianED& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.total());
  if (es.info() != Eigen::Success) throw std::runtime_error("ED diagonalization failed");
  SpectrumED s;
  s.energies = es.eigenvalues();
  s.vectors = es.eigenvectors();
  s.kinetic = (s.vectors.transpose() * h.kinetic * s.vectors).diagonal();
  s.potential = (s.vectors.transpose() * h.potential * s.vectors).diagonal();
  return s;
}

SpectrumED diagonalize(const ModelSpec& model) {
  return diagonalize(build_hamiltonian(model, FockBasis::for_model(model)));
}

ThermalED canonical_thermal(const SpectrumED& spectrum, double beta) {
  const double e0 = spectrum.ground();
  const Eigen::ArrayXd w = (-beta * (spectrum.energies.array() - e0)).exp();
  const double z = w.sum();
  ThermalED t;
  t.total = (w * spectrum.energies.array()).sum() / z;
  t.kinetic = (w * spectrum.kinetic.array()).sum() / z;
  t.potential = (w * spectrum.potential.array()).sum() / z;
  t.log_z = std::log(z) - beta * e0;
  return t;
}

GrandCanonicalED::GrandCanonicalED(const ModelSpec& model) {
  if (model.statistics != Statistics::fermion) throw std::invalid_argument("grand canonical ED needs fermions");
  const int ns = model.site_count();
  for (int nu = 0; nu <= ns; ++nu)
    for (int nd = 0; nd <= ns; ++nd) {
      ModelSpec m = model;
      m.n_up = nu;
      m.n_down = nd;
      sectors_.push_back({nu + nd, diagonalize(m)});
    }
}

ThermalED GrandCanonicalED::thermal(double beta, double mu) const {
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& s : sectors_) shift = std::max(shift, -beta * (s.spectrum.ground() - mu * s.particles));
  double z = 0.0, e = 0.0, ek = 0.0, ep = 0.0, n = 0.0;
  for (const auto& s : sectors_) {
    const Eigen::ArrayXd w = (-beta * (s.spectrum.energies.array() - mu * s.particles) - shift).exp();
    const double ws = w.sum();
    z += ws;
    e += (w * s.spectrum.energies.array()).sum();
    ek += (w * s.spectrum.kinetic.array()).sum();
    ep += (w * s.spectrum.potential.array()).sum();
    n += ws * s.particles;
  }
  return {e / z, ek / z, ep / z, std::log(z) + shift, n / z};
}

ThermalED grand_canonical_thermal(const ModelSpec& model, double beta, double mu) {
  return GrandCanonicalED(model).thermal(beta, mu);
}

}  // namespace cafqmc
