#include "cafqmc/recursion.hpp"

#include <cmath>
#include <stdexcept>

namespace cafqmc {

namespace {

double statistics_sign(Statistics s) { return s == Statistics::boson ? 1.0 : -1.0; }

Eigen::VectorXcd scaled_window(const Eigen::VectorXcd& weights, const CutoffWindow& w, int exponent) {
  Eigen::VectorXcd out(w.size());
  for (int k = 0; k < w.size(); ++k) {
    const cplx m = weights(w.lo + k);
    out(k) = {std::ldexp(m.real(), -exponent), std::ldexp(m.imag(), -exponent)};
  }
  return out;
}

}  // namespace

CutoffSpec::CutoffSpec(double xi) : xi_(xi) {
  if (!(xi > 1.0)) throw std::invalid_argument("cutoff xi must exceed 1");
}

Eigen::VectorXcd power_sums(const Eigen::VectorXcd& weights, int k_max) {
  Eigen::VectorXcd z = Eigen::VectorXcd::Zero(std::max(k_max, 0));
  Eigen::VectorXcd powers = weights;
  for (int k = 0; k < k_max; ++k) {
    z(k) = powers.sum();
    powers = powers.cwiseProduct(weights);
  }
  return z;
}

std::vector<ScaledComplex> scaled_power_sums(const Eigen::VectorXcd& weights, int k_max) {
  std::vector<ScaledComplex> z(std::max(k_max, 0));
  std::vector<ScaledComplex> base(weights.size()), powers(weights.size());
  for (Eigen::Index g = 0; g < weights.size(); ++g) base[g] = powers[g] = ScaledComplex(weights(g));
  for (int k = 0; k < k_max; ++k) {
    ScaledComplex sum;
    for (auto& p : powers) sum += p;
    z[k] = sum;
    for (std::size_t g = 0; g < powers.size(); ++g) powers[g] = powers[g] * base[g];
  }
  return z;
}

PartitionChain partition_recursion(const Eigen::VectorXcd& weights, int particles, Statistics statistics) {
  if (particles < 0) throw std::domain_error("particle number must be non-negative");
  if (statistics == Statistics::fermion && particles > weights.size()) {
    throw std::domain_error("fermion particle number exceeds the number of levels");
  }
  const auto z = scaled_power_sums(weights, particles);
  const double sign = statistics_sign(statistics);
  PartitionChain chain;
  chain.Z.reserve(particles + 1);
  chain.Z.emplace_back(1.0);
  for (int n = 1; n <= particles; ++n) {
    ScaledComplex acc;
    double s = 1.0;  // (+-1)^{k+1}
    for (int k = 1; k <= n; ++k) {
      acc += ScaledComplex(s) * z[k - 1] * chain.Z[n - k];
      s *= sign;
    }
    chain.Z.push_back(acc / static_cast<double>(n));
  }
  return chain;
}

CutoffWindow apply_cutoff(const Eigen::VectorXcd& weights, int particles, const CutoffSpec& cutoff) {
  const int n = static_cast<int>(weights.size());
  CutoffWindow w{0, n - 1};
  if (!cutoff.enabled() || particles <= 0 || particles > n) return w;
  const double fermi = std::abs(weights(particles - 1));
  if (!(fermi > 0.0) || !std::isfinite(fermi)) return w;
  while (w.lo < particles - 1 && std::abs(weights(w.lo)) > cutoff.xi() * fermi) ++w.lo;
  while (w.hi > particles - 1 && fermi > cutoff.xi() * std::abs(weights(w.hi))) --w.hi;
  return w;
}

cplx OccupationTable::ratio(int k) const {
  const cplx r = scaled_ratios.at(k - 1);
  return {std::ldexp(r.real(), -scale_exponent), std::ldexp(r.imag(), -scale_exponent)};
}

OccupationTable ratio_chain(const Eigen::VectorXcd& weights, int particles, Statistics statistics,
                            const CutoffSpec& cutoff) {
  const int levels = static_cast<int>(weights.size());
  if (particles < 0) throw std::domain_error("particle number must be non-negative");
  if (statistics == Statistics::fermion && particles > levels) {
    throw std::domain_error("fermion particle number exceeds the number of levels");
  }
  OccupationTable t;
  t.statistics = statistics;
  t.particles = particles;
  t.occupations = Eigen::VectorXcd::Zero(levels);
  t.window = statistics == Statistics::fermion ? apply_cutoff(weights, particles, cutoff)
                                               : CutoffWindow{0, levels - 1};
  const int window_particles = particles - t.window.frozen_occupied();
  for (int l = 0; l < t.window.lo; ++l) {
    t.occupations(l) = 1.0;
    t.log_abs_z += std::log(std::abs(weights(l)));
    t.phase *= weights(l) / std::abs(weights(l));
  }
  if (window_particles == 0 || t.window.size() <= 0) {
    t.squares = t.occupations;
    return t;
  }

  double largest = 0.0;
  for (int l = t.window.lo; l <= t.window.hi; ++l) largest = std::max(largest, std::abs(weights(l)));
  if (!(largest > 0.0) || !std::isfinite(largest)) {
    t.valid = false;
    t.log_abs_z = -std::numeric_limits<double>::infinity();
    return t;
  }
  std::frexp(largest, &t.scale_exponent);
  const Eigen::VectorXcd mu = scaled_window(weights, t.window, t.scale_exponent);
  const double sign = statistics_sign(statistics);

  Eigen::VectorXcd n = Eigen::VectorXcd::Zero(mu.size());
  t.scaled_ratios.reserve(window_particles);
  for (int k = 1; k <= window_particles; ++k) {
    const Eigen::VectorXcd factor = mu.array() * (1.0 + sign * n.array());
    const cplx denom = factor.sum();
    if (denom == cplx(0.0) || !std::isfinite(std::abs(denom))) {
      t.valid = false;
      t.log_abs_z = -std::numeric_limits<double>::infinity();
      return t;
    }
    const cplx r = static_cast<double>(k) / denom;
    t.scaled_ratios.push_back(r);
    n = r * factor;
    t.log_abs_z -= std::log(std::abs(r));
    t.phase *= std::abs(r) / r;
  }
  t.log_abs_z += window_particles * t.scale_exponent * std::numbers::ln2;
  t.occupations.segment(t.window.lo, mu.size()) = n;
  t.squares = statistics == Statistics::fermion ? t.occupations : Eigen::VectorXcd();

  if (statistics == Statistics::fermion) {
    for (Eigen::Index l = 0; l < n.size(); ++l) {
      const cplx v = n(l);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || v.real() < -kOccupationTolerance ||
          v.real() > 1.0 + kOccupationTolerance) {
        t.valid = false;
      }
    }
  } else {
    if (!n.allFinite()) t.valid = false;
  }
  return t;
}

Eigen::VectorXcd occupation_squares(const OccupationTable& table, const Eigen::VectorXcd& weights) {
  if (table.statistics == Statistics::fermion) return table.occupations;
  const int levels = static_cast<int>(weights.size());
  Eigen::VectorXcd sq = Eigen::VectorXcd::Zero(levels);
  if (table.scaled_ratios.empty()) return sq;
  const Eigen::VectorXcd mu = scaled_window(weights, table.window, table.scale_exponent);
  Eigen::VectorXcd n = Eigen::VectorXcd::Zero(mu.size());
  Eigen::VectorXcd n2 = Eigen::VectorXcd::Zero(mu.size());
  for (const cplx r : table.scaled_ratios) {
    n2 = r * (mu.array() * (1.0 + 2.0 * n.array() + n2.array())).matrix();
    n = r * (mu.array() * (1.0 + n.array())).matrix();
  }
  sq.segment(table.window.lo, mu.size()) = n2;
  return sq;
}

Eigen::MatrixXcd occupation_pairs(const OccupationTable& table, const Eigen::VectorXcd& weights) {
  const int levels = static_cast<int>(weights.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(levels, levels);
  const double sign = statistics_sign(table.statistics);
  const CutoffWindow& w = table.window;
  if (!table.scaled_ratios.empty()) {
    const Eigen::VectorXcd mu = scaled_window(weights, w, table.scale_exponent);
    const Eigen::Index m = mu.size();
    Eigen::VectorXcd n = Eigen::VectorXcd::Zero(m);
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(m, m);
    for (const cplx r : table.scaled_ratios) {
      Eigen::MatrixXcd next(m, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
          if (a == b) {
            next(a, b) = 0.0;
            continue;
          }
          next(a, b) = r * (0.5 * mu(b) * (n(a) + sign * p(a, b)) + 0.5 * mu(a) * (n(b) + sign * p(a, b)));
        }
      }
      n = r * (mu.array() * (1.0 + sign * n.array())).matrix();
      p = std::move(next);
    }
    out.block(w.lo, w.lo, m, m) = p;
  }
  // Frozen-occupied levels pair with every other level's occupation.
  for (int a = 0; a < w.lo; ++a) {
    for (int b = 0; b < levels; ++b) {
      if (a == b) continue;
      out(a, b) = table.occupations(b);
      out(b, a) = table.occupations(b);
    }
  }
  return out;
}

OccupationTable full_table(const Eigen::VectorXcd& weights, int particles, Statistics statistics,
                           const CutoffSpec& cutoff) {
  OccupationTable t = ratio_chain(weights, particles, statistics, cutoff);
  if (t.log_abs_z == -std::numeric_limits<double>::infinity()) return t;
  t.squares = occupation_squares(t, weights);
  t.pairs = occupation_pairs(t, weights);
  return t;
}

SpinfulTable spinful_partition(const Eigen::VectorXcd& weights_up, const Eigen::VectorXcd& weights_down,
                               int n_up, int n_down, const CutoffSpec& cutoff) {
  SpinfulTable s;
  s.up = ratio_chain(weights_up, n_up, Statistics::fermion, cutoff);
  s.down = ratio_chain(weights_down, n_down, Statistics::fermion, cutoff);
  s.log_abs_z = s.up.log_abs_z + s.down.log_abs_z;
  s.phase = s.up.phase * s.down.phase;
  s.valid = s.up.valid && s.down.valid;
  return s;
}

}  // namespace cafqmc
