#include "cafqmc/gce.hpp"

#include "cafqmc/ed.hpp"

#include <cmath>
#include <array>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>

namespace cafqmc {

namespace {

// log|det| and sign of a square real matrix.
std::pair<double, double> log_det(const Eigen::MatrixXd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  double log_abs = 0.0;
  double sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = lu.matrixLU()(i, i);
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  return {log_abs, sign};
}

}  // namespace

GCSector gc_sector(const UDV<double>& product, double beta, double mu, bool with_green) {
  const Eigen::ArrayXd d = product.D.array() * std::exp(beta * mu);
  const Eigen::ArrayXd big = d.max(1.0);
  const Eigen::ArrayXd small = d.min(1.0);
  const Eigen::MatrixXd v_inv = product.V.partialPivLu().inverse();
  Eigen::MatrixXd y = big.inverse().matrix().asDiagonal() * product.U.transpose() * v_inv;
  y.diagonal() += small.matrix();

  GCSector s;
  const auto [lu_abs, lu_sign] = log_det(product.U);
  const auto [lv_abs, lv_sign] = log_det(product.V);
  const auto [ly_abs, ly_sign] = log_det(y);
  if (!std::isfinite(ly_abs)) throw SingularFactorError("singular I + B product");
  s.log_abs_det = lu_abs + lv_abs + ly_abs + big.log().sum();
  s.sign = lu_sign * lv_sign * ly_sign;
  if (with_green) {
    s.G = v_inv * y.partialPivLu().solve(big.inverse().matrix().asDiagonal() * product.U.transpose());
  }
  return s;
}

GCWeight gc_weight(std::span<const std::vector<Eigen::MatrixXd>> slices, int groups, double beta, double mu) {
  GCWeight w;
  for (const auto& sector : slices) {
    w.sectors.push_back(gc_sector(stabilized_product<double>(sector, groups), beta, mu));
    w.log_abs += w.sectors.back().log_abs_det;
    w.sign *= w.sectors.back().sign;
  }
  return w;
}

GCWeight gc_weight(const SliceFactory& factory, const FieldConfiguration& fields, double mu) {
  std::vector<std::vector<Eigen::MatrixXd>> slices{factory.fermion_slices(0, fields),
                                                   factory.fermion_slices(1, fields)};
  const auto& disc = factory.discretization();
  return gc_weight(slices, disc.groups, disc.beta, mu);
}

GCObservables gc_observables(const Eigen::MatrixXd& g_up, const Eigen::MatrixXd& g_down, const ModelSpec& model) {
  const Eigen::MatrixXd k = build_hopping_matrix(model.lattice, model.t);
  const Eigen::Index n = g_up.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  GCObservables o;
  for (const Eigen::MatrixXd* g : {&g_up, &g_down}) {
    const Eigen::MatrixXd d1 = id - g->transpose();
    o.kinetic += k.cwiseProduct(d1).sum();
    o.particles += d1.trace();
  }
  const Eigen::ArrayXd nu = 1.0 - g_up.diagonal().array();
  const Eigen::ArrayXd nd = 1.0 - g_down.diagonal().array();
  o.potential = model.U * (nu * nd).sum();
  o.total = o.kinetic + o.potential;
  return o;
}

bool is_bipartite(const LatticeSpec& lattice) {
  const int n = lattice.site_count();
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : lattice.bonds()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> color(n, -1);
  for (int s = 0; s < n; ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (int b : adj[a]) {
        if (color[b] < 0) {
          color[b] = 1 - color[a];
          q.push(b);
        } else if (color[b] == color[a]) {
          return false;
        }
      }
    }
  }
  return true;
}

double tune_mu(const ModelSpec& model, double target, const MuSearch& search) {
  if (model.statistics != Statistics::fermion) throw std::invalid_argument("tune_mu needs a fermion model");
  const int ns = model.site_count();
  if (!(target > 0.0 && target < 2.0 * ns)) throw std::invalid_argument("target filling must lie in (0, 2 N_s)");
  if (target == ns && is_bipartite(model.lattice)) return 0.5 * model.U;

  std::function<double(double)> filling;
  std::optional<GrandCanonicalED> ed;
  if (ns <= search.max_ed_sites) {
    ed.emplace(model);
    filling = [&](double mu) { return ed->thermal(search.beta, mu).particles; };
  } else {
    filling = [&](double mu) {
      RunConfig c = search.mc;
      c.disc = DiscretizationSpec::make(search.beta, c.disc.dtau);
      const auto acc = gce_run(model, c, mu);
      std::vector<cplx> n;
      n.reserve(acc.size());
      for (const auto& d : acc.densities) n.push_back(d.sum());
      return acc.estimate(n, std::min<int>(c.blocks, static_cast<int>(n.size()))).mean;
    };
  }
  double lo = -10.0 * std::abs(model.t) - model.U;
  double hi = 10.0 * std::abs(model.t) + model.U;
  double n_lo = filling(lo) - target;
  double n_hi = filling(hi) - target;
  if (n_lo > 0.0 || n_hi < 0.0) throw std::runtime_error("chemical potential bracket not found");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double n_mid = filling(mid) - target;
    if (std::abs(n_mid) < search.tolerance) return mid;
    if (n_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14) return mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------- sampling

namespace {

// Right multiplication (U D V) * B.
UDV<double> right_multiply(const UDV<double>& f, const Eigen::MatrixXd& b) {
  UDV<double> g = factorize<double>(f.D.asDiagonal() * (f.V * b));
  g.U = f.U * g.U;
  return g;
}

class GceWalker {
 public:
  GceWalker(const SliceFactory& factory, double mu, std::uint64_t seed)
      : factory_(factory), mu_(mu), rng_(seed) {
    const auto& disc = factory.discretization();
    const int ns = factory.model().site_count();
    fields_ = FieldConfiguration{FieldKind::discrete, Eigen::MatrixXd(disc.slices, ns)};
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index k = 0; k < fields_.values.size(); ++k) fields_.values.data()[k] = coin(rng_) ? 1.0 : -1.0;
    for (int s = 0; s < 2; ++s) slices_[s] = factory.fermion_slices(s, fields_);
    refresh();
  }

  void refresh() {
    const auto& disc = factory_.discretization();
    weight_ = gc_weight(slices_, disc.groups, disc.beta, mu_);
  }

  void sweep(MeasurementAccumulator& acc) {
    const auto& disc = factory_.discretization();
    const int L = disc.slices;
    const int ns = fields_.sites();
    const Eigen::MatrixXd& half = factory_.half_kinetic();
    std::array<std::vector<UDV<double>>, 2> suffix;
    for (int s = 0; s < 2; ++s) {
      suffix[s].resize(L, UDV<double>::identity(ns));
      for (int l = L - 2; l >= 0; --l) suffix[s][l] = right_multiply(suffix[s][l + 1], slices_[s][l + 1]);
    }
    std::array<UDV<double>, 2> prefix{UDV<double>::identity(ns), UDV<double>::identity(ns)};
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < ns; ++i) {
        ++acc.proposed;
        fields_.values(l, i) = -fields_.values(l, i);
        std::array<GCSector, 2> trial;
        double log_abs = 0.0, sign = 1.0;
        try {
          for (int s = 0; s < 2; ++s) {
            const Eigen::MatrixXd b = half * factory_.fermion_diagonal(s, fields_.values.row(l)).asDiagonal() * half;
            const UDV<double>& S = suffix[s][l];
            const UDV<double>& R = prefix[s];
            UDV<double> x = factorize<double>(S.D.asDiagonal() * (S.V * b * R.U) * R.D.asDiagonal());
            x.U = S.U * x.U;
            x.V = x.V * R.V;
            trial[s] = gc_sector(x, disc.beta, mu_, false);
            log_abs += trial[s].log_abs_det;
            sign *= trial[s].sign;
          }
        } catch (const SingularFactorError&) {
          ++acc.invalid_proposals;
          fields_.values(l, i) = -fields_.values(l, i);
          continue;
        }
        const double ratio = std::exp(std::min(0.0, log_abs - weight_.log_abs));
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < ratio) {
          ++acc.accepted;
          weight_.log_abs = log_abs;
          weight_.sign = sign;
        } else {
          fields_.values(l, i) = -fields_.values(l, i);
        }
      }
      for (int s = 0; s < 2; ++s) {
        slices_[s][l] = half * factory_.fermion_diagonal(s, fields_.values.row(l)).asDiagonal() * half;
        prefix[s] = left_multiply<double>(slices_[s][l], prefix[s]);
      }
    }
  }

  Measurement measure() const {
    const GCObservables o = gc_observables(weight_.sectors[0].G, weight_.sectors[1].G, factory_.model());
    Measurement m;
    m.energy.kinetic = o.kinetic;
    m.energy.potential = o.potential;
    m.energy.total = o.total;
    m.energy.weight = weight_.sign;
    const Eigen::Index n = fields_.sites();
    m.densities = (2.0 * Eigen::VectorXd::Ones(n) - weight_.sectors[0].G.diagonal() -
                   weight_.sectors[1].G.diagonal())
                      .cast<cplx>();
    return m;
  }

  double sign() const { return weight_.sign; }

 private:
  const SliceFactory& factory_;
  double mu_;
  std::mt19937_64 rng_;
  FieldConfiguration fields_;
  std::array<std::vector<Eigen::MatrixXd>, 2> slices_;
  GCWeight weight_;
};

}  // namespace

MeasurementAccumulator gce_run(const ModelSpec& model, const RunConfig& config, double mu) {
  config.validate();
  model.validate();
  if (model.statistics != Statistics::fermion) throw std::invalid_argument("GCE sampling needs a fermion model");
  const SliceFactory factory(model, config.disc);
  std::vector<MeasurementAccumulator> parts(config.walkers);
  auto work = [&](int w) {
    MeasurementAccumulator acc;
    GceWalker walker(factory, mu, walker_seed(config.seed, w));
    const long burn = config.burn_in_sweeps();
    for (long k = 0; k < config.sweeps; ++k) {
      walker.sweep(acc);
      walker.refresh();
      if (k < burn || (k - burn) % config.measure_interval != 0) continue;
      acc.record(walker.measure(), walker.sign(), k, w);
    }
    parts[w] = std::move(acc);
  };
  parallel_for(config.walkers, resolve_threads(config.threads), work);
  MeasurementAccumulator acc;
  for (const auto& p : parts) acc.merge(p);
  return acc;
}

}  // namespace cafqmc
