#include "cafqmc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace cafqmc {

double heat_bath_probability(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;
  if (log_ratio >= 0.0) return 1.0 / (1.0 + std::exp(-log_ratio));
  const double r = std::exp(log_ratio);
  return r / (1.0 + r);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t walker_seed(std::uint64_t master, int walker) {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(walker + 1));
}

template <typename Scalar>
FieldEvaluation evaluate_products(const ModelSpec& model, std::span<const Matrix<Scalar>> products, double beta,
                                  const CutoffSpec& cutoff, bool vectors) {
  FieldEvaluation e;
  const bool fermion = model.statistics == Statistics::fermion;
  for (std::size_t s = 0; s < products.size(); ++s) {
    e.spectra.push_back(effective_spectrum(products[s], beta, vectors));
    if (!e.spectra.back().valid) {
      e.spectrum_ok = false;
      e.valid = false;
      e.log_abs_z = -std::numeric_limits<double>::infinity();
      return e;
    }
  }
  for (std::size_t s = 0; s < products.size(); ++s) {
    const int particles = fermion ? (s == 0 ? model.n_up : model.n_down) : model.particles;
    e.tables.push_back(ratio_chain(e.spectra[s].weights, particles, model.statistics,
                                   fermion ? cutoff : CutoffSpec::none()));
    const OccupationTable& t = e.tables.back();
    e.log_abs_z += t.log_abs_z;
    e.phase *= t.phase;
    e.valid = e.valid && t.valid;
  }
  if (!std::isfinite(e.log_abs_z)) {
    e.spectrum_ok = false;
    e.valid = false;
  }
  return e;
}

template FieldEvaluation evaluate_products<double>(const ModelSpec&, std::span<const Eigen::MatrixXd>, double,
                                                   const CutoffSpec&, bool);
template FieldEvaluation evaluate_products<cplx>(const ModelSpec&, std::span<const Eigen::MatrixXcd>, double,
                                                 const CutoffSpec&, bool);

FieldEvaluation evaluate_fields(const SliceFactory& factory, const FieldConfiguration& fields,
                                const CutoffSpec& cutoff) {
  const auto& disc = factory.discretization();
  const ModelSpec& model = factory.model();
  try {
    if (model.statistics == Statistics::fermion) {
      std::vector<Eigen::MatrixXd> products;
      for (int s = 0; s < 2; ++s) {
        const auto slices = factory.fermion_slices(s, fields);
        products.push_back(stabilized_product<double>(slices, disc.groups).dense());
      }
      return evaluate_products<double>(model, products, disc.beta, cutoff);
    }
    const auto slices = factory.boson_slices(fields);
    std::vector<Eigen::MatrixXcd> products{stabilized_product<cplx>(slices, disc.groups).dense()};
    FieldEvaluation e = evaluate_products<cplx>(model, products, disc.beta, cutoff);
    e.phase *= factory.background_phase(fields);
    return e;
  } catch (const SingularFactorError&) {
    FieldEvaluation e;
    e.spectrum_ok = false;
    e.valid = false;
    e.log_abs_z = -std::numeric_limits<double>::infinity();
    return e;
  }
}

Measurement measure(const ModelSpec& model, const Eigen::MatrixXd& hopping, const FieldEvaluation& eval) {
  Measurement m;
  std::vector<Eigen::MatrixXcd> d1;
  for (std::size_t s = 0; s < eval.tables.size(); ++s) d1.push_back(one_body_dm(eval.spectra[s], eval.tables[s]));
  Eigen::VectorXcd local;
  if (model.statistics == Statistics::fermion) {
    local = local_doublon(d1[0], d1[1]);
  } else {
    OccupationTable t = eval.tables[0];
    const Eigen::VectorXcd& w = eval.spectra[0].weights;
    t.squares = occupation_squares(t, w);
    t.pairs = occupation_pairs(t, w);
    local = local_moment_boson(eval.spectra[0], t);
  }
  m.energy = energies(model, hopping, d1, local);
  m.energy.weight = eval.phase;
  m.densities = Eigen::VectorXcd::Zero(model.site_count());
  for (const auto& d : d1) m.densities += d.diagonal();
  return m;
}

long RunConfig::burn_in_sweeps() const { return static_cast<long>(std::floor(burn_in * sweeps)); }

void RunConfig::validate() const {
  if (walkers <= 0) throw std::invalid_argument("walker count must be positive");
  if (sweeps <= 0) throw std::invalid_argument("sweep count must be positive");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
  if (measure_interval <= 0) throw std::invalid_argument("measurement interval must be positive");
  if (blocks <= 0) throw std::invalid_argument("block count must be positive");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CAFQMC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::mutex m;
  int next = 0;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int k;
        {
          std::lock_guard lock(m);
          if (next >= count || error) return;
          k = next++;
        }
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Estimate blocking_error(std::span<const cplx> series, std::span<const cplx> weights, int n_blocks) {
  if (series.size() != weights.size()) throw std::invalid_argument("series and weights differ in length");
  if (n_blocks <= 0 || series.size() < static_cast<std::size_t>(n_blocks)) {
    throw std::invalid_argument("fewer samples than blocks");
  }
  const std::size_t n = series.size();
  cplx num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    num += weights[k] * series[k];
    den += weights[k];
  }
  Estimate est;
  const cplx mean = num / den;
  est.mean = mean.real();
  est.imag = mean.imag();
  if (n_blocks < 2) return est;
  // Block ratios linearized about the global mean: the block's weight is
  // replaced by its expectation (mean weight x block length). With a sign
  // problem a single block's weights can cancel; this stays finite and equals
  // the plain block ratio whenever a block carries its expected weight.
  std::vector<double> means(n_blocks);
  for (int b = 0; b < n_blocks; ++b) {
    const std::size_t lo = n * b / n_blocks, hi = n * (b + 1) / n_blocks;
    cplx bn = 0.0, bd = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      bn += weights[k] * series[k];
      bd += weights[k];
    }
    const cplx expected = den * (static_cast<double>(hi - lo) / static_cast<double>(n));
    means[b] = (mean + (bn - mean * bd) / expected).real();
  }
  const double avg = std::accumulate(means.begin(), means.end(), 0.0) / n_blocks;
  double var = 0.0;
  for (double m : means) var += (m - avg) * (m - avg);
  var /= (n_blocks - 1);
  est.error = std::sqrt(var / n_blocks);
  return est;
}

Estimate blocking_error(std::span<const double> series, int n_blocks) {
  std::vector<cplx> s(series.begin(), series.end());
  std::vector<cplx> w(series.size(), cplx(1.0));
  return blocking_error(std::span<const cplx>(s), std::span<const cplx>(w), n_blocks);
}

void MeasurementAccumulator::record(const Measurement& m, cplx weight, long sweep_index, int walker_id) {
  weights.push_back(weight);
  kinetic.push_back(m.energy.kinetic);
  potential.push_back(m.energy.potential);
  total.push_back(m.energy.total);
  densities.push_back(m.densities);
  sweep.push_back(sweep_index);
  walker.push_back(walker_id);
}

void MeasurementAccumulator::merge(const MeasurementAccumulator& other) {
  MeasurementAccumulator joined;
  const std::size_t n = size() + other.size();
  std::vector<std::pair<const MeasurementAccumulator*, std::size_t>> refs;
  refs.reserve(n);
  for (std::size_t k = 0; k < size(); ++k) refs.emplace_back(this, k);
  for (std::size_t k = 0; k < other.size(); ++k) refs.emplace_back(&other, k);
  std::stable_sort(refs.begin(), refs.end(), [](const auto& a, const auto& b) {
    const auto ka = std::make_pair(a.first->walker[a.second], a.first->sweep[a.second]);
    const auto kb = std::make_pair(b.first->walker[b.second], b.first->sweep[b.second]);
    return ka < kb;
  });
  for (const auto& [src, k] : refs) {
    joined.weights.push_back(src->weights[k]);
    joined.kinetic.push_back(src->kinetic[k]);
    joined.potential.push_back(src->potential[k]);
    joined.total.push_back(src->total[k]);
    joined.densities.push_back(src->densities[k]);
    joined.sweep.push_back(src->sweep[k]);
    joined.walker.push_back(src->walker[k]);
  }
  joined.proposed = proposed + other.proposed;
  joined.accepted = accepted + other.accepted;
  joined.invalid_proposals = invalid_proposals + other.invalid_proposals;
  joined.invalid_samples = invalid_samples + other.invalid_samples;
  joined.drift_events = drift_events + other.drift_events;
  *this = std::move(joined);
}

double MeasurementAccumulator::acceptance_ratio() const {
  return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
}

double MeasurementAccumulator::average_sign() const {
  cplx sum = 0.0;
  double abs_sum = 0.0;
  for (const cplx& w : weights) {
    sum += w;
    abs_sum += std::abs(w);
  }
  return abs_sum > 0.0 ? std::abs(sum) / abs_sum : 0.0;
}

Estimate MeasurementAccumulator::estimate(const std::vector<cplx>& series, int n_blocks) const {
  return blocking_error(std::span<const cplx>(series), std::span<const cplx>(weights), n_blocks);
}

void write_series_csv(std::ostream& out, const MeasurementAccumulator& acc) {
  out << "sweep,walker,weight_re,weight_im,E_k,E_p,E_tot\n";
  out << std::scientific << std::setprecision(17);
  for (std::size_t k = 0; k < acc.size(); ++k) {
    out << acc.sweep[k] << ',' << acc.walker[k] << ',' << acc.weights[k].real() << ',' << acc.weights[k].imag()
        << ',' << acc.kinetic[k].real() << ',' << acc.potential[k].real() << ',' << acc.total[k].real() << '\n';
  }
}

RunSummary summarize(const MeasurementAccumulator& acc, int n_blocks) {
  RunSummary s;
  s.samples = static_cast<long>(acc.size());
  s.invalid_samples = acc.invalid_samples;
  s.acceptance = acc.acceptance_ratio();
  s.average_sign = acc.average_sign();
  s.unreliable = s.average_sign < kUnreliableSign;
  if (acc.size() == 0) {
    s.unreliable = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.total = s.kinetic = s.potential = {nan, nan, nan};
    return s;
  }
  const int blocks = std::min<int>(n_blocks, static_cast<int>(acc.size()));
  s.total = acc.estimate(acc.total, blocks);
  s.kinetic = acc.estimate(acc.kinetic, blocks);
  s.potential = acc.estimate(acc.potential, blocks);
  return s;
}

// ---------------------------------------------------------------- walker

namespace {

FieldConfiguration random_fields(const SliceFactory& factory, std::mt19937_64& rng) {
  const int L = factory.discretization().slices;
  const int ns = factory.model().site_count();
  FieldConfiguration f{factory.field_kind(), Eigen::MatrixXd(L, ns)};
  if (f.kind == FieldKind::discrete) {
    std::bernoulli_distribution coin(0.5);
    for (int l = 0; l < L; ++l)
      for (int i = 0; i < ns; ++i) f.values(l, i) = coin(rng) ? 1.0 : -1.0;
  } else {
    std::normal_distribution<double> gauss;
    for (int l = 0; l < L; ++l)
      for (int i = 0; i < ns; ++i) f.values(l, i) = gauss(rng);
  }
  return f;
}

}  // namespace

template <typename Scalar>
CeWalker<Scalar>::CeWalker(const SliceFactory& factory, const CutoffSpec& cutoff, std::uint64_t seed)
    : factory_(&factory), cutoff_(cutoff), rng_(seed) {
  fields_ = random_fields(factory, rng_);
  rebuild_products();
  refresh();
}

template <typename Scalar>
CeWalker<Scalar>::CeWalker(const SliceFactory& factory, const CutoffSpec& cutoff, std::uint64_t seed,
                           FieldConfiguration fields)
    : factory_(&factory), cutoff_(cutoff), rng_(seed), fields_(std::move(fields)) {
  fields_.validate(factory.discretization().slices, factory.model().site_count());
  rebuild_products();
  refresh();
}

template <typename Scalar>
Scalar CeWalker<Scalar>::factor(int sector, double field) const {
  if constexpr (std::is_same_v<Scalar, double>) {
    return factory_->fermion_factor(sector, field);
  } else {
    return factory_->boson_factor(field);
  }
}

template <typename Scalar>
Vector<Scalar> CeWalker<Scalar>::diagonal(int sector, int slice) const {
  const int ns = fields_.sites();
  Vector<Scalar> d(ns);
  for (int i = 0; i < ns; ++i) d(i) = factor(sector, fields_.values(slice, i));
  return d;
}

template <typename Scalar>
double CeWalker<Scalar>::propose_field(double current) {
  if (fields_.kind == FieldKind::discrete) return -current;
  std::normal_distribution<double> gauss;
  return gauss(rng_);
}

template <typename Scalar>
void CeWalker<Scalar>::rebuild_products() {
  const int sectors = factory_->sectors();
  const int L = fields_.slices();
  const Matrix<Scalar> half = factory_->half_kinetic().template cast<Scalar>();
  slices_.assign(sectors, {});
  products_.assign(sectors, {});
  for (int s = 0; s < sectors; ++s) {
    slices_[s].reserve(L);
    for (int l = 0; l < L; ++l) slices_[s].push_back(half * diagonal(s, l).asDiagonal() * half);
  }
}

template <typename Scalar>
double CeWalker<Scalar>::refresh() {
  const auto& disc = factory_->discretization();
  const double old = eval_.log_abs_z;
  const bool had_state = !eval_.tables.empty();
  FieldEvaluation fresh;
  try {
    for (std::size_t s = 0; s < slices_.size(); ++s) {
      products_[s] = stabilized_product<Scalar>(slices_[s], disc.groups).dense();
    }
    fresh = evaluate_products<Scalar>(factory_->model(), products_, disc.beta, cutoff_);
  } catch (const SingularFactorError&) {
    fresh.spectrum_ok = false;
    fresh.valid = false;
    fresh.log_abs_z = -std::numeric_limits<double>::infinity();
  }
  field_sum_ = fields_.values.sum();
  fresh.phase *= factory_->background_phase(field_sum_);
  eval_ = std::move(fresh);
  if (!had_state) return 0.0;
  if (!std::isfinite(old) || !std::isfinite(eval_.log_abs_z)) {
    return old == eval_.log_abs_z ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(old - eval_.log_abs_z);
}

template <typename Scalar>
void CeWalker<Scalar>::sweep(MeasurementAccumulator& acc) {
  const int sectors = factory_->sectors();
  const int L = fields_.slices();
  const int ns = fields_.sites();
  const auto& disc = factory_->discretization();
  const ModelSpec& model = factory_->model();
  const Matrix<Scalar> half = factory_->half_kinetic().template cast<Scalar>();
  const Matrix<Scalar> id = Matrix<Scalar>::Identity(ns, ns);

  // suffix[s][l] = B_{L-1} ... B_{l+1}; fixed during the sweep because slices
  // above l are only touched later.
  std::vector<std::vector<Matrix<Scalar>>> suffix(sectors, std::vector<Matrix<Scalar>>(L));
  for (int s = 0; s < sectors; ++s) {
    suffix[s][L - 1] = id;
    for (int l = L - 2; l >= 0; --l) suffix[s][l] = suffix[s][l + 1] * slices_[s][l + 1];
  }
  std::vector<Matrix<Scalar>> prefix(sectors, id);  // B_{l-1} ... B_0

  std::vector<Matrix<Scalar>> left(sectors), right(sectors), trial(sectors);
  for (int l = 0; l < L; ++l) {
    for (int s = 0; s < sectors; ++s) {
      left[s] = suffix[s][l] * half;
      right[s] = half * prefix[s];
    }
    for (int i = 0; i < ns; ++i) {
      ++acc.proposed;
      const double current = fields_.values(l, i);
      const double proposed = propose_field(current);
      for (int s = 0; s < sectors; ++s) {
        const Scalar delta = factor(s, proposed) - factor(s, current);
        trial[s] = products_[s];
        trial[s].noalias() += delta * left[s].col(i) * right[s].row(i);
      }
      // Eigenvalues decide; eigenvectors (and the defectiveness check) are
      // only computed for a move that would be taken.
      FieldEvaluation next = evaluate_products<Scalar>(model, trial, disc.beta, cutoff_, false);
      if (!next.spectrum_ok) {
        ++acc.invalid_proposals;
        continue;
      }
      const double p = rule_(next.log_abs_z - eval_.log_abs_z);
      if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p) {
        next = evaluate_products<Scalar>(model, trial, disc.beta, cutoff_);
        if (!next.spectrum_ok) {
          ++acc.invalid_proposals;
          continue;
        }
        const double next_sum = field_sum_ + (proposed - current);
        next.phase *= factory_->background_phase(next_sum);
        ++acc.accepted;
        fields_.values(l, i) = proposed;
        field_sum_ = next_sum;
        std::swap(products_, trial);
        eval_ = std::move(next);
      }
    }
    for (int s = 0; s < sectors; ++s) {
      slices_[s][l] = half * diagonal(s, l).asDiagonal() * half;
      prefix[s] = slices_[s][l] * prefix[s];
    }
  }
}

template <typename Scalar>
Measurement CeWalker<Scalar>::measure() const {
  return cafqmc::measure(factory_->model(), factory_->hopping(), eval_);
}

template class CeWalker<double>;
template class CeWalker<cplx>;

// ---------------------------------------------------------------- driver

namespace {

template <typename Scalar>
MeasurementAccumulator run_walker(const SliceFactory& factory, const RunConfig& config, int walker_id) {
  MeasurementAccumulator acc;
  CeWalker<Scalar> w(factory, config.cutoff, walker_seed(config.seed, walker_id));
  const long burn = config.burn_in_sweeps();
  for (long k = 0; k < config.sweeps; ++k) {
    w.sweep(acc);
    if (w.refresh() > kDriftTolerance) ++acc.drift_events;
    if (k < burn || (k - burn) % config.measure_interval != 0) continue;
    const FieldEvaluation& st = w.state();
    if (!st.spectrum_ok) continue;
    if (!st.valid) {
      ++acc.invalid_samples;
      if (config.cutoff.enabled()) continue;
    }
    acc.record(w.measure(), st.phase, k, walker_id);
  }
  return acc;
}

}  // namespace

MeasurementAccumulator run(const ModelSpec& model, const RunConfig& config) {
  config.validate();
  model.validate();
  const SliceFactory factory(model, config.disc);
  std::vector<MeasurementAccumulator> parts(config.walkers);
  parallel_for(config.walkers, resolve_threads(config.threads), [&](int w) {
    parts[w] = model.statistics == Statistics::fermion ? run_walker<double>(factory, config, w)
                                                       : run_walker<cplx>(factory, config, w);
  });
  MeasurementAccumulator acc;
  for (const auto& p : parts) acc.merge(p);
  if (!config.series_path.empty()) {
    std::ofstream out(config.series_path);
    if (!out) throw std::runtime_error("cannot open series file " + config.series_path);
    write_series_csv(out, acc);
  }
  return acc;
}

}  // namespace cafqmc
