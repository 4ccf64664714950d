#pragma once

#include "cafqmc/model.hpp"
#include "cafqmc/observables.hpp"
#include "cafqmc/propagator.hpp"
#include "cafqmc/recursion.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cafqmc {

/// Heat-bath acceptance R / (1 + R), written in terms of log R so that it is
/// finite for any ratio.
double heat_bath_probability(double log_ratio);

/// Per-walker stream seed: splitmix64 of (master + golden * (walker + 1)).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t walker_seed(std::uint64_t master, int walker);

/// Canonical partition function and occupation tables for one field
/// configuration, one entry per sector.
struct FieldEvaluation {
  std::vector<EffectiveSpectrum> spectra;
  std::vector<OccupationTable> tables;
  double log_abs_z = 0.0;
  cplx phase = 1.0;
  bool spectrum_ok = true;  // false: defective eigenproblem or non-finite Z
  bool valid = true;        // false: some fermion occupation left [0, 1]
};

/// vectors = false evaluates weights only: enough for log|Z| and the phase,
/// not for measurements, and blind to defective eigenproblems.
template <typename Scalar>
FieldEvaluation evaluate_products(const ModelSpec& model, std::span<const Matrix<Scalar>> products, double beta,
                                  const CutoffSpec& cutoff, bool vectors = true);

/// Full recomputation from the fields through the stabilized product.
FieldEvaluation evaluate_fields(const SliceFactory& factory, const FieldConfiguration& fields,
                                const CutoffSpec& cutoff = CutoffSpec::none());

struct Measurement {
  EnergySample energy;
  Eigen::VectorXcd densities;  // <n_i> summed over sectors
};

Measurement measure(const ModelSpec& model, const Eigen::MatrixXd& hopping, const FieldEvaluation& eval);

struct RunConfig {
  int walkers = 50;
  long sweeps = 200000;  // per walker, burn-in included
  double burn_in = 0.1;  // fraction of sweeps discarded
  int measure_interval = 1;
  int blocks = 100;
  std::uint64_t seed = 1;
  CutoffSpec cutoff;
  DiscretizationSpec disc = DiscretizationSpec::make(1.0);
  int threads = 0;  // 0: read CAFQMC_THREADS, default 1
  std::string series_path;  // optional raw series CSV

  long burn_in_sweeps() const;
  void validate() const;
};

/// Resolves the worker thread count (explicit value, else CAFQMC_THREADS, else 1).
int resolve_threads(int requested);

/// Runs fn(0..count-1) on up to `threads` workers; the first exception is
/// rethrown after all workers stop.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

struct Estimate {
  double mean = 0.0;
  double error = 0.0;
  double imag = 0.0;  // imaginary part of the weighted mean (diagnostic)
};

/// Contiguous blocks, block means of the weighted ratio estimator
/// sum(w O) / sum(w), linearized about the global mean so that a block whose
/// weights cancel stays finite; error = std(block means) / sqrt(n_blocks).
Estimate blocking_error(std::span<const cplx> series, std::span<const cplx> weights, int n_blocks);
Estimate blocking_error(std::span<const double> series, int n_blocks);

struct MeasurementAccumulator {
  std::vector<cplx> weights;
  std::vector<cplx> kinetic;
  std::vector<cplx> potential;
  std::vector<cplx> total;
  std::vector<Eigen::VectorXcd> densities;
  std::vector<long> sweep;
  std::vector<int> walker;

  long proposed = 0;
  long accepted = 0;
  long invalid_proposals = 0;  // auto-rejected (defective eigenproblem)
  long invalid_samples = 0;    // measured states with occupations outside [0, 1]
  long drift_events = 0;       // cached log|Z| disagreed with recomputation

  std::size_t size() const { return weights.size(); }
  void record(const Measurement& m, cplx weight, long sweep_index, int walker_id);
  /// Appends and re-sorts by (walker, sweep), so merge order does not matter.
  void merge(const MeasurementAccumulator& other);
  double acceptance_ratio() const;
  /// |sum w| / sum |w|.
  double average_sign() const;
  Estimate estimate(const std::vector<cplx>& series, int n_blocks) const;
};

void write_series_csv(std::ostream& out, const MeasurementAccumulator& acc);

inline constexpr double kUnreliableSign = 0.01;
inline constexpr double kDriftTolerance = 1e-6;

struct RunSummary {
  Estimate total;
  Estimate kinetic;
  Estimate potential;
  double average_sign = 1.0;
  double acceptance = 0.0;
  bool unreliable = false;
  long samples = 0;
  long invalid_samples = 0;
};

RunSummary summarize(const MeasurementAccumulator& acc, int n_blocks);

using AcceptanceRule = double (*)(double log_ratio);

/// One Markov chain over auxiliary fields. Scalar is double for Hirsch fields
/// and complex for the Gaussian boson fields. The propagator product of every
/// sector is cached densely and updated by a rank-one correction per proposal;
/// the spectrum is recomputed from scratch each time.
template <typename Scalar>
class CeWalker {
 public:
  CeWalker(const SliceFactory& factory, const CutoffSpec& cutoff, std::uint64_t seed);
  CeWalker(const SliceFactory& factory, const CutoffSpec& cutoff, std::uint64_t seed, FieldConfiguration fields);

  /// L * N_s proposals, slice-major then site order.
  void sweep(MeasurementAccumulator& acc);
  /// Recomputes from the fields; returns the absolute log|Z| drift and adopts
  /// the fresh state.
  double refresh();

  const FieldConfiguration& fields() const { return fields_; }
  const FieldEvaluation& state() const { return eval_; }
  Measurement measure() const;
  void set_acceptance(AcceptanceRule rule) { rule_ = rule; }

 private:
  Vector<Scalar> diagonal(int sector, int slice) const;
  Scalar factor(int sector, double field) const;
  double propose_field(double current);
  void rebuild_products();

  const SliceFactory* factory_;
  CutoffSpec cutoff_;
  std::mt19937_64 rng_;
  FieldConfiguration fields_;
  std::vector<std::vector<Matrix<Scalar>>> slices_;  // [sector][slice]
  std::vector<Matrix<Scalar>> products_;              // [sector]
  FieldEvaluation eval_;
  double field_sum_ = 0.0;
  AcceptanceRule rule_ = &heat_bath_probability;
};

/// Independent walkers (threaded), burn-in, measurement, periodic refresh.
MeasurementAccumulator run(const ModelSpec& model, const RunConfig& config);

}  // namespace cafqmc
