#pragma once

#include "cafqmc/model.hpp"
#include "cafqmc/propagator.hpp"
#include "cafqmc/sampler.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cafqmc {

/// det(I + e^{beta mu} U D V) for one spin sector, with the equal-time Green
/// function G = (I + e^{beta mu} U D V)^{-1} built from the same factors.
struct GCSector {
  double log_abs_det = 0.0;
  double sign = 1.0;
  Eigen::MatrixXd G;
};

GCSector gc_sector(const UDV<double>& product, double beta, double mu, bool with_green = true);

struct GCWeight {
  std::vector<GCSector> sectors;
  double log_abs = 0.0;
  double sign = 1.0;
};

/// Slices per sector in time order.
GCWeight gc_weight(std::span<const std::vector<Eigen::MatrixXd>> slices, int groups, double beta, double mu);
GCWeight gc_weight(const SliceFactory& factory, const FieldConfiguration& fields, double mu);

struct GCObservables {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
  double particles = 0.0;
};

/// <c+_i c_j> = delta_ij - G_ji; E_p = U sum_i (1 - Gup_ii)(1 - Gdown_ii).
GCObservables gc_observables(const Eigen::MatrixXd& g_up, const Eigen::MatrixXd& g_down, const ModelSpec& model);

bool is_bipartite(const LatticeSpec& lattice);

struct MuSearch {
  double tolerance = 1e-4;
  double beta = 1.0;
  RunConfig mc;              // used when the model is too large for ED
  int max_ed_sites = 8;
};

/// Bisection on <N>(mu) over [-10|t| - U, 10|t| + U]. Half filling on a
/// bipartite lattice returns U/2 directly.
double tune_mu(const ModelSpec& model, double target, const MuSearch& search);

/// Metropolis over Hirsch fields on |det_up det_down| with sign-weighted
/// estimators. Densities per site are recorded, so <N> is their sum.
MeasurementAccumulator gce_run(const ModelSpec& model, const RunConfig& config, double mu);

}  // namespace cafqmc
