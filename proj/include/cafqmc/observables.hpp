#pragma once

#include "cafqmc/model.hpp"
#include "cafqmc/propagator.hpp"
#include "cafqmc/recursion.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cafqmc {

/// Per-sample density matrices. `local` holds n_up n_down per site for
/// fermions and n^2 per site for bosons.
struct DensityMatrices {
  std::vector<Eigen::MatrixXcd> one_body;
  Eigen::VectorXcd local;
};

/// D1_ij = <a+_i a_j> = sum_lambda P_inv(lambda, i) P(j, lambda) <n_lambda>.
Eigen::MatrixXcd one_body_dm(const EffectiveSpectrum& spectrum, const OccupationTable& table);

/// Sectors decouple under fixed fields, so d_i = D1up_ii * D1down_ii.
Eigen::VectorXcd local_doublon(const Eigen::MatrixXcd& d1_up, const Eigen::MatrixXcd& d1_down);
Eigen::VectorXcd local_doublon(const EffectiveSpectrum& up, const EffectiveSpectrum& down,
                               const OccupationTable& table_up, const OccupationTable& table_down);

/// <n_i^2> from the diagonal pairings of the four-index overlap. The table must
/// carry squares and pairs (see full_table).
Eigen::VectorXcd local_moment_boson(const EffectiveSpectrum& spectrum, const OccupationTable& table);

struct EnergySample {
  cplx kinetic = 0.0;
  cplx potential = 0.0;
  cplx total = 0.0;
  cplx weight = 1.0;
};

/// E_k = sum_sigma sum_ij K_ij D1_ij, E_p = coefficient * sum_i local_i.
EnergySample energies(const ModelSpec& model, const Eigen::MatrixXd& hopping,
                      std::span<const Eigen::MatrixXcd> one_body, const Eigen::VectorXcd& local);

}  // namespace cafqmc
