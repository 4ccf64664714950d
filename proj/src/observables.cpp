#include "cafqmc/observables.hpp"

namespace cafqmc {

Eigen::MatrixXcd one_body_dm(const EffectiveSpectrum& spectrum, const OccupationTable& table) {
  return (spectrum.P * table.occupations.asDiagonal() * spectrum.P_inv).transpose();
}

Eigen::VectorXcd local_doublon(const Eigen::MatrixXcd& d1_up, const Eigen::MatrixXcd& d1_down) {
  return d1_up.diagonal().cwiseProduct(d1_down.diagonal());
}

Eigen::VectorXcd local_doublon(const EffectiveSpectrum& up, const EffectiveSpectrum& down,
                               const OccupationTable& table_up, const OccupationTable& table_down) {
  return local_doublon(one_body_dm(up, table_up), one_body_dm(down, table_down));
}

Eigen::VectorXcd local_moment_boson(const EffectiveSpectrum& spectrum, const OccupationTable& table) {
  const Eigen::Index ns = spectrum.size();
  const Eigen::VectorXcd& n = table.occupations;
  const Eigen::VectorXcd& n2 = table.squares;
  const bool have_pairs = table.pairs.rows() == ns;
  Eigen::VectorXcd out(ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    // w_lambda = <lambda|i><i|lambda>
    const Eigen::VectorXcd w = spectrum.P_inv.col(i).cwiseProduct(spectrum.P.row(i).transpose());
    cplx acc = 0.0;
    for (Eigen::Index a = 0; a < ns; ++a) {
      acc += w(a) * w(a) * n2(a);
      for (Eigen::Index b = 0; b < ns; ++b) {
        if (a == b) continue;
        const cplx pair = have_pairs ? table.pairs(a, b) : cplx(0.0);
        acc += w(a) * w(b) * (2.0 * pair + n(a));
      }
    }
    out(i) = acc;
  }
  return out;
}

EnergySample energies(const ModelSpec& model, const Eigen::MatrixXd& hopping,
                      std::span<const Eigen::MatrixXcd> one_body, const Eigen::VectorXcd& local) {
  EnergySample e;
  for (const auto& d1 : one_body) e.kinetic += (hopping.cast<cplx>().cwiseProduct(d1)).sum();
  e.potential = interaction_coefficient(model) * local.sum();
  e.total = e.kinetic + e.potential;
  return e;
}

}  // namespace cafqmc
