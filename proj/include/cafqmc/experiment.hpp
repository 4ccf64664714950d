#pragma once

#include "cafqmc/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cafqmc {

/// One CSV row per beta. ED rows carry zero errors, sign 1 and acceptance 1;
/// mu and N_err are NaN where they do not apply.
struct ResultRow {
  std::string method;
  double beta = 0.0;
  double e_tot = 0.0, e_tot_err = 0.0;
  double e_k = 0.0, e_k_err = 0.0;
  double e_p = 0.0, e_p_err = 0.0;
  double average_sign = 1.0;
  double acceptance = 1.0;
  bool unreliable = false;
  double mu = 0.0;
  double particles = 0.0, particles_err = 0.0;
  long samples = 0;
  long invalid_samples = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
};

/// Rows sorted by beta. Module errors are rethrown with the beta attached.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Header row always; numbers in %.17e. The wall_time column is only written
/// when requested so that repeated runs are byte-identical.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool wall_time = false);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct ComparisonRow {
  double beta = 0.0;
  double ce = 0.0, ce_err = 0.0;
  double gce = 0.0, gce_err = 0.0;
  double ce_deviation = 0.0;
  double gce_deviation = 0.0;
  double difference = 0.0;  // ce - gce
};

struct ComparisonReport {
  double reference = 0.0;
  double tolerance = 0.0;
  std::vector<ComparisonRow> rows;
  std::optional<double> ce_converged;   // first beta within tolerance
  std::optional<double> gce_converged;
};

ComparisonReport compare(const std::vector<ResultRow>& ce, const std::vector<ResultRow>& gce, double reference,
                         double tolerance);
void write_comparison(std::ostream& out, const ComparisonReport& report);

/// Beta context attached to a failure inside a module.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cafqmc
