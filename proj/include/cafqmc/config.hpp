#pragma once

#include "cafqmc/model.hpp"
#include "cafqmc/propagator.hpp"
#include "cafqmc/recursion.hpp"
#include "cafqmc/sampler.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cafqmc {

enum class Method { ce, gce, ed };

std::string to_string(Method m);

/// Thrown with every violated constraint, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ExperimentConfig {
  Method method = Method::ce;
  ModelSpec model;
  std::vector<double> betas;
  double dtau = 0.02;
  int groups = 0;  // 0: default grouping
  int walkers = 50;
  long sweeps = 200000;
  double burn_in = 0.1;
  int measure_interval = 1;
  int blocks = 100;
  std::uint64_t seed = 1;
  CutoffSpec cutoff;
  std::optional<double> mu;       // gce: fixed chemical potential
  std::optional<double> filling;  // gce: target <N> (defaults to N_up + N_down)
  double mu_tolerance = 1e-3;
  std::string output;  // empty: stdout
  std::string series;  // optional raw series CSV (ce only)
  bool wall_time = false;

  RunConfig run_config(double beta) const;
  bool operator==(const ExperimentConfig&) const;
};

/// Strict parse: unknown keys, missing required fields and type mismatches are
/// all reported together. `method`, when given, is the method the caller will
/// run; a conflicting "method" key is an error and validation uses it.
ExperimentConfig parse_config(const std::string& text, std::optional<Method> method = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<Method> method = std::nullopt);
std::string emit_config(const ExperimentConfig& config);

}  // namespace cafqmc
