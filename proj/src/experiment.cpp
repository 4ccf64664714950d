#include "cafqmc/experiment.hpp"

#include "cafqmc/ed.hpp"
#include "cafqmc/gce.hpp"
#include "cafqmc/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace cafqmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ResultRow from_summary(const RunSummary& s) {
  ResultRow row;
  row.e_tot = s.total.mean;
  row.e_tot_err = s.total.error;
  row.e_k = s.kinetic.mean;
  row.e_k_err = s.kinetic.error;
  row.e_p = s.potential.mean;
  row.e_p_err = s.potential.error;
  row.average_sign = s.average_sign;
  row.acceptance = s.acceptance;
  row.unreliable = s.unreliable;
  row.samples = s.samples;
  row.invalid_samples = s.invalid_samples;
  return row;
}

int fixed_particles(const ModelSpec& m) {
  return m.statistics == Statistics::fermion ? m.n_up + m.n_down : m.particles;
}

ResultRow run_point(const ExperimentConfig& c, double beta, const std::optional<GrandCanonicalED>& gce_ed,
                    const std::optional<SpectrumED>& spectrum) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row;
  if (c.method == Method::ed) {
    if (c.mu || c.filling) {
      const double mu = c.mu ? *c.mu : 0.0;
      const ThermalED t = gce_ed->thermal(beta, mu);
      row.e_tot = t.total;
      row.e_k = t.kinetic;
      row.e_p = t.potential;
      row.mu = mu;
      row.particles = t.particles;
    } else {
      const ThermalED t = canonical_thermal(*spectrum, beta);
      row.e_tot = t.total;
      row.e_k = t.kinetic;
      row.e_p = t.potential;
      row.mu = kNaN;
      row.particles = fixed_particles(c.model);
    }
    row.particles_err = 0.0;
  } else if (c.method == Method::ce) {
    const RunConfig rc = c.run_config(beta);
    const MeasurementAccumulator acc = run(c.model, rc);
    row = from_summary(summarize(acc, rc.blocks));
    row.mu = kNaN;
    row.particles = fixed_particles(c.model);
    row.particles_err = 0.0;
  } else {
    const RunConfig rc = c.run_config(beta);
    double mu;
    if (c.mu) {
      mu = *c.mu;
    } else {
      MuSearch search;
      search.beta = beta;
      search.tolerance = c.mu_tolerance;
      search.mc = rc;
      search.mc.sweeps = std::max<long>(rc.sweeps / 10, 20);
      mu = tune_mu(c.model, c.filling ? *c.filling : fixed_particles(c.model), search);
    }
    const MeasurementAccumulator acc = gce_run(c.model, rc, mu);
    row = from_summary(summarize(acc, rc.blocks));
    row.mu = mu;
    std::vector<cplx> n;
    n.reserve(acc.size());
    for (const auto& d : acc.densities) n.push_back(d.sum());
    if (!n.empty()) {
      const Estimate e = acc.estimate(n, std::min<int>(rc.blocks, static_cast<int>(n.size())));
      row.particles = e.mean;
      row.particles_err = e.error;
    }
  }
  row.method = to_string(c.method);
  row.beta = beta;
  row.seed = c.seed;
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  std::vector<double> betas = config.betas;
  std::sort(betas.begin(), betas.end());
  std::optional<GrandCanonicalED> gce_ed;
  std::optional<SpectrumED> spectrum;
  if (config.method == Method::ed) {
    if (config.mu || config.filling) {
      if (config.filling) throw ExperimentError("ed method takes gce.mu, not gce.filling");
      gce_ed.emplace(config.model);
    } else {
      spectrum = diagonalize(config.model);
    }
  }
  std::vector<ResultRow> rows;
  for (double beta : betas) {
    try {
      rows.push_back(run_point(config, beta, gce_ed, spectrum));
    } catch (const std::exception& e) {
      throw ExperimentError("beta = " + fmt(beta) + ": " + e.what());
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool wall_time) {
  out << "method,beta,E_tot,E_tot_err,E_k,E_k_err,E_p,E_p_err,average_sign,acceptance,unreliable,mu,N,N_err,"
         "samples,invalid_samples,seed";
  if (wall_time) out << ",wall_time";
  out << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << fmt(r.beta) << ',' << fmt(r.e_tot) << ',' << fmt(r.e_tot_err) << ',' << fmt(r.e_k)
        << ',' << fmt(r.e_k_err) << ',' << fmt(r.e_p) << ',' << fmt(r.e_p_err) << ',' << fmt(r.average_sign) << ','
        << fmt(r.acceptance) << ',' << (r.unreliable ? 1 : 0) << ',' << fmt(r.mu) << ',' << fmt(r.particles) << ','
        << fmt(r.particles_err) << ',' << r.samples << ',' << r.invalid_samples << ',' << r.seed;
    if (wall_time) out << ',' << fmt(r.wall_time);
    out << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results file");
  const auto header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  for (const char* need : {"method", "beta", "E_tot", "E_tot_err"}) {
    if (!col.count(need)) throw std::runtime_error(std::string("results file lacks column ") + need);
  }
  auto num = [&](const std::vector<std::string>& cells, const std::string& name, double fallback) {
    const auto it = col.find(name);
    if (it == col.end() || it->second >= cells.size()) return fallback;
    return std::stod(cells[it->second]);
  };
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw std::runtime_error("ragged results row: " + line);
    ResultRow r;
    r.method = cells[col["method"]];
    r.beta = num(cells, "beta", 0.0);
    r.e_tot = num(cells, "E_tot", 0.0);
    r.e_tot_err = num(cells, "E_tot_err", 0.0);
    r.e_k = num(cells, "E_k", kNaN);
    r.e_k_err = num(cells, "E_k_err", kNaN);
    r.e_p = num(cells, "E_p", kNaN);
    r.e_p_err = num(cells, "E_p_err", kNaN);
    r.average_sign = num(cells, "average_sign", 1.0);
    r.acceptance = num(cells, "acceptance", kNaN);
    r.unreliable = num(cells, "unreliable", 0.0) != 0.0;
    r.mu = num(cells, "mu", kNaN);
    r.particles = num(cells, "N", kNaN);
    r.particles_err = num(cells, "N_err", kNaN);
    rows.push_back(r);
  }
  return rows;
}

ComparisonReport compare(const std::vector<ResultRow>& ce, const std::vector<ResultRow>& gce, double reference,
                         double tolerance) {
  if (ce.size() != gce.size()) throw std::invalid_argument("mismatched beta grids");
  ComparisonReport rep;
  rep.reference = reference;
  rep.tolerance = tolerance;
  std::vector<ResultRow> a = ce, b = gce;
  auto by_beta = [](const ResultRow& x, const ResultRow& y) { return x.beta < y.beta; };
  std::sort(a.begin(), a.end(), by_beta);
  std::sort(b.begin(), b.end(), by_beta);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].beta != b[k].beta) throw std::invalid_argument("mismatched beta grids");
    ComparisonRow r;
    r.beta = a[k].beta;
    r.ce = a[k].e_tot;
    r.ce_err = a[k].e_tot_err;
    r.gce = b[k].e_tot;
    r.gce_err = b[k].e_tot_err;
    r.ce_deviation = r.ce - reference;
    r.gce_deviation = r.gce - reference;
    r.difference = r.ce - r.gce;
    if (!rep.ce_converged && std::abs(r.ce_deviation) <= tolerance) rep.ce_converged = r.beta;
    if (!rep.gce_converged && std::abs(r.gce_deviation) <= tolerance) rep.gce_converged = r.beta;
    rep.rows.push_back(r);
  }
  return rep;
}

void write_comparison(std::ostream& out, const ComparisonReport& rep) {
  out << "beta,ce,ce_err,gce,gce_err,ce_deviation,gce_deviation,ce_minus_gce\n";
  for (const auto& r : rep.rows) {
    out << fmt(r.beta) << ',' << fmt(r.ce) << ',' << fmt(r.ce_err) << ',' << fmt(r.gce) << ',' << fmt(r.gce_err)
        << ',' << fmt(r.ce_deviation) << ',' << fmt(r.gce_deviation) << ',' << fmt(r.difference) << '\n';
  }
  out << "# reference " << fmt(rep.reference) << ", tolerance " << fmt(rep.tolerance) << '\n';
  out << "# ce first within tolerance at beta " << (rep.ce_converged ? fmt(*rep.ce_converged) : "none") << '\n';
  out << "# gce first within tolerance at beta " << (rep.gce_converged ? fmt(*rep.gce_converged) : "none") << '\n';
}

}  // namespace cafqmc
