#include <doctest.h>

#include "cafqmc/config.hpp"
#include "cafqmc/experiment.hpp"

#include <cmath>
#include <sstream>

using namespace cafqmc;

namespace {

const char* kFermion = R"({
  "model": {"statistics": "fermion", "lattice": {"extents": [6]}, "U": 2.0, "n_up": 3, "n_down": 3},
  "beta": [1.0]
})";

std::vector<std::string> problems_of(const std::string& text, std::optional<Method> m = std::nullopt) {
  try {
    parse_config(text, m);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& p, const std::string& needle) {
  for (const auto& s : p)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const auto c = parse_config(kFermion);
  CHECK(c.method == Method::ce);
  CHECK(c.dtau == 0.02);
  CHECK(c.walkers == 50);
  CHECK(c.sweeps == 200000);
  CHECK(c.model.t == 1.0);
  CHECK(c.model.lattice.boundary == Boundary::periodic);
  CHECK_FALSE(c.cutoff.enabled());
}

TEST_CASE("config errors are collected") {
  CHECK(mentions(problems_of(R"({"model": {"statistics": "fermion", "lattice": {"extents": [2]}, "U": 1,
    "n_up": 1, "n_down": 1}, "beta": []})"), "empty beta list"));
  CHECK(mentions(problems_of(R"({"model": {"statistics": "fermion", "lattice": {"extents": [2]}, "U": -1,
    "n_up": 1, "n_down": 1}, "beta": [1]})"), "negative U"));
  const auto p = problems_of(R"({"model": {"statistics": "fermion", "lattice": {"extents": [2]}, "U": "x",
    "n_up": 1, "n_down": 1, "colour": 3}, "beta": [1], "bogus": true})");
  CHECK(mentions(p, "unknown key \"bogus\""));
  CHECK(mentions(p, "unknown key \"model.colour\""));
  CHECK(mentions(p, "\"model.U\" must be a number"));
  CHECK(p.size() >= 3);
  CHECK(mentions(problems_of(R"({"beta": [1]})"), "missing required field \"model\""));
  CHECK(mentions(problems_of("{not json"), "malformed JSON"));
  CHECK(mentions(problems_of(kFermion, Method::ed).empty() ? std::vector<std::string>{"ok"} : std::vector<std::string>{},
                 "ok"));
  CHECK(mentions(problems_of(R"({"method": "gce", "model": {"statistics": "fermion", "lattice": {"extents": [2]},
    "U": 1, "n_up": 1, "n_down": 1}, "beta": [1]})", Method::ce), "does not match"));
  CHECK(mentions(problems_of(R"({"model": {"statistics": "boson", "lattice": {"extents": [3]}, "U": 1,
    "particles": 3}, "beta": [1]})", Method::gce), "fermion"));
  CHECK(mentions(problems_of(R"({"model": {"statistics": "fermion", "lattice": {"extents": [2]}, "U": 1,
    "n_up": 1, "n_down": 1}, "beta": [1], "cutoff": 0.5})"), "cutoff"));
}

TEST_CASE("negative U is allowed for ED") {
  CHECK(problems_of(R"({"model": {"statistics": "fermion", "lattice": {"extents": [2]}, "U": -1,
    "n_up": 1, "n_down": 1}, "beta": [1]})", Method::ed).empty());
}

TEST_CASE("emit and parse round trip") {
  ExperimentConfig c = parse_config(kFermion);
  c.method = Method::gce;
  c.betas = {0.5, 2.0, 8.0};
  c.cutoff = CutoffSpec(1e4);
  c.filling = 5.0;
  c.walkers = 7;
  c.seed = 123456789012345ULL;
  c.series = "s.csv";
  c.model.lattice.boundary = Boundary::open;
  CHECK(parse_config(emit_config(c)) == c);

  ExperimentConfig b = parse_config(R"({"model": {"statistics": "boson", "lattice": {"extents": [3]}, "U": 4,
    "particles": 3}, "beta": [0.1, 0.4]})");
  CHECK(parse_config(emit_config(b)) == b);
}

TEST_CASE("ED experiment rows and CSV") {
  ExperimentConfig c = parse_config(kFermion, Method::ed);
  c.betas = {3.2, 1.0};
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].beta == 1.0);
  CHECK(rows[0].e_tot == doctest::Approx(-3.3083).epsilon(1e-4));
  CHECK(rows[0].e_tot_err == 0.0);

  std::ostringstream a, b;
  write_results_csv(a, rows);
  write_results_csv(b, rows);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("method,beta,E_tot,", 0) == 0);
  std::istringstream in(a.str());
  const auto back = read_results_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].e_tot == rows[1].e_tot);
  CHECK(std::isnan(back[0].mu));
}

TEST_CASE("CE experiment is deterministic") {
  ExperimentConfig c = parse_config(R"({"model": {"statistics": "boson", "lattice": {"extents": [3]}, "U": 2,
    "particles": 3}, "beta": [0.2], "run": {"walkers": 2, "sweeps": 30, "blocks": 5}, "seed": 9})");
  std::ostringstream a, b;
  write_results_csv(a, run_experiment(c));
  write_results_csv(b, run_experiment(c));
  CHECK(a.str() == b.str());
}

TEST_CASE("comparison report") {
  auto row = [](double beta, double e, double err) {
    ResultRow r;
    r.beta = beta;
    r.e_tot = e;
    r.e_tot_err = err;
    return r;
  };
  // published CE/GCE benchmark rows, beta = 4..8
  const std::vector<ResultRow> ce{row(4, -5.376, 0.007), row(5, -5.416, 0.007), row(6, -5.398, 0.007),
                                  row(7, -5.406, 0.007), row(8, -5.402, 0.007)};
  const std::vector<ResultRow> gce{row(4, -5.13, 0.01), row(5, -5.20, 0.01), row(6, -5.18, 0.02),
                                   row(7, -5.25, 0.01), row(8, -5.30, 0.04)};
  const auto rep = compare(ce, gce, -5.4095, 0.05);
  CHECK(rep.rows.size() == 5);
  REQUIRE(rep.ce_converged);
  CHECK(*rep.ce_converged <= 5.0);
  CHECK_FALSE(rep.gce_converged);

  const auto same = compare(ce, ce, -5.4095, 0.05);
  for (const auto& r : same.rows) CHECK(r.difference == 0.0);
  CHECK(compare({ce[0]}, {gce[0]}, -5.4095, 0.05).rows.size() == 1);
  CHECK_THROWS(compare(ce, {gce[0]}, -5.4095, 0.05));
}
