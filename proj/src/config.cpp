#include "cafqmc/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cafqmc {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::ce: return "ce";
    case Method::gce: return "gce";
    case Method::ed: return "ed";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "\n") + s;
  return out;
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
      if (!ok.count(k)) problems_.push_back("unknown key \"" + where + k + "\"");
    }
  }

  bool object(const json& obj, const std::string& key, const std::string& where, bool required) {
    if (!obj.contains(key)) {
      if (required) problems_.push_back("missing required field \"" + where + key + "\"");
      return false;
    }
    if (!obj.at(key).is_object()) {
      problems_.push_back("\"" + where + key + "\" must be an object");
      return false;
    }
    return true;
  }

  template <typename T>
  void number(const json& obj, const std::string& key, const std::string& where, T& out, bool required) {
    if (!obj.contains(key)) {
      if (required) problems_.push_back("missing required field \"" + where + key + "\"");
      return;
    }
    const json& v = obj.at(key);
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        problems_.push_back("\"" + where + key + "\" must be an integer");
        return;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) {
          out = v.get<T>();
        } else if (v.get<long long>() >= 0) {
          out = static_cast<T>(v.get<long long>());
        } else {
          problems_.push_back("\"" + where + key + "\" must be non-negative");
        }
      } else {
        out = v.get<T>();
      }
    } else {
      if (!v.is_number()) {
        problems_.push_back("\"" + where + key + "\" must be a number");
        return;
      }
      out = v.get<T>();
    }
  }

  void string(const json& obj, const std::string& key, const std::string& where, std::string& out, bool required) {
    if (!obj.contains(key)) {
      if (required) problems_.push_back("missing required field \"" + where + key + "\"");
      return;
    }
    if (!obj.at(key).is_string()) {
      problems_.push_back("\"" + where + key + "\" must be a string");
      return;
    }
    out = obj.at(key).get<std::string>();
  }

  void boolean(const json& obj, const std::string& key, const std::string& where, bool& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_boolean()) {
      problems_.push_back("\"" + where + key + "\" must be a boolean");
      return;
    }
    out = obj.at(key).get<bool>();
  }

  void fail(const std::string& msg) { problems_.push_back(msg); }

 private:
  std::vector<std::string>& problems_;
};

}  // namespace

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::runtime_error(join(problems)), problems_(problems) {}

RunConfig ExperimentConfig::run_config(double beta) const {
  RunConfig r;
  r.walkers = walkers;
  r.sweeps = sweeps;
  r.burn_in = burn_in;
  r.measure_interval = measure_interval;
  r.blocks = blocks;
  r.seed = seed;
  r.cutoff = cutoff;
  r.disc = DiscretizationSpec::make(beta, dtau, groups);
  r.series_path = series;
  return r;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const auto& a = model;
  const auto& b = o.model;
  const bool same_model = a.lattice.extents == b.lattice.extents && a.lattice.boundary == b.lattice.boundary &&
                          a.statistics == b.statistics && a.t == b.t && a.U == b.U && a.particles == b.particles &&
                          a.n_up == b.n_up && a.n_down == b.n_down;
  return same_model && method == o.method && betas == o.betas && dtau == o.dtau && groups == o.groups &&
         walkers == o.walkers && sweeps == o.sweeps && burn_in == o.burn_in &&
         measure_interval == o.measure_interval && blocks == o.blocks && seed == o.seed && cutoff == o.cutoff &&
         mu == o.mu && filling == o.filling && mu_tolerance == o.mu_tolerance && output == o.output &&
         series == o.series && wall_time == o.wall_time;
}

ExperimentConfig parse_config(const std::string& text, std::optional<Method> method) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  std::vector<std::string> problems;
  if (!doc.is_object()) throw ConfigError({"configuration must be a JSON object"});
  Reader r(problems);
  ExperimentConfig c;
  r.check_keys(doc, "", {"method", "model", "beta", "discretization", "run", "cutoff", "seed", "gce", "output",
                         "series", "wall_time"});

  if (doc.contains("method")) {
    std::string m;
    r.string(doc, "method", "", m, false);
    if (m == "ce") {
      c.method = Method::ce;
    } else if (m == "gce") {
      c.method = Method::gce;
    } else if (m == "ed") {
      c.method = Method::ed;
    } else if (!m.empty()) {
      r.fail("\"method\" must be one of ce, gce, ed");
    }
    if (method && m == to_string(c.method) && c.method != *method) {
      r.fail("config method \"" + m + "\" does not match the requested method \"" + to_string(*method) + "\"");
    }
  }
  if (method) c.method = *method;

  bool model_ok = false;
  if (r.object(doc, "model", "", true)) {
    const json& m = doc.at("model");
    r.check_keys(m, "model.", {"statistics", "lattice", "t", "U", "particles", "n_up", "n_down"});
    std::string stats;
    r.string(m, "statistics", "model.", stats, true);
    if (stats == "fermion") {
      c.model.statistics = Statistics::fermion;
      r.number(m, "n_up", "model.", c.model.n_up, true);
      r.number(m, "n_down", "model.", c.model.n_down, true);
      if (m.contains("particles")) r.fail("\"model.particles\" applies to bosons; use n_up and n_down");
    } else if (stats == "boson") {
      c.model.statistics = Statistics::boson;
      r.number(m, "particles", "model.", c.model.particles, true);
      if (m.contains("n_up") || m.contains("n_down")) r.fail("\"model.n_up\"/\"model.n_down\" apply to fermions");
    } else if (!stats.empty()) {
      r.fail("\"model.statistics\" must be fermion or boson");
    }
    r.number(m, "t", "model.", c.model.t, false);
    r.number(m, "U", "model.", c.model.U, true);
    if (r.object(m, "lattice", "model.", true)) {
      const json& l = m.at("lattice");
      r.check_keys(l, "model.lattice.", {"extents", "boundary"});
      if (!l.contains("extents")) {
        r.fail("missing required field \"model.lattice.extents\"");
      } else if (!l.at("extents").is_array()) {
        r.fail("\"model.lattice.extents\" must be an array of integers");
      } else {
        c.model.lattice.extents.clear();
        for (const auto& e : l.at("extents")) {
          if (!e.is_number_integer()) {
            r.fail("\"model.lattice.extents\" must be an array of integers");
            break;
          }
          c.model.lattice.extents.push_back(e.get<int>());
        }
      }
      std::string bc = "periodic";
      r.string(l, "boundary", "model.lattice.", bc, false);
      if (bc == "periodic") {
        c.model.lattice.boundary = Boundary::periodic;
      } else if (bc == "open") {
        c.model.lattice.boundary = Boundary::open;
      } else {
        r.fail("\"model.lattice.boundary\" must be periodic or open");
      }
    }
    model_ok = true;
  }

  if (!doc.contains("beta")) {
    r.fail("missing required field \"beta\"");
  } else if (!doc.at("beta").is_array()) {
    r.fail("\"beta\" must be an array of numbers");
  } else {
    for (const auto& b : doc.at("beta")) {
      if (!b.is_number()) {
        r.fail("\"beta\" must be an array of numbers");
        break;
      }
      c.betas.push_back(b.get<double>());
    }
    if (doc.at("beta").empty()) r.fail("empty beta list");
    for (double b : c.betas) {
      if (!(b > 0.0) || !std::isfinite(b)) {
        r.fail("beta values must be positive");
        break;
      }
    }
  }

  if (r.object(doc, "discretization", "", false)) {
    const json& d = doc.at("discretization");
    r.check_keys(d, "discretization.", {"dtau", "groups"});
    r.number(d, "dtau", "discretization.", c.dtau, false);
    r.number(d, "groups", "discretization.", c.groups, false);
  }
  if (!(c.dtau > 0.0)) r.fail("\"discretization.dtau\" must be positive");
  if (c.groups < 0) r.fail("\"discretization.groups\" must be non-negative");

  if (r.object(doc, "run", "", false)) {
    const json& d = doc.at("run");
    r.check_keys(d, "run.", {"walkers", "sweeps", "burn_in", "measure_interval", "blocks"});
    r.number(d, "walkers", "run.", c.walkers, false);
    r.number(d, "sweeps", "run.", c.sweeps, false);
    r.number(d, "burn_in", "run.", c.burn_in, false);
    r.number(d, "measure_interval", "run.", c.measure_interval, false);
    r.number(d, "blocks", "run.", c.blocks, false);
  }
  if (c.walkers <= 0) r.fail("\"run.walkers\" must be positive");
  if (c.sweeps <= 0) r.fail("\"run.sweeps\" must be positive");
  if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) r.fail("\"run.burn_in\" must lie in [0, 1)");
  if (c.measure_interval <= 0) r.fail("\"run.measure_interval\" must be positive");
  if (c.blocks <= 0) r.fail("\"run.blocks\" must be positive");

  if (doc.contains("cutoff") && !doc.at("cutoff").is_null()) {
    if (!doc.at("cutoff").is_number()) {
      r.fail("\"cutoff\" must be a number greater than 1 or null");
    } else if (!(doc.at("cutoff").get<double>() > 1.0)) {
      r.fail("\"cutoff\" must be greater than 1");
    } else {
      c.cutoff = CutoffSpec(doc.at("cutoff").get<double>());
    }
  }
  r.number(doc, "seed", "", c.seed, false);
  r.string(doc, "output", "", c.output, false);
  r.string(doc, "series", "", c.series, false);
  r.boolean(doc, "wall_time", "", c.wall_time);

  if (r.object(doc, "gce", "", false)) {
    const json& g = doc.at("gce");
    r.check_keys(g, "gce.", {"mu", "filling", "tolerance"});
    if (g.contains("mu")) {
      double mu = 0.0;
      r.number(g, "mu", "gce.", mu, false);
      c.mu = mu;
    }
    if (g.contains("filling")) {
      double f = 0.0;
      r.number(g, "filling", "gce.", f, false);
      c.filling = f;
    }
    r.number(g, "tolerance", "gce.", c.mu_tolerance, false);
    if (c.mu && c.filling) r.fail("\"gce.mu\" and \"gce.filling\" are mutually exclusive");
    if (!(c.mu_tolerance > 0.0)) r.fail("\"gce.tolerance\" must be positive");
  }

  if (model_ok) {
    try {
      c.model.validate();
    } catch (const std::exception& e) {
      r.fail(std::string("invalid model: ") + e.what());
    }
    if (c.model.statistics == Statistics::fermion && c.model.U < 0.0 && c.method != Method::ed) {
      r.fail("negative U is not supported by the Hirsch decoupling (fermion AFQMC)");
    }
    if (c.method == Method::gce && c.model.statistics != Statistics::fermion) {
      r.fail("gce method requires a fermion model");
    }
    if (c.filling && !(*c.filling > 0.0 && *c.filling < 2.0 * c.model.site_count())) {
      r.fail("\"gce.filling\" must lie in (0, 2 N_s)");
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<Method> method) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read configuration file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), method);
}

std::string emit_config(const ExperimentConfig& c) {
  json doc;
  doc["method"] = to_string(c.method);
  json m;
  m["statistics"] = c.model.statistics == Statistics::fermion ? "fermion" : "boson";
  m["lattice"] = {{"extents", c.model.lattice.extents},
                  {"boundary", c.model.lattice.boundary == Boundary::periodic ? "periodic" : "open"}};
  m["t"] = c.model.t;
  m["U"] = c.model.U;
  if (c.model.statistics == Statistics::fermion) {
    m["n_up"] = c.model.n_up;
    m["n_down"] = c.model.n_down;
  } else {
    m["particles"] = c.model.particles;
  }
  doc["model"] = m;
  doc["beta"] = c.betas;
  doc["discretization"] = {{"dtau", c.dtau}, {"groups", c.groups}};
  doc["run"] = {{"walkers", c.walkers},
                {"sweeps", c.sweeps},
                {"burn_in", c.burn_in},
                {"measure_interval", c.measure_interval},
                {"blocks", c.blocks}};
  doc["cutoff"] = c.cutoff.enabled() ? json(c.cutoff.xi()) : json(nullptr);
  doc["seed"] = c.seed;
  if (c.mu || c.filling || c.method == Method::gce) {
    json g;
    if (c.mu) g["mu"] = *c.mu;
    if (c.filling) g["filling"] = *c.filling;
    g["tolerance"] = c.mu_tolerance;
    doc["gce"] = g;
  }
  if (!c.output.empty()) doc["output"] = c.output;
  if (!c.series.empty()) doc["series"] = c.series;
  doc["wall_time"] = c.wall_time;
  return doc.dump(2);
}

}  // namespace cafqmc
