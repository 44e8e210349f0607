#include <algorithm>
#include <fstream>
#include <set>

#include "hadest/cli.hpp"
#include "hadest/cli_json.hpp"

namespace hadest::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& ctx) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ParseError("unknown field '" + key + "' in " + ctx);
  }
}

const json& require(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing required field '") + key + "'");
  return *it;
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ParseError("field '" + key + "' must be a number");
  return v.get<double>();
}

Index as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ParseError("field '" + key + "' must be an integer");
  if (v.is_number_unsigned()) return static_cast<Index>(v.get<std::uint64_t>());
  return static_cast<Index>(v.get<std::int64_t>());
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ParseError("field '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ParseError("field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw ParseError("field '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_double(e, key));
  return out;
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "type1") return ExperimentKind::TypeOne;
  if (s == "mse") return ExperimentKind::Mse;
  if (s == "zscore") return ExperimentKind::ZScore;
  if (s == "rate") return ExperimentKind::Rate;
  throw ParseError("unknown experiment '" + s + "' (type1, mse, zscore, rate)");
}

SimMethod parse_sim_method(const std::string& s) {
  for (SimMethod m : {SimMethod::White, SimMethod::MW, SimMethod::Hadamard, SimMethod::HadamardT}) {
    if (s == sim_method_name(m)) return m;
  }
  throw ParseError("unknown method '" + s + "' (White, MW, Hadamard, HadamardT)");
}

DesignSpec parse_design(const json& d) {
  if (!d.is_object()) throw ParseError("field 'design' must be an object");
  reject_unknown(d, {"kind", "covariance", "rho_x", "gamma"}, "design");
  DesignSpec spec;
  const std::string kind = as_string(require(d, "kind"), "design.kind");
  if (kind == "iid_gaussian") {
    if (d.size() != 1) throw ParseError("iid_gaussian design takes no further fields");
    return spec;
  }
  if (kind != "correlated") throw ParseError("unknown design kind '" + kind + "'");
  spec.kind = DesignSpec::Kind::Correlated;
  const std::string cov = as_string(require(d, "covariance"), "design.covariance");
  if (cov == "identity") {
    spec.covariance = DesignSpec::Covariance::Identity;
  } else if (cov == "ar1") {
    spec.covariance = DesignSpec::Covariance::Ar1;
    spec.rho_x = as_double(require(d, "rho_x"), "design.rho_x");
  } else if (cov == "explicit") {
    spec.covariance = DesignSpec::Covariance::Explicit;
    const json& g = require(d, "gamma");
    if (!g.is_array() || g.empty()) throw ParseError("design.gamma must be a square array");
    const Index p = static_cast<Index>(g.size());
    spec.gamma.resize(p, p);
    for (Index i = 0; i < p; ++i) {
      const auto row = as_numbers(g[static_cast<std::size_t>(i)], "design.gamma");
      if (static_cast<Index>(row.size()) != p) throw ParseError("design.gamma must be square");
      for (Index j = 0; j < p; ++j) spec.gamma(i, j) = row[static_cast<std::size_t>(j)];
    }
  } else {
    throw ParseError("unknown design covariance '" + cov + "'");
  }
  if (cov != "ar1" && d.contains("rho_x")) throw ParseError("rho_x only applies to ar1");
  if (cov != "explicit" && d.contains("gamma")) throw ParseError("gamma only applies to explicit");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ParseError("configuration must be a JSON object");
  reject_unknown(j,
                 {"schema_version", "experiment", "n", "p", "rho", "design", "beta", "n_reps",
                  "master_seed", "alpha", "methods", "fix_design", "coordinate", "t_grid",
                  "rate_c"},
                 "configuration");
  const json& version = require(j, "schema_version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kSchemaVersion) {
    throw ParseError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) +
                     ")");
  }

  ExperimentConfig cfg;
  cfg.kind = parse_kind(as_string(require(j, "experiment"), "experiment"));
  cfg.n = as_count(require(j, "n"), "n");
  cfg.p = as_count(require(j, "p"), "p");
  cfg.n_reps = as_count(require(j, "n_reps"), "n_reps");
  const json& seed = require(j, "master_seed");
  if (!seed.is_number_unsigned()) throw ParseError("master_seed must be a nonnegative integer");
  cfg.master_seed = seed.get<std::uint64_t>();

  if (j.contains("rho")) cfg.rho = as_double(j["rho"], "rho");
  if (j.contains("design")) cfg.design = parse_design(j["design"]);
  if (j.contains("beta")) {
    const json& b = j["beta"];
    if (b.is_string()) {
      if (b.get<std::string>() != "zero") throw ParseError("beta must be \"zero\" or an array");
    } else {
      const auto v = as_numbers(b, "beta");
      cfg.beta = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    }
  }
  if (j.contains("alpha")) cfg.alpha = as_double(j["alpha"], "alpha");
  if (j.contains("methods")) {
    const json& ms = j["methods"];
    if (!ms.is_array()) throw ParseError("methods must be an array of names");
    cfg.methods.clear();
    for (const auto& m : ms) {
      const SimMethod method = parse_sim_method(as_string(m, "methods"));
      if (std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end()) {
        throw ParseError("method listed twice: " + m.get<std::string>());
      }
      cfg.methods.push_back(method);
    }
  }
  if (j.contains("fix_design")) cfg.fix_design = as_bool(j["fix_design"], "fix_design");
  if (j.contains("coordinate")) cfg.coordinate = as_count(j["coordinate"], "coordinate");
  if (j.contains("t_grid")) cfg.t_grid = as_numbers(j["t_grid"], "t_grid");
  if (j.contains("rate_c")) cfg.rate_c = as_double(j["rate_c"], "rate_c");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = std::string(kind_name(cfg.kind));
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["rho"] = cfg.rho;
  json d;
  if (cfg.design.kind == DesignSpec::Kind::IidGaussian) {
    d["kind"] = "iid_gaussian";
  } else {
    d["kind"] = "correlated";
    switch (cfg.design.covariance) {
      case DesignSpec::Covariance::Identity:
        d["covariance"] = "identity";
        break;
      case DesignSpec::Covariance::Ar1:
        d["covariance"] = "ar1";
        d["rho_x"] = cfg.design.rho_x;
        break;
      case DesignSpec::Covariance::Explicit: {
        d["covariance"] = "explicit";
        json g = json::array();
        for (Index i = 0; i < cfg.design.gamma.rows(); ++i) {
          json row = json::array();
          for (Index k = 0; k < cfg.design.gamma.cols(); ++k) row.push_back(cfg.design.gamma(i, k));
          g.push_back(row);
        }
        d["gamma"] = g;
        break;
      }
    }
  }
  j["design"] = d;
  if (cfg.beta) {
    j["beta"] = std::vector<double>(cfg.beta->data(), cfg.beta->data() + cfg.beta->size());
  } else {
    j["beta"] = "zero";
  }
  j["n_reps"] = cfg.n_reps;
  j["master_seed"] = cfg.master_seed;
  j["alpha"] = cfg.alpha;
  json ms = json::array();
  for (SimMethod m : cfg.methods) ms.push_back(std::string(sim_method_name(m)));
  j["methods"] = ms;
  j["fix_design"] = cfg.fix_design;
  j["coordinate"] = cfg.coordinate;
  j["t_grid"] = cfg.t_grid;
  j["rate_c"] = cfg.rate_c;
  return j;
}

}  // namespace hadest::cli
