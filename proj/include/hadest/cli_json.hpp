#pragma once

#include <string>

#include <json.hpp>

#include "hadest/diagnostics.hpp"
#include "hadest/simulation.hpp"

namespace hadest::cli {

inline constexpr int kSchemaVersion = 1;

/// Experiment configuration from JSON. Unknown keys, a missing or wrong
/// schema_version and ill-typed values throw ParseError.
///
/// {
///   "schema_version": 1,
///   "experiment": "type1" | "mse" | "zscore" | "rate",
///   "n": 100, "p": 50, "rho": 0.9,
///   "design": {"kind": "iid_gaussian"}
///           | {"kind": "correlated", "covariance": "identity" | "ar1" | "explicit",
///              "rho_x": 0.5, "gamma": [[...], ...]},
///   "beta": "zero" | [b_1, ..., b_p],
///   "n_reps": 1000, "master_seed": 42, "alpha": 0.05,
///   "methods": ["White", "MW", "Hadamard", "HadamardT"],
///   "fix_design": true, "coordinate": 0,
///   "t_grid": [5, 10, 20], "rate_c": 1.01
/// }
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Non-finite numbers become null.
nlohmann::json report_to_json(const DiagnosticsReport& r);
nlohmann::json result_to_json(const ExperimentResult& r, const ExperimentConfig& cfg);

}  // namespace hadest::cli
