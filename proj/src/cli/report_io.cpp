#include <cmath>
#include <ostream>

#include "hadest/cli.hpp"
#include "hadest/cli_json.hpp"

namespace hadest::cli {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json bounds(const EigenBounds& b) { return json{{"lower", num(b.lower)}, {"upper", num(b.upper)}}; }

template <class T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, double>) {
    return num(*v);
  } else {
    return vec(*v);
  }
}

}  // namespace

json report_to_json(const DiagnosticsReport& r) {
  json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["gamma"] = num(r.gamma);
  j["threshold_n"] = r.threshold_n;
  j["meets_threshold"] = r.meets_threshold;
  j["exists_generically"] = r.exists_generically;
  j["system_invertible"] = r.system_invertible;
  j["explanation"] = r.explanation;
  j["rank_upper_bound"] = r.rank_upper_bound;
  j["condition_number"] = opt(r.condition_number);
  j["min_eigenvalue"] = opt(r.min_eigenvalue);
  j["max_eigenvalue"] = opt(r.max_eigenvalue);
  j["dof"] = opt(r.dof);
  j["leverage_eigen_bounds"] = bounds(r.leverage_bounds);
  j["asymptotic_eigen_bounds"] =
      r.asymptotic_bounds ? bounds(*r.asymptotic_bounds) : json(nullptr);
  j["dependence_bound"] = opt(r.dependence_bound);
  if (r.per_coordinate_tv_bounds) {
    j["tv_bounds"] = json{{"exact", vec(*r.per_coordinate_tv_bounds)},
                          {"exact_abs", opt(r.per_coordinate_tv_bounds_abs)},
                          {"simplified", opt(r.per_coordinate_tv_simplified)}};
  } else {
    j["tv_bounds"] = nullptr;
  }
  return j;
}

json result_to_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = std::string(kind_name(r.kind));
  j["config"] = config_to_json(cfg);
  j["seeds"] = json{{"master_seed", r.seeds.master_seed},
                    {"design_seed", cfg.fix_design ? json(r.seeds.design_seed) : json(nullptr)},
                    {"n_reps", r.seeds.n_reps}};
  j["threads"] = r.threads_used;
  j["runtime_seconds"] = num(r.runtime_seconds);
  j["true_mse"] = num(r.true_mse);
  json methods = json::object();
  for (const auto& m : r.methods) {
    methods[std::string(sim_method_name(m.method))] =
        json{{"mean_type1", num(m.mean_type1)},
             {"per_coordinate_type1", vec(m.per_coordinate_type1)},
             {"coverage", num(m.coverage)},
             {"mse_mean", num(m.mse_mean)},
             {"mse_bias", num(m.mse_bias)},
             {"mse_bias_se", num(m.mse_bias_se)},
             {"fallback_trials", m.fallback_trials}};
  }
  j["methods"] = methods;
  if (r.zscore) {
    const ZScoreSummary& z = *r.zscore;
    j["zscore"] = json{{"coordinate", z.coordinate},
                       {"mc_mean", num(z.mc_mean)},
                       {"mc_sd", num(z.mc_sd)},
                       {"true_variance", num(z.true_variance)},
                       {"ks_statistic", num(z.ks_statistic)},
                       {"empirical_tv", num(z.empirical_tv)},
                       {"tv_bound_exact", num(z.tv_bound.exact)},
                       {"tv_bound_exact_abs", num(z.tv_bound.exact_abs)},
                       {"tv_bound_simplified", num(z.tv_bound.simplified)},
                       {"z_scores", vec(z.z_scores)}};
  }
  if (r.rate) {
    json rows = json::array();
    for (const auto& row : r.rate->rows) {
      rows.push_back(json{{"t", num(row.t)},
                          {"empirical_frequency", num(row.empirical_frequency)},
                          {"bound", num(row.bound)}});
    }
    j["rate"] = json{{"rows", rows}, {"median_statistic", num(r.rate->median_statistic)}};
  }
  return j;
}

void write_result_csv(std::ostream& out, const ExperimentResult& r) {
  switch (r.kind) {
    case ExperimentKind::TypeOne: {
      std::vector<std::string> header{"coordinate"};
      for (const auto& m : r.methods) header.push_back("type1_" + std::string(sim_method_name(m.method)));
      write_csv_row(out, header);
      const Index p = r.methods.empty() ? 0 : r.methods.front().per_coordinate_type1.size();
      for (Index j = 0; j < p; ++j) {
        std::vector<std::string> row{std::to_string(j)};
        for (const auto& m : r.methods) row.push_back(format_double(m.per_coordinate_type1(j)));
        write_csv_row(out, row);
      }
      std::vector<std::string> mean{"mean"}, coverage{"coverage"};
      for (const auto& m : r.methods) {
        mean.push_back(format_double(m.mean_type1));
        coverage.push_back(format_double(m.coverage));
      }
      write_csv_row(out, mean);
      write_csv_row(out, coverage);
      break;
    }
    case ExperimentKind::Mse: {
      std::vector<std::string> header{"statistic"};
      for (const auto& m : r.methods) header.emplace_back(sim_method_name(m.method));
      write_csv_row(out, header);
      std::vector<std::string> mean{"mse_mean"}, bias{"mse_bias"}, se{"mse_bias_se"},
          truth{"true_mse"};
      for (const auto& m : r.methods) {
        mean.push_back(format_double(m.mse_mean));
        bias.push_back(format_double(m.mse_bias));
        se.push_back(format_double(m.mse_bias_se));
        truth.push_back(format_double(r.true_mse));
      }
      for (const auto* row : {&mean, &bias, &se, &truth}) write_csv_row(out, *row);
      break;
    }
    case ExperimentKind::ZScore: {
      const ZScoreSummary& z = *r.zscore;
      write_csv_row(out, {"bin_lower", "bin_upper", "count", "density", "normal_density"});
      const double total = static_cast<double>(z.z_scores.size());
      for (std::size_t b = 0; b < z.bin_counts.size(); ++b) {
        const double width = z.bin_edges[b + 1] - z.bin_edges[b];
        const double density = width > 0.0 ? z.bin_counts[b] / (total * width) : 0.0;
        const double normal = width > 0.0 ? z.normal_mass[b] / width : 0.0;
        write_csv_row(out, {format_double(z.bin_edges[b]), format_double(z.bin_edges[b + 1]),
                            format_double(z.bin_counts[b]), format_double(density),
                            format_double(normal)});
      }
      break;
    }
    case ExperimentKind::Rate: {
      write_csv_row(out, {"t", "empirical_frequency", "bound"});
      for (const auto& row : r.rate->rows) {
        write_csv_row(out, {format_double(row.t), format_double(row.empirical_frequency),
                            format_double(row.bound)});
      }
      break;
    }
  }
}

}  // namespace hadest::cli
