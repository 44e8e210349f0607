#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "hadest/cli.hpp"
#include "hadest/cli_json.hpp"
#include "hadest/diagnostics.hpp"
#include "hadest/estimators.hpp"
#include "hadest/inference.hpp"

namespace hadest::cli {

using nlohmann::json;

namespace {

/// Maps library errors to exit codes. `singular_code` differs between the
/// data commands and the simulation driver.
int guarded(std::ostream& err, int singular_code, const std::function<int()>& body) {
  try {
    return body();
  } catch (const SingularSystem& e) {
    err << "error: " << e.what() << '\n';
    return singular_code;
  } catch (const RankDeficientDesign& e) {
    err << "error: " << e.what() << '\n';
    return kRankDeficient;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Method parse_method(const std::string& s) {
  const std::string m = lower(s);
  if (m == "white" || m == "hc0") return Method::White;
  if (m == "mw" || m == "hc2" || m == "mackinnon-white") return Method::MacKinnonWhite;
  if (m == "hadamard") return Method::Hadamard;
  throw ParseError("unknown method '" + s + "' (white, mw, hadamard)");
}

std::string column_suffix(Method m) { return lower(std::string(method_name(m))); }

/// Writes through `body` to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  body(f);
  if (!f) throw Error("write to " + path + " failed");
}

struct FitColumns {
  OlsFit fit;
  VarianceEstimate white, mw, hadamard;
  DofVector dof;
};

}  // namespace

OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ParseError("unknown format '" + std::string(s) + "' (csv, json)");
}

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, kSingular, [&] {
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
    if (opt.methods.empty()) throw InvalidInput("at least one --method is required");
    std::vector<Method> methods;
    for (const auto& s : opt.methods) {
      const Method m = parse_method(s);
      if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
        throw InvalidInput("method given twice: " + s);
      }
      methods.push_back(m);
    }

    const Matrix x = table_to_matrix(read_csv_file(opt.x_path));
    const Vector y = table_to_vector(read_csv_file(opt.y_path), "y");
    if (y.size() != x.rows()) {
      throw DimensionMismatch("y has " + std::to_string(y.size()) + " rows, X has " +
                              std::to_string(x.rows()));
    }
    const OlsFit fit = fit_ols(Design(x), y);
    const HadamardSystem sys = build_hadamard_system(fit);
    VarianceEstimate hadamard = hadamard_variance(fit, sys, opt.clamp);
    const DofVector dof = degrees_of_freedom(fit, sys);
    hadamard.dof = dof.d;
    const VarianceEstimate white = white_variance(fit);
    const VarianceEstimate mw = mw_variance(fit);

    std::vector<ConfidenceIntervals> cis;
    for (Method m : methods) {
      switch (m) {
        case Method::White:
          cis.push_back(confidence_intervals(fit.beta_hat(), white, opt.alpha, Reference::Normal));
          break;
        case Method::MacKinnonWhite:
          cis.push_back(confidence_intervals(fit.beta_hat(), mw, opt.alpha, Reference::Normal));
          break;
        case Method::Hadamard:
          cis.push_back(confidence_intervals(
              fit.beta_hat(), hadamard, opt.alpha,
              opt.dof_adjust ? Reference::StudentT : Reference::Normal, mw));
          break;
      }
    }

    const Index p = fit.p();
    emit(opt.out, out, [&](std::ostream& os) {
      if (opt.format == OutputFormat::Csv) {
        std::vector<std::string> header{"coordinate",     "beta_hat",  "v_white",
                                        "v_mw",           "v_hadamard_raw", "v_hadamard",
                                        "clamped_flag",   "dof",       "ci_lower",
                                        "ci_upper",       "reference_dist", "fallback_flag"};
        for (std::size_t k = 1; k < methods.size(); ++k) {
          header.push_back("ci_lower_" + column_suffix(methods[k]));
          header.push_back("ci_upper_" + column_suffix(methods[k]));
        }
        write_csv_row(os, header);
        for (Index j = 0; j < p; ++j) {
          const auto uj = static_cast<std::size_t>(j);
          const Interval& iv = cis.front().intervals[uj];
          std::vector<std::string> row{std::to_string(j),
                                       format_double(fit.beta_hat()(j)),
                                       format_double(white.v_hat(j)),
                                       format_double(mw.v_hat(j)),
                                       format_double(hadamard.raw_v_hat(j)),
                                       format_double(hadamard.v_hat(j)),
                                       hadamard.clamped[uj] ? "1" : "0",
                                       format_double(dof.d(j)),
                                       format_double(iv.lower),
                                       format_double(iv.upper),
                                       std::string(reference_name(iv.reference)),
                                       iv.fallback ? "1" : "0"};
          for (std::size_t k = 1; k < cis.size(); ++k) {
            row.push_back(format_double(cis[k].intervals[uj].lower));
            row.push_back(format_double(cis[k].intervals[uj].upper));
          }
          write_csv_row(os, row);
        }
      } else {
        json coords = json::array();
        for (Index j = 0; j < p; ++j) {
          const auto uj = static_cast<std::size_t>(j);
          json intervals = json::object();
          for (std::size_t k = 0; k < cis.size(); ++k) {
            const Interval& iv = cis[k].intervals[uj];
            intervals[column_suffix(methods[k])] =
                json{{"lower", iv.lower},
                     {"upper", iv.upper},
                     {"reference_dist", std::string(reference_name(iv.reference))},
                     {"fallback", iv.fallback}};
          }
          coords.push_back(json{{"coordinate", j},
                                {"beta_hat", fit.beta_hat()(j)},
                                {"v_white", white.v_hat(j)},
                                {"v_mw", mw.v_hat(j)},
                                {"v_hadamard_raw", hadamard.raw_v_hat(j)},
                                {"v_hadamard", hadamard.v_hat(j)},
                                {"clamped", static_cast<bool>(hadamard.clamped[uj])},
                                {"dof", dof.d(j)},
                                {"intervals", intervals}});
        }
        os << json{{"n", fit.n()}, {"p", p}, {"alpha", opt.alpha}, {"coefficients", coords}}
                  .dump(2)
           << '\n';
      }
    });
    return static_cast<int>(kOk);
  });
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  const int parsed = guarded(err, kInvalidInput, [&] {
    cfg = parse_config_file(opt.config_path);
    if (opt.seed) cfg.master_seed = *opt.seed;
    cfg.threads = opt.threads;
    try {
      cfg.validate();
    } catch (const InsufficientReps& e) {
      throw InvalidInput(e.what());
    } catch (const InapplicableRegime& e) {
      throw InvalidInput(e.what());
    }
    return static_cast<int>(kOk);
  });
  if (parsed != kOk) return parsed;

  return guarded(err, kRuntimeFailure, [&] {
    ExperimentResult result;
    try {
      result = run_experiment(cfg);
    } catch (const std::exception& e) {
      err << "error: simulation failed (master_seed=" << cfg.master_seed << "): " << e.what()
          << '\n';
      return static_cast<int>(kRuntimeFailure);
    }
    if (opt.format == OutputFormat::Json) {
      emit(opt.out, out,
           [&](std::ostream& os) { os << result_to_json(result, cfg).dump(2) << '\n'; });
      return static_cast<int>(kOk);
    }
    emit(opt.out, out, [&](std::ostream& os) { write_result_csv(os, result); });
    if (!opt.out.empty()) {
      const std::string summary =
          std::filesystem::path(opt.out).replace_extension(".summary.json").string();
      emit(summary, out,
           [&](std::ostream& os) { os << result_to_json(result, cfg).dump(2) << '\n'; });
    }
    return static_cast<int>(kOk);
  });
}

int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, kSingular, [&] {
    if (opt.format != OutputFormat::Json) throw InvalidInput("diagnose writes JSON only");
    const Matrix x = table_to_matrix(read_csv_file(opt.x_path));
    std::optional<NoiseModel> noise;
    if (opt.sigma_path) {
      const Vector sigma = table_to_vector(read_csv_file(*opt.sigma_path), "sigma");
      if (sigma.size() != x.rows()) {
        throw DimensionMismatch("sigma has " + std::to_string(sigma.size()) + " rows, X has " +
                                std::to_string(x.rows()));
      }
      noise = NoiseModel::diagonal(sigma);
    }
    const Index n = x.rows();
    const OlsFit fit = fit_ols(Design(x), Vector::Zero(n));
    const DiagnosticsReport report = diagnose(fit, noise ? &*noise : nullptr);
    emit(opt.out, out, [&](std::ostream& os) { os << report_to_json(report).dump(2) << '\n'; });
    return static_cast<int>(kOk);
  });
}

}  // namespace hadest::cli
