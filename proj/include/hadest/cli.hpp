#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hadest/error.hpp"
#include "hadest/linalg.hpp"
#include "hadest/simulation.hpp"

namespace hadest::cli {

/// Malformed input file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInvalidInput = 2,
  kSingular = 3,
  kRankDeficient = 4,
  kRuntimeFailure = 5,
};

// ---- CSV -------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Comma-separated numbers under a mandatory header row. Every row must have
/// as many fields as the header. Throws ParseError.
CsvTable read_csv(std::istream& in, std::string_view source = "<stream>");
CsvTable read_csv_file(const std::string& path);

Matrix table_to_matrix(const CsvTable& t);
/// Single-column table as a vector.
Vector table_to_vector(const CsvTable& t, std::string_view what);

/// 17 significant digits, locale independent.
/// Infinities and NaN are written as inf, -inf, nan.
std::string format_double(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// ---- Subcommands -------------------------------------------------------------

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(std::string_view s);

struct FitOptions {
  std::string x_path;
  std::string y_path;
  std::vector<std::string> methods{"hadamard"};
  double alpha = 0.05;
  bool dof_adjust = false;
  bool clamp = false;
  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;
};

struct SimulateOptions {
  std::string config_path;
  std::string out;  // empty: CSV to stdout, no summary file
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  OutputFormat format = OutputFormat::Csv;
};

struct DiagnoseOptions {
  std::string x_path;
  std::optional<std::string> sigma_path;
  std::string out;
  OutputFormat format = OutputFormat::Json;
};

/// Each returns an ExitCode; messages go to `err`, results to the output file
/// or `out`.
int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err);

/// Writes the experiment table for `result`.
///   type1:  coordinate,type1_<M>...  then rows "mean" and "coverage"
///   mse:    statistic,<M>...         rows mse_mean, mse_bias, mse_bias_se, true_mse
///   zscore: bin_lower,bin_upper,count,density,normal_density
///   rate:   t,empirical_frequency,bound
void write_result_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace hadest::cli
