#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "hadest/diagnostics.hpp"
#include "hadest/estimators.hpp"
#include "hadest/noise_model.hpp"

namespace hadest {

/// Deterministic normal stream. Each trial owns one; streams are derived
/// injectively from (master seed, trial index).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double normal() { return normal_(engine_); }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix_seed(std::uint64_t x);

/// Stream for trial k. Distinct k give distinct seeds for a fixed master seed.
RngStream trial_stream(std::uint64_t master_seed, std::uint64_t trial);
/// Stream for the fixed design, disjoint from every trial stream.
RngStream design_stream(std::uint64_t master_seed);

enum class ExperimentKind { TypeOne, Mse, ZScore, Rate };
enum class SimMethod { White, MW, Hadamard, HadamardT };

std::string_view kind_name(ExperimentKind k);
std::string_view sim_method_name(SimMethod m);

struct DesignSpec {
  enum class Kind { IidGaussian, Correlated };
  enum class Covariance { Identity, Ar1, Explicit };

  Kind kind = Kind::IidGaussian;
  Covariance covariance = Covariance::Identity;
  double rho_x = 0.0;  // Ar1
  Matrix gamma;        // Explicit, p x p
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::TypeOne;
  Index n = 100;
  Index p = 10;
  double rho = 0.0;  // noise spectrum: eigenvalues of rho^|i-j|
  DesignSpec design;
  std::optional<Vector> beta;  // empty means zero
  Index n_reps = 1000;
  std::uint64_t master_seed = 0;
  double alpha = 0.05;
  std::vector<SimMethod> methods{SimMethod::White, SimMethod::MW, SimMethod::Hadamard,
                                 SimMethod::HadamardT};
  bool fix_design = true;
  Index coordinate = 0;                 // ZScore
  std::vector<double> t_grid{5, 10, 20};  // Rate
  double rate_c = 1.01;                 // Rate
  /// Worker threads; 0 means hardware concurrency. HADAMARD_THREADS caps it.
  unsigned threads = 0;

  /// Throws InvalidInput on inconsistent fields, InsufficientReps for a
  /// z-score run with fewer than two trials and InapplicableRegime for a rate
  /// run with p/n >= 1/2.
  void validate() const;
  Vector beta_vector() const;
  NoiseModel noise() const;
};

struct MethodStats {
  SimMethod method = SimMethod::White;
  double mean_type1 = 0.0;
  Vector per_coordinate_type1;
  double coverage = 0.0;  // 1 - mean_type1
  double mse_mean = 0.0;
  double mse_bias = 0.0;
  double mse_bias_se = 0.0;
  /// Trials in which some Hadamard coordinate was negative and the interval
  /// fell back to the MacKinnon-White variance.
  Index fallback_trials = 0;
};

struct ZScoreSummary {
  Index coordinate = 0;
  Vector raw_values;  // V̂_i per trial
  Vector z_scores;    // standardized by the Monte-Carlo mean and sd
  double mc_mean = 0.0;
  double mc_sd = 0.0;
  double true_variance = 0.0;
  double ks_statistic = 0.0;
  double empirical_tv = 0.0;
  std::vector<double> bin_edges;   // 61 edges
  std::vector<double> bin_counts;  // 60 counts
  std::vector<double> normal_mass; // 60 masses
  TvBound tv_bound;
};

struct RateRow {
  double t = 0.0;
  double empirical_frequency = 0.0;
  double bound = 0.0;
};

struct RateSummary {
  std::vector<RateRow> rows;
  Vector statistics;  // n ||V̂ - V|| / ||σ_vec|| per trial
  double median_statistic = 0.0;
};

struct SeedRecord {
  std::uint64_t master_seed = 0;
  std::uint64_t design_seed = 0;
  Index n_reps = 0;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::TypeOne;
  std::vector<MethodStats> methods;
  double true_mse = 0.0;
  std::optional<ZScoreSummary> zscore;
  std::optional<RateSummary> rate;
  SeedRecord seeds;
  unsigned threads_used = 1;
  double runtime_seconds = 0.0;

  const MethodStats& stats(SimMethod m) const;
};

/// n x p design: iid standard normal rows, multiplied by the symmetric square
/// root of Γ in correlated mode. Throws InvalidInput if Γ is not positive
/// definite.
Design gen_design(const ExperimentConfig& config, RngStream& rng);

/// ε = Σ^{1/2} Z.
Vector gen_noise(const NoiseModel& noise, Index n, RngStream& rng);

/// Rejection rates of level-alpha intervals for the true β (β = 0 gives the
/// type I error) and Monte-Carlo MSE bias, for every configured method.
ExperimentResult run_type1_experiment(const ExperimentConfig& config);
ExperimentResult run_mse_experiment(const ExperimentConfig& config);

/// z-scores of one Hadamard coordinate plus normality checks. Throws
/// InsufficientReps for fewer than two trials.
ExperimentResult run_zscore_experiment(const ExperimentConfig& config);

/// Empirical exceedance of n||V̂ - V||/||σ_vec|| >= t against rate_bound.
/// Throws InapplicableRegime unless p/n < 1/2.
ExperimentResult run_rate_experiment(const ExperimentConfig& config);

/// Dispatches on config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Kolmogorov-Smirnov distance between a sample and N(0,1).
double ks_statistic_normal(Vector sample);

/// Half the L1 distance between a 60-bin histogram of the sample over its
/// range and the N(0,1) mass of the same bins (tail mass included).
double empirical_tv_normal(const Vector& sample, std::vector<double>* edges = nullptr,
                           std::vector<double>* counts = nullptr,
                           std::vector<double>* mass = nullptr);

/// `requested` (hardware concurrency when 0), capped by HADAMARD_THREADS.
unsigned resolve_threads(unsigned requested);

}  // namespace hadest
