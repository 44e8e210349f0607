#include "hadest/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "hadest/error.hpp"
#include "hadest/inference.hpp"

namespace hadest {

namespace {

constexpr int kHistogramBins = 60;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Runs fn(k) for k in [0, count) on `threads` workers with a static stride.
/// The exception of the lowest failing k is rethrown, so failures do not
/// depend on scheduling.
template <class Fn>
void parallel_for(Index count, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<Index>(std::max<Index>(count, 1), threads));
  if (workers <= 1) {
    for (Index k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<Index> failed_at(workers, std::numeric_limits<Index>::max());
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Index k = w; k < count; k += workers) {
        try {
          fn(k);
        } catch (...) {
          failed_at[w] = k;
          errors[w] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  const auto first = std::min_element(failed_at.begin(), failed_at.end());
  if (*first != std::numeric_limits<Index>::max()) {
    std::rethrow_exception(errors[static_cast<std::size_t>(first - failed_at.begin())]);
  }
}

/// State shared by all trials on one design.
struct DesignContext {
  std::optional<OlsFit> base;
  std::optional<HadamardSystem> sys;
  std::optional<DofVector> dof;
  Vector true_var;
  double true_mse = 0.0;
};

bool needs_system(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::ZScore || cfg.kind == ExperimentKind::Rate) return true;
  return std::any_of(cfg.methods.begin(), cfg.methods.end(), [](SimMethod m) {
    return m == SimMethod::Hadamard || m == SimMethod::HadamardT;
  });
}

bool needs_dof(const ExperimentConfig& cfg) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), SimMethod::HadamardT) !=
         cfg.methods.end();
}

DesignContext make_context(const ExperimentConfig& cfg, const NoiseModel& noise,
                           RngStream& rng, std::optional<long> trial) {
  DesignContext ctx;
  ctx.base.emplace(fit_ols(gen_design(cfg, rng), Vector::Zero(cfg.n)));
  if (needs_system(cfg)) {
    try {
      ctx.sys.emplace(build_hadamard_system(*ctx.base));
    } catch (const SingularSystem& e) {
      SingularityInfo info = e.info();
      info.master_seed = cfg.master_seed;
      info.trial = trial;
      std::string what = e.what();
      what += " [master_seed=" + std::to_string(cfg.master_seed) +
              ", stream_seed=" + std::to_string(rng.seed()) +
              (trial ? ", trial=" + std::to_string(*trial) : std::string(", fixed design")) +
              "]";
      throw SingularSystem(what, info);
    }
    if (needs_dof(cfg)) ctx.dof.emplace(degrees_of_freedom(*ctx.base, *ctx.sys));
  }
  ctx.true_var = true_variance(*ctx.base, noise);
  ctx.true_mse = ctx.true_var.sum();
  return ctx;
}

Vector response(const DesignContext& ctx, const Vector& beta, const Vector& eps) {
  return ctx.base->design().x() * beta + eps;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct PreparedRun {
  NoiseModel noise;
  Vector beta;
  std::optional<DesignContext> fixed;
  SeedRecord seeds;
  unsigned threads;
};

PreparedRun prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedRun run{cfg.noise(), cfg.beta_vector(), std::nullopt, {}, resolve_threads(cfg.threads)};
  run.seeds.master_seed = cfg.master_seed;
  run.seeds.n_reps = cfg.n_reps;
  if (cfg.fix_design) {
    RngStream rng = design_stream(cfg.master_seed);
    run.seeds.design_seed = rng.seed();
    run.fixed.emplace(make_context(cfg, run.noise, rng, std::nullopt));
  }
  return run;
}

/// Returns the context for trial k, drawing a fresh design when the design is
/// not fixed. The trial stream is advanced past the design draw.
const DesignContext& context_for(const ExperimentConfig& cfg, const PreparedRun& run,
                                 RngStream& rng, Index k,
                                 std::optional<DesignContext>& local) {
  if (run.fixed) return *run.fixed;
  local.emplace(make_context(cfg, run.noise, rng, static_cast<long>(k)));
  return *local;
}

ExperimentResult run_inference_trials(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedRun run = prepare(cfg);
  const Index reps = cfg.n_reps;
  const Index p = cfg.p;
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t stride = n_methods * static_cast<std::size_t>(p);

  std::vector<unsigned char> rejected(static_cast<std::size_t>(reps) * stride, 0);
  std::vector<double> mse_values(static_cast<std::size_t>(reps) * n_methods, 0.0);
  std::vector<unsigned char> fell_back(static_cast<std::size_t>(reps) * n_methods, 0);
  std::vector<double> trial_true_mse(static_cast<std::size_t>(reps), 0.0);

  parallel_for(reps, run.threads, [&](Index k) {
    RngStream rng = trial_stream(cfg.master_seed, static_cast<std::uint64_t>(k));
    std::optional<DesignContext> local;
    const DesignContext& ctx = context_for(cfg, run, rng, k, local);
    const Vector eps = gen_noise(run.noise, cfg.n, rng);
    const OlsFit fit = ctx.base->with_response(response(ctx, run.beta, eps));
    trial_true_mse[static_cast<std::size_t>(k)] = ctx.true_mse;

    std::optional<VarianceEstimate> mw;
    auto mw_estimate = [&]() -> const VarianceEstimate& {
      if (!mw) mw.emplace(mw_variance(fit));
      return *mw;
    };

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      const SimMethod m = cfg.methods[mi];
      VarianceEstimate v;
      Reference ref = Reference::Normal;
      switch (m) {
        case SimMethod::White:
          v = white_variance(fit);
          break;
        case SimMethod::MW:
          v = mw_estimate();
          break;
        case SimMethod::Hadamard:
          v = hadamard_variance(fit, *ctx.sys);
          break;
        case SimMethod::HadamardT:
          v = hadamard_variance(fit, *ctx.sys);
          v.dof = ctx.dof->d;
          ref = Reference::StudentT;
          break;
      }
      std::optional<VarianceEstimate> fallback;
      if (v.any_clamped()) {
        fallback = mw_estimate();
        fell_back[static_cast<std::size_t>(k) * n_methods + mi] = 1;
      }
      const ConfidenceIntervals ci =
          confidence_intervals(fit.beta_hat(), v, cfg.alpha, ref, fallback);
      unsigned char* row = &rejected[static_cast<std::size_t>(k) * stride + mi * p];
      for (Index j = 0; j < p; ++j) {
        const Interval& iv = ci.intervals[static_cast<std::size_t>(j)];
        row[j] = (run.beta(j) < iv.lower || run.beta(j) > iv.upper) ? 1 : 0;
      }
      mse_values[static_cast<std::size_t>(k) * n_methods + mi] = v.raw_v_hat.sum();
    }
  });

  ExperimentResult res;
  res.kind = cfg.kind;
  res.seeds = run.seeds;
  res.threads_used = run.threads;
  double true_mse_sum = 0.0;
  for (double t : trial_true_mse) true_mse_sum += t;
  res.true_mse = true_mse_sum / static_cast<double>(reps);

  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    MethodStats st;
    st.method = cfg.methods[mi];
    st.per_coordinate_type1 = Vector::Zero(p);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (Index k = 0; k < reps; ++k) {
      const std::size_t base = static_cast<std::size_t>(k) * stride + mi * p;
      for (Index j = 0; j < p; ++j) st.per_coordinate_type1(j) += rejected[base + j];
      const std::size_t at = static_cast<std::size_t>(k) * n_methods + mi;
      const double err = mse_values[at] - trial_true_mse[static_cast<std::size_t>(k)];
      sum += err;
      sum_sq += err * err;
      st.fallback_trials += fell_back[at];
    }
    const double r = static_cast<double>(reps);
    st.per_coordinate_type1 /= r;
    st.mean_type1 = st.per_coordinate_type1.mean();
    st.coverage = 1.0 - st.mean_type1;
    st.mse_bias = sum / r;
    st.mse_mean = st.mse_bias + res.true_mse;
    const double var = reps > 1 ? (sum_sq - r * st.mse_bias * st.mse_bias) / (r - 1.0) : 0.0;
    st.mse_bias_se = std::sqrt(std::max(var, 0.0) / r);
    res.methods.push_back(std::move(st));
  }
  res.runtime_seconds = elapsed_since(start);
  return res;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Trial streams use even offsets from the mixed master seed, the design
// stream the single odd offset 1.
RngStream trial_stream(std::uint64_t master_seed, std::uint64_t trial) {
  return RngStream(mix_seed(mix_seed(master_seed) + 2 * trial));
}

RngStream design_stream(std::uint64_t master_seed) {
  return RngStream(mix_seed(mix_seed(master_seed) + 1));
}

std::string_view kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::TypeOne:
      return "type1";
    case ExperimentKind::Mse:
      return "mse";
    case ExperimentKind::ZScore:
      return "zscore";
    case ExperimentKind::Rate:
      return "rate";
  }
  return "?";
}

std::string_view sim_method_name(SimMethod m) {
  switch (m) {
    case SimMethod::White:
      return "White";
    case SimMethod::MW:
      return "MW";
    case SimMethod::Hadamard:
      return "Hadamard";
    case SimMethod::HadamardT:
      return "HadamardT";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (p < 1) throw InvalidInput("p must be at least 1");
  if (n <= p) throw InvalidInput("n must exceed p");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in [0, 1)");
  if (n_reps < 1) throw InvalidInput("n_reps must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  if (methods.empty() && (kind == ExperimentKind::TypeOne || kind == ExperimentKind::Mse)) {
    throw InvalidInput("at least one method is required");
  }
  if (beta && beta->size() != p) throw InvalidInput("beta must have p entries");
  if (design.kind == DesignSpec::Kind::Correlated) {
    if (design.covariance == DesignSpec::Covariance::Ar1 &&
        !(design.rho_x > -1.0 && design.rho_x < 1.0)) {
      throw InvalidInput("design AR-1 parameter must lie in (-1, 1)");
    }
    if (design.covariance == DesignSpec::Covariance::Explicit) {
      if (design.gamma.rows() != p || design.gamma.cols() != p) {
        throw InvalidInput("design covariance must be p x p");
      }
      if (!design.gamma.allFinite() || !is_symmetric(design.gamma)) {
        throw InvalidInput("design covariance is not symmetric");
      }
      const Vector ev = symmetric_eigenvalues(design.gamma);
      if (!(ev(0) > 1e-12 * std::max(1.0, ev(p - 1)))) {
        throw InvalidInput("design covariance is not positive definite");
      }
    }
  }
  if (kind == ExperimentKind::ZScore) {
    if (coordinate < 0 || coordinate >= p) throw InvalidInput("coordinate out of range");
    if (!fix_design) throw InvalidInput("z-score experiments need a fixed design");
    if (n_reps < 2) {
      throw InsufficientReps("z-scores need at least two trials to estimate a standard deviation");
    }
  }
  if (kind == ExperimentKind::Rate) {
    if (!(2 * p < n)) throw InapplicableRegime("rate experiment needs p/n < 1/2");
    if (t_grid.empty()) throw InvalidInput("t_grid must not be empty");
    for (double t : t_grid) {
      if (!(t > 0.0)) throw InvalidInput("t_grid entries must be positive");
    }
    if (!(rate_c > 1.0)) throw InvalidInput("rate_c must exceed 1");
  }
}

Vector ExperimentConfig::beta_vector() const { return beta ? *beta : Vector::Zero(p); }

NoiseModel ExperimentConfig::noise() const { return NoiseModel::ar1_eigen(rho, n); }

const MethodStats& ExperimentResult::stats(SimMethod m) const {
  for (const auto& s : methods) {
    if (s.method == m) return s;
  }
  throw InvalidInput("method " + std::string(sim_method_name(m)) + " was not run");
}

Design gen_design(const ExperimentConfig& config, RngStream& rng) {
  const Index n = config.n;
  const Index p = config.p;
  Matrix z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  const DesignSpec& spec = config.design;
  if (spec.kind == DesignSpec::Kind::IidGaussian ||
      spec.covariance == DesignSpec::Covariance::Identity) {
    return Design(std::move(z));
  }
  const Matrix gamma =
      spec.covariance == DesignSpec::Covariance::Ar1 ? ar1_covariance(spec.rho_x, p) : spec.gamma;
  if (!is_symmetric(gamma)) throw InvalidInput("design covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma);
  const Vector& ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * std::max(1.0, ev(p - 1)))) {
    throw InvalidInput("design covariance is not positive definite");
  }
  const Matrix root =
      eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  // Rows x_i = Γ^{1/2} z_i, i.e. X = Z Γ^{1/2}.
  return Design(z * root);
}

Vector gen_noise(const NoiseModel& noise, Index n, RngStream& rng) {
  const Vector sigma = noise.sigma_vec(n);
  Vector eps(n);
  for (Index i = 0; i < n; ++i) eps(i) = std::sqrt(sigma(i)) * rng.normal();
  return eps;
}

ExperimentResult run_type1_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.kind = ExperimentKind::TypeOne;
  return run_inference_trials(cfg);
}

ExperimentResult run_mse_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.kind = ExperimentKind::Mse;
  return run_inference_trials(cfg);
}

ExperimentResult run_zscore_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.kind = ExperimentKind::ZScore;
  const auto start = std::chrono::steady_clock::now();
  const PreparedRun run = prepare(cfg);
  const DesignContext& ctx = *run.fixed;
  const Index i = cfg.coordinate;

  Vector values(cfg.n_reps);
  parallel_for(cfg.n_reps, run.threads, [&](Index k) {
    RngStream rng = trial_stream(cfg.master_seed, static_cast<std::uint64_t>(k));
    const Vector eps = gen_noise(run.noise, cfg.n, rng);
    const OlsFit fit = ctx.base->with_response(response(ctx, run.beta, eps));
    values(k) = ctx.sys->apply(fit.residuals().cwiseAbs2())(i);
  });

  ZScoreSummary z;
  z.coordinate = i;
  z.raw_values = values;
  z.mc_mean = values.mean();
  const double r = static_cast<double>(cfg.n_reps);
  z.mc_sd = std::sqrt((values.array() - z.mc_mean).square().sum() / (r - 1.0));
  if (!(z.mc_sd > 0.0)) throw InsufficientReps("z-scores are undefined for a constant sample");
  z.z_scores = (values.array() - z.mc_mean) / z.mc_sd;
  z.true_variance = ctx.true_var(i);
  z.ks_statistic = ks_statistic_normal(z.z_scores);
  z.empirical_tv = empirical_tv_normal(z.z_scores, &z.bin_edges, &z.bin_counts, &z.normal_mass);
  z.tv_bound = normality_tv_bound(*ctx.base, *ctx.sys, run.noise, i);

  ExperimentResult res;
  res.kind = ExperimentKind::ZScore;
  res.seeds = run.seeds;
  res.threads_used = run.threads;
  res.true_mse = ctx.true_mse;
  res.zscore = std::move(z);
  res.runtime_seconds = elapsed_since(start);
  return res;
}

ExperimentResult run_rate_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.kind = ExperimentKind::Rate;
  const double gamma = static_cast<double>(cfg.p) / static_cast<double>(cfg.n);
  const auto start = std::chrono::steady_clock::now();
  const PreparedRun run = prepare(cfg);
  const Vector sigma = run.noise.sigma_vec(cfg.n);
  const double sigma_norm = sigma.norm();
  const double n = static_cast<double>(cfg.n);

  Vector stats(cfg.n_reps);
  std::vector<double> true_mse(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(cfg.n_reps, run.threads, [&](Index k) {
    RngStream rng = trial_stream(cfg.master_seed, static_cast<std::uint64_t>(k));
    std::optional<DesignContext> local;
    const DesignContext& ctx = context_for(cfg, run, rng, k, local);
    const Vector eps = gen_noise(run.noise, cfg.n, rng);
    const OlsFit fit = ctx.base->with_response(response(ctx, run.beta, eps));
    const Vector v_hat = ctx.sys->apply(fit.residuals().cwiseAbs2());
    stats(k) = n * (v_hat - ctx.true_var).norm() / sigma_norm;
    true_mse[static_cast<std::size_t>(k)] = ctx.true_mse;
  });

  RateSummary rs;
  rs.statistics = stats;
  for (double t : cfg.t_grid) {
    const Index hits = (stats.array() >= t).count();
    rs.rows.push_back(RateRow{t, static_cast<double>(hits) / static_cast<double>(cfg.n_reps),
                              rate_bound(gamma, t, cfg.rate_c)});
  }
  std::vector<double> sorted(stats.data(), stats.data() + stats.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  rs.median_statistic = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

  ExperimentResult res;
  res.kind = ExperimentKind::Rate;
  res.seeds = run.seeds;
  res.threads_used = run.threads;
  double sum = 0.0;
  for (double t : true_mse) sum += t;
  res.true_mse = sum / static_cast<double>(cfg.n_reps);
  res.rate = std::move(rs);
  res.runtime_seconds = elapsed_since(start);
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::TypeOne:
      return run_type1_experiment(config);
    case ExperimentKind::Mse:
      return run_mse_experiment(config);
    case ExperimentKind::ZScore:
      return run_zscore_experiment(config);
    case ExperimentKind::Rate:
      return run_rate_experiment(config);
  }
  throw InvalidInput("unknown experiment kind");
}

double ks_statistic_normal(Vector sample) {
  std::sort(sample.data(), sample.data() + sample.size());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (Index i = 0; i < sample.size(); ++i) {
    const double f = std_normal_cdf(sample(i));
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

double empirical_tv_normal(const Vector& sample, std::vector<double>* edges,
                           std::vector<double>* counts, std::vector<double>* mass) {
  const double lo = sample.minCoeff();
  const double hi = sample.maxCoeff();
  const double width = (hi - lo) / kHistogramBins;
  std::vector<double> e(kHistogramBins + 1);
  for (int b = 0; b <= kHistogramBins; ++b) e[b] = lo + width * b;
  e[kHistogramBins] = hi;

  std::vector<double> c(kHistogramBins, 0.0);
  for (Index i = 0; i < sample.size(); ++i) {
    int b = width > 0.0 ? static_cast<int>((sample(i) - lo) / width) : 0;
    c[static_cast<std::size_t>(std::clamp(b, 0, kHistogramBins - 1))] += 1.0;
  }
  std::vector<double> nm(kHistogramBins);
  const double total = static_cast<double>(sample.size());
  double l1 = std_normal_cdf(e.front()) + (1.0 - std_normal_cdf(e.back()));
  for (int b = 0; b < kHistogramBins; ++b) {
    nm[b] = std_normal_cdf(e[b + 1]) - std_normal_cdf(e[b]);
    l1 += std::abs(c[b] / total - nm[b]);
  }
  if (edges) *edges = std::move(e);
  if (counts) *counts = std::move(c);
  if (mass) *mass = std::move(nm);
  return 0.5 * l1;
}

unsigned resolve_threads(unsigned requested) {
  unsigned threads = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HADAMARD_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      threads = std::min<unsigned long>(threads, cap);
    }
  }
  return threads;
}

}  // namespace hadest
