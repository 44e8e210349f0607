#pragma once

#include <optional>
#include <string>

#include "hadest/estimators.hpp"
#include "hadest/regression.hpp"

namespace hadest {

/// Smallest n > p with n <= (n-p)(n-p+1)/2: below it Q⊙Q has rank < n for
/// every design, since rank(A⊙A) <= r(r+1)/2 for a rank-r symmetric A.
/// Equals ceil(p + 1/2 + sqrt(2p + 1/4)). Throws InvalidInput for p < 1.
Index existence_threshold(Index p);

/// r(r+1)/2.
Index rank_upper_bound(Index r);

/// Limits of the extreme eigenvalues of Q⊙Q for aspect ratio gamma < 1/2:
/// ((1-gamma)(1-2gamma), 1-gamma). Throws InapplicableRegime otherwise.
EigenBounds asymptotic_eigen_bounds(double gamma);

/// (2c/t^2) / ((1 - sqrt(gamma))^2 (1 - 2 gamma)), the bound on
/// P(||V̂ - V|| / ||σ_vec|| >= t/n) for Gaussian noise.
/// Throws InapplicableRegime unless 0 < gamma < 1/2; InvalidInput unless
/// t > 0 and c > 1.
double rate_bound(double gamma, double t, double c = 1.01);

/// 4 * sqrt(5) * 3^(1/4).
double tv_constant();

struct TvBound {
  /// C * lambda_max(W_i) / ||W_i||_F, lambda_max the largest signed eigenvalue.
  double exact = 0.0;
  /// Same with the largest absolute eigenvalue (W_i can be indefinite).
  double exact_abs = 0.0;
  /// C * kappa(Σ) * lambda_max(M_i) / ||M_i||_F with M_i = Q diag(A_i) Q and
  /// ||M_i||_F^2 = A_i^T (Q⊙Q) A_i. Depends on Σ only through kappa(Σ).
  double simplified = 0.0;
};

/// Total variation bound between V̂_i and a normal law with matched moments,
/// for Gaussian noise. W_i = Σ^{1/2} Q diag(A_i) Q Σ^{1/2}, A_i the i-th row
/// of (S⊙S) T^{-1}. Costs two n x n symmetric eigenvalue problems.
TvBound normality_tv_bound(const OlsFit& fit, const HadamardSystem& sys,
                           const NoiseModel& noise, Index coordinate);

struct DiagnosticsReport {
  Index n = 0;
  Index p = 0;
  double gamma = 0.0;
  Index threshold_n = 0;
  bool meets_threshold = false;
  bool exists_generically = false;
  bool system_invertible = false;
  std::string explanation;
  Index rank_upper_bound = 0;

  // Available when Q⊙Q factors.
  std::optional<double> condition_number;
  std::optional<double> min_eigenvalue;
  std::optional<double> max_eigenvalue;
  std::optional<Vector> dof;

  EigenBounds leverage_bounds;
  std::optional<EigenBounds> asymptotic_bounds;  // empty when gamma >= 1/2

  // Available when a noise model is supplied (TV bounds also need Q⊙Q).
  std::optional<double> dependence_bound;
  std::optional<Vector> per_coordinate_tv_bounds;
  std::optional<Vector> per_coordinate_tv_bounds_abs;
  std::optional<Vector> per_coordinate_tv_simplified;
};

/// Aggregates the checks above. `sys` and `noise` may be null; sections that
/// need them are left empty.
DiagnosticsReport full_report(const OlsFit& fit, const HadamardSystem* sys,
                              const NoiseModel* noise);

/// Builds the Hadamard system when possible and reports on it.
DiagnosticsReport diagnose(const OlsFit& fit, const NoiseModel* noise = nullptr);

}  // namespace hadest
