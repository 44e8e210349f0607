#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hadest/linalg.hpp"
#include "hadest/noise_model.hpp"
#include "hadest/regression.hpp"

namespace hadest {

enum class Method { White, MacKinnonWhite, Hadamard };

std::string_view method_name(Method m);

/// Coordinate-wise variance estimates of the OLS coefficients.
struct VarianceEstimate {
  Method method = Method::Hadamard;
  Vector v_hat;      // reported values (clamped at zero in clamp mode)
  Vector raw_v_hat;  // linear estimator output
  /// Coordinates whose raw estimate is negative. Only the Hadamard
  /// estimator can set these.
  std::vector<bool> clamped;
  std::optional<Vector> dof;

  bool any_clamped() const;
};

/// T = Q⊙Q, its factorization and S⊙S for one design.
///
/// The estimator matrix A = (S⊙S) T^{-1} is never formed: each call costs
/// one O(n^2) solve against the stored factorization.
class HadamardSystem {
 public:
  const Matrix& t() const noexcept { return t_; }
  const SpdFactorization& factorization() const noexcept { return factorization_; }
  const Matrix& s_squared() const noexcept { return s_squared_; }
  double min_eigen_estimate() const noexcept { return min_eigen_; }
  double max_eigen_estimate() const noexcept { return max_eigen_; }
  double condition_estimate() const noexcept { return condition_; }
  Index n() const noexcept { return t_.rows(); }
  Index p() const noexcept { return s_squared_.rows(); }

  /// T^{-1} u.
  Vector solve(const Vector& u) const { return factorization_.solve(u); }
  /// A u = (S⊙S) T^{-1} u, the estimator map applied to a vector of
  /// squared residuals.
  Vector apply(const Vector& squared_residuals) const;

 private:
  friend HadamardSystem build_hadamard_system(const OlsFit& fit);

  Matrix t_;
  SpdFactorization factorization_;
  Matrix s_squared_;
  double min_eigen_ = 0.0;
  double max_eigen_ = 0.0;
  double condition_ = 0.0;
};

/// Throws SingularSystem when Q⊙Q is not invertible; the error carries n, p
/// and the minimal admissible sample size for p.
HadamardSystem build_hadamard_system(const OlsFit& fit);

/// V̂ = (S⊙S)(Q⊙Q)^{-1}(ε̂⊙ε̂). In clamp mode negative coordinates are
/// replaced by zero; `clamped` flags them either way.
VarianceEstimate hadamard_variance(const OlsFit& fit, const HadamardSystem& sys,
                                   bool clamp = false);

/// HC0: (S⊙S)(ε̂⊙ε̂).
VarianceEstimate white_variance(const OlsFit& fit);

/// HC2: (S⊙S) diag(Q)^{-1} (ε̂⊙ε̂). Throws LeverageOne if some Q_ii <= 1e-10.
VarianceEstimate mw_variance(const OlsFit& fit);

/// Estimator maps applied to an arbitrary nonnegative n-vector in place of
/// ε̂⊙ε̂. All three estimators are linear in that vector.
Vector white_map(const Projection& proj, const Vector& squared_residuals);
Vector mw_map(const Projection& proj, const Vector& squared_residuals);
Vector hadamard_map(const HadamardSystem& sys, const Vector& squared_residuals);

struct ScalarEstimate {
  double v_hat = 0.0;
  double dof = 0.0;
};

/// Closed forms for one covariate with ||x|| = 1:
///   V̂ = sum_j w_j ε̂_j^2 / (1 + sum_j x_j^4/(1-2x_j^2)),  w_j = x_j^2/(1-2x_j^2)
///   d = 1 + 1 / sum_j x_j^4/(1-2x_j^2)
/// Throws DegenerateCoordinate when some x_j^2 >= 1/2.
ScalarEstimate hadamard_variance_p1(const Vector& x, const Vector& residuals);

/// V = diag Cov(β̂) = (S⊙S) σ_vec.
Vector true_variance(const OlsFit& fit, const NoiseModel& noise);

/// b_W = (S⊙S)[(Q⊙Q) - I] σ_vec.
Vector bias_white(const OlsFit& fit, const NoiseModel& noise);

/// b_MW = (S⊙S)[diag(Q)^{-1}(Q⊙Q) - I] σ_vec. Throws LeverageOne.
Vector bias_mw(const OlsFit& fit, const NoiseModel& noise);

}  // namespace hadest
