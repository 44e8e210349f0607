#pragma once

#include <memory>
#include <utility>

#include "hadest/linalg.hpp"

namespace hadest {

/// An n x p design matrix with n > p >= 1 and finite entries. Column rank
/// is checked when the design is fitted.
class Design {
 public:
  explicit Design(Matrix x);

  const Matrix& x() const noexcept { return x_; }
  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }

 private:
  Matrix x_;
};

/// Everything about an OLS fit that depends on the design alone:
///   S = (X^T X)^{-1} X^T          (p x n)
///   Q = I_n - X (X^T X)^{-1} X^T  (n x n, materialized)
///   h_i = 1 - Q_ii                (leverages)
/// Built once per design and shared by every response vector fitted on it.
class Projection {
 public:
  /// Throws RankDeficientDesign when sigma_min(X) <= 1e-10 sigma_max(X).
  static std::shared_ptr<const Projection> build(Design design);

  const Design& design() const noexcept { return design_; }
  Index n() const noexcept { return design_.n(); }
  Index p() const noexcept { return design_.p(); }

  const Matrix& s() const noexcept { return s_; }
  const Matrix& q() const noexcept { return q_; }
  const Matrix& gram_inverse() const noexcept { return gram_inverse_; }
  const Vector& leverages() const noexcept { return leverages_; }
  /// S⊙S, consumed by every coordinate-wise variance estimator.
  const Matrix& s_squared() const noexcept { return s_squared_; }
  /// Singular values of X, descending.
  const Vector& singular_values() const noexcept { return singular_values_; }

  /// Least-squares coefficients via the orthogonal factorization of X.
  Vector coefficients(const Vector& y) const;

 private:
  explicit Projection(Design design) : design_(std::move(design)) {}

  Design design_;
  Eigen::HouseholderQR<Matrix> qr_;
  Matrix s_;
  Matrix q_;
  Matrix gram_inverse_;
  Vector leverages_;
  Matrix s_squared_;
  Vector singular_values_;
};

/// OLS fit of one response vector. Immutable; cheap to copy the geometry.
class OlsFit {
 public:
  OlsFit(std::shared_ptr<const Projection> projection, Vector y);

  /// Refits a new response on the same design in O(np).
  OlsFit with_response(Vector y) const { return OlsFit(projection_, std::move(y)); }

  const Projection& projection() const noexcept { return *projection_; }
  const std::shared_ptr<const Projection>& projection_ptr() const noexcept {
    return projection_;
  }
  const Design& design() const noexcept { return projection_->design(); }
  Index n() const noexcept { return projection_->n(); }
  Index p() const noexcept { return projection_->p(); }

  const Vector& y() const noexcept { return y_; }
  const Vector& beta_hat() const noexcept { return beta_hat_; }
  const Vector& residuals() const noexcept { return residuals_; }
  const Matrix& s() const noexcept { return projection_->s(); }
  const Matrix& q() const noexcept { return projection_->q(); }
  const Matrix& gram_inverse() const noexcept { return projection_->gram_inverse(); }
  const Vector& leverages() const noexcept { return projection_->leverages(); }

 private:
  std::shared_ptr<const Projection> projection_;
  Vector y_;
  Vector beta_hat_;
  Vector residuals_;
};

/// Throws RankDeficientDesign or DimensionMismatch.
OlsFit fit_ols(Design design, Vector y);

struct EigenBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Gershgorin enclosure of the spectrum of Q⊙Q from the leverages:
/// upper = max_i (1 - h_i), lower = min_i (1 - 2h_i)(1 - h_i).
/// The lower bound is vacuous (<= 0) once some h_i >= 1/2.
EigenBounds leverage_eigen_bounds(const OlsFit& fit);
EigenBounds leverage_eigen_bounds(const Vector& leverages);

}  // namespace hadest
