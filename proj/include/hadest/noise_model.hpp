#pragma once

#include <variant>

#include "hadest/linalg.hpp"

namespace hadest {

/// Diagonal noise covariance Sigma of the linear model.
///
/// Three families: a constant variance, an explicit vector of variances,
/// and the spectrum of the AR-1 Toeplitz matrix T_ij = rho^|i-j| sorted in
/// descending order (the heteroskedastic scenario of the simulation study).
class NoiseModel {
 public:
  struct Homoskedastic {
    double sigma2;
  };
  struct Diagonal {
    Vector variances;
  };
  struct Ar1Eigen {
    double rho;
    Index n;
    Vector eigenvalues;  // descending
  };

  static NoiseModel homoskedastic(double sigma2);
  static NoiseModel diagonal(Vector variances);
  static NoiseModel ar1_eigen(double rho, Index n);

  /// Diagonal of Sigma for n observations. Throws DimensionMismatch if the
  /// model has a fixed length different from n.
  Vector sigma_vec(Index n) const;

  /// A copy with every variance multiplied by c > 0.
  NoiseModel scaled(double c) const;

  bool is_homoskedastic() const noexcept {
    return std::holds_alternative<Homoskedastic>(kind_);
  }
  const std::variant<Homoskedastic, Diagonal, Ar1Eigen>& kind() const noexcept {
    return kind_;
  }

 private:
  explicit NoiseModel(std::variant<Homoskedastic, Diagonal, Ar1Eigen> kind)
      : kind_(std::move(kind)) {}

  std::variant<Homoskedastic, Diagonal, Ar1Eigen> kind_;
};

/// Eigenvalues of the n x n matrix rho^|i-j|, descending.
Vector ar1_eigenvalues(double rho, Index n);

/// The p x p matrix rho^|i-j|.
Matrix ar1_covariance(double rho, Index p);

}  // namespace hadest
