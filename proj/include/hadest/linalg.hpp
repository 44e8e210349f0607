#pragma once

#include <Eigen/Dense>

namespace hadest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative pivot size below which a symmetric system is declared singular.
/// The reference scale is the largest diagonal entry of the factored matrix.
inline constexpr double kSingularityThreshold = 1e-10;

/// Relative asymmetry tolerated by the symmetric kernels.
inline constexpr double kSymmetryTolerance = 1e-10;

/// Entrywise (Hadamard/Schur) product. Throws DimensionMismatch.
Matrix hadamard_product(const Matrix& a, const Matrix& b);
Vector hadamard_product(const Vector& a, const Vector& b);

/// True when max|A - A^T| <= rel_tol * max(1, max|A|).
bool is_symmetric(const Matrix& a, double rel_tol = kSymmetryTolerance);

/// Pivoted LDL^T factorization of a symmetric matrix.
///
/// Built for T = Q⊙Q, which is positive semidefinite by the Schur product
/// theorem. Rounding near singularity can still produce slightly negative
/// pivots; those factorizations are kept and marked `non_psd()` as long as
/// every pivot clears the singularity threshold in absolute value.
class SpdFactorization {
 public:
  Index dim() const noexcept { return dim_; }
  double min_pivot() const noexcept { return min_pivot_; }
  double max_pivot() const noexcept { return max_pivot_; }
  bool non_psd() const noexcept { return non_psd_; }

  /// Solves T x = rhs. O(dim^2).
  Vector solve(const Vector& rhs) const;
  /// Solves T X = rhs column by column.
  Matrix solve(const Matrix& rhs) const;

 private:
  friend SpdFactorization spd_factor(const Matrix& t);

  Eigen::LDLT<Matrix> ldlt_;
  Index dim_ = 0;
  double min_pivot_ = 0.0;
  double max_pivot_ = 0.0;
  bool non_psd_ = false;
};

/// Factors a symmetric matrix. Throws NotSymmetric, or SingularSystem when
/// min |pivot| <= kSingularityThreshold * max diag(t).
SpdFactorization spd_factor(const Matrix& t);

Vector solve(const SpdFactorization& f, const Vector& rhs);

/// All eigenvalues of a symmetric matrix, ascending. Throws NotSymmetric.
Vector symmetric_eigenvalues(const Matrix& t);

/// lambda_max / lambda_min of a symmetric matrix, +infinity when
/// lambda_min <= 0. Throws NotSymmetric.
double condition_number(const Matrix& t);

/// Same ratio computed from an ascending eigenvalue vector.
double condition_number_from_eigenvalues(const Vector& ascending);

/// Number of singular values above rel_tol times the largest one.
Index numerical_rank(const Matrix& a, double rel_tol = 1e-8);

}  // namespace hadest
