#include "hadest/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hadest/error.hpp"

namespace hadest {

namespace {

void require_same_shape(Index ar, Index ac, Index br, Index bc) {
  if (ar != br || ac != bc) {
    std::ostringstream msg;
    msg << "hadamard_product: shapes " << ar << "x" << ac << " and " << br << "x" << bc
        << " differ";
    throw DimensionMismatch(msg.str());
  }
}

void require_symmetric(const Matrix& t, const char* who) {
  if (t.rows() != t.cols()) {
    throw NotSymmetric(std::string(who) + ": matrix is not square");
  }
  if (!is_symmetric(t)) {
    throw NotSymmetric(std::string(who) + ": matrix is not symmetric");
  }
}

}  // namespace

Matrix hadamard_product(const Matrix& a, const Matrix& b) {
  require_same_shape(a.rows(), a.cols(), b.rows(), b.cols());
  return a.cwiseProduct(b);
}

Vector hadamard_product(const Vector& a, const Vector& b) {
  require_same_shape(a.size(), 1, b.size(), 1);
  return a.cwiseProduct(b);
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (!a.allFinite()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  return asym <= rel_tol * scale;
}

SpdFactorization spd_factor(const Matrix& t) {
  require_symmetric(t, "spd_factor");

  SpdFactorization f;
  f.dim_ = t.rows();
  f.ldlt_.compute(t);

  const Vector d = f.ldlt_.vectorD();
  const double scale = t.diagonal().maxCoeff();
  const double threshold = kSingularityThreshold * scale;
  const double min_abs = d.cwiseAbs().minCoeff();
  f.min_pivot_ = d.minCoeff();
  f.max_pivot_ = d.maxCoeff();
  f.non_psd_ = f.min_pivot_ < 0.0;

  if (f.ldlt_.info() != Eigen::Success || !(scale > 0.0) || !(min_abs > threshold)) {
    std::ostringstream msg;
    msg << "symmetric system is singular: min |pivot| " << min_abs << " <= threshold "
        << threshold;
    SingularityInfo info;
    info.min_pivot = min_abs;
    info.threshold = threshold;
    throw SingularSystem(msg.str(), info);
  }
  return f;
}

Vector SpdFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != dim_) {
    throw DimensionMismatch("solve: right-hand side has length " +
                            std::to_string(rhs.size()) + ", expected " +
                            std::to_string(dim_));
  }
  return ldlt_.solve(rhs);
}

Matrix SpdFactorization::solve(const Matrix& rhs) const {
  if (rhs.rows() != dim_) {
    throw DimensionMismatch("solve: right-hand side has " + std::to_string(rhs.rows()) +
                            " rows, expected " + std::to_string(dim_));
  }
  return ldlt_.solve(rhs);
}

Vector solve(const SpdFactorization& f, const Vector& rhs) { return f.solve(rhs); }

Vector symmetric_eigenvalues(const Matrix& t) {
  require_symmetric(t, "symmetric_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(t, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double condition_number_from_eigenvalues(const Vector& ascending) {
  const double lo = ascending(0);
  const double hi = ascending(ascending.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double condition_number(const Matrix& t) {
  return condition_number_from_eigenvalues(symmetric_eigenvalues(t));
}

Index numerical_rank(const Matrix& a, double rel_tol) {
  Eigen::BDCSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

}  // namespace hadest
