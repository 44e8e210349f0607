#include "hadest/regression.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "hadest/error.hpp"

namespace hadest {

Design::Design(Matrix x) : x_(std::move(x)) {
  if (x_.cols() < 1) throw InvalidInput("design must have at least one column");
  if (x_.rows() <= x_.cols()) {
    std::ostringstream msg;
    msg << "design must have more rows than columns (n=" << x_.rows() << ", p=" << x_.cols()
        << ")";
    throw InvalidInput(msg.str());
  }
  if (!x_.allFinite()) throw InvalidInput("design contains non-finite entries");
}

std::shared_ptr<const Projection> Projection::build(Design design) {
  std::shared_ptr<Projection> proj(new Projection(std::move(design)));
  const Matrix& x = proj->design_.x();
  const Index n = x.rows();
  const Index p = x.cols();

  proj->singular_values_ = Eigen::BDCSVD<Matrix>(x).singularValues();
  const double smax = proj->singular_values_(0);
  const double smin = proj->singular_values_(p - 1);
  if (!(smax > 0.0) || smin <= 1e-10 * smax) {
    std::ostringstream msg;
    msg << "design is rank deficient: smallest singular value " << smin << " vs largest "
        << smax;
    throw RankDeficientDesign(msg.str());
  }

  proj->qr_.compute(x);
  const Matrix u = proj->qr_.householderQ() * Matrix::Identity(n, p);
  const Matrix r = proj->qr_.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();

  // S = R^{-1} U^T, (X^T X)^{-1} = R^{-1} R^{-T}.
  proj->s_ = r.triangularView<Eigen::Upper>().solve(u.transpose());
  const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  proj->gram_inverse_ = r_inv * r_inv.transpose();
  proj->gram_inverse_ = 0.5 * (proj->gram_inverse_ + proj->gram_inverse_.transpose()).eval();

  Matrix q = -(u * u.transpose());
  q.diagonal().array() += 1.0;
  proj->q_ = 0.5 * (q + q.transpose());

  proj->leverages_ = (Vector::Ones(n) - proj->q_.diagonal()).cwiseMax(0.0).cwiseMin(1.0);
  proj->s_squared_ = proj->s_.cwiseProduct(proj->s_);
  return proj;
}

Vector Projection::coefficients(const Vector& y) const { return qr_.solve(y); }

OlsFit::OlsFit(std::shared_ptr<const Projection> projection, Vector y)
    : projection_(std::move(projection)), y_(std::move(y)) {
  if (y_.size() != projection_->n()) {
    throw DimensionMismatch("response has length " + std::to_string(y_.size()) +
                            ", design has " + std::to_string(projection_->n()) + " rows");
  }
  if (!y_.allFinite()) throw InvalidInput("response contains non-finite entries");
  beta_hat_ = projection_->coefficients(y_);
  residuals_ = y_ - projection_->design().x() * beta_hat_;
}

OlsFit fit_ols(Design design, Vector y) {
  if (y.size() != design.n()) {
    throw DimensionMismatch("response has length " + std::to_string(y.size()) +
                            ", design has " + std::to_string(design.n()) + " rows");
  }
  return OlsFit(Projection::build(std::move(design)), std::move(y));
}

EigenBounds leverage_eigen_bounds(const Vector& h) {
  EigenBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Index i = 0; i < h.size(); ++i) {
    b.upper = std::max(b.upper, 1.0 - h(i));
    b.lower = std::min(b.lower, (1.0 - 2.0 * h(i)) * (1.0 - h(i)));
  }
  return b;
}

EigenBounds leverage_eigen_bounds(const OlsFit& fit) {
  return leverage_eigen_bounds(fit.leverages());
}

}  // namespace hadest
