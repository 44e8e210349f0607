#include "hadest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hadest/diagnostics.hpp"
#include "hadest/error.hpp"

namespace hadest {

namespace {

constexpr double kLeverageOneTolerance = 1e-10;

void require_no_unit_leverage(const Projection& proj) {
  const Vector qd = proj.q().diagonal();
  for (Index i = 0; i < qd.size(); ++i) {
    if (!(qd(i) > kLeverageOneTolerance)) {
      throw LeverageOne("observation " + std::to_string(i) +
                        " has leverage 1; the MacKinnon-White correction is undefined");
    }
  }
}

void require_length(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionMismatch(std::string(what) + " has length " + std::to_string(v.size()) +
                            ", expected " + std::to_string(n));
  }
}

VarianceEstimate nonnegative_estimate(Method m, Vector v) {
  VarianceEstimate out;
  out.method = m;
  out.raw_v_hat = v;
  out.v_hat = std::move(v);
  out.clamped.assign(static_cast<std::size_t>(out.v_hat.size()), false);
  return out;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::White:
      return "White";
    case Method::MacKinnonWhite:
      return "MW";
    case Method::Hadamard:
      return "Hadamard";
  }
  return "?";
}

bool VarianceEstimate::any_clamped() const {
  return std::any_of(clamped.begin(), clamped.end(), [](bool b) { return b; });
}

Vector HadamardSystem::apply(const Vector& squared_residuals) const {
  return s_squared_ * factorization_.solve(squared_residuals);
}

HadamardSystem build_hadamard_system(const OlsFit& fit) {
  const Projection& proj = fit.projection();
  HadamardSystem sys;
  sys.t_ = proj.q().cwiseProduct(proj.q());
  sys.s_squared_ = proj.s_squared();
  try {
    sys.factorization_ = spd_factor(sys.t_);
  } catch (const SingularSystem& e) {
    SingularityInfo info = e.info();
    info.n = static_cast<long>(proj.n());
    info.p = static_cast<long>(proj.p());
    info.minimal_n = static_cast<long>(existence_threshold(proj.p()));
    std::ostringstream msg;
    msg << "Q⊙Q is singular for this design (n=" << proj.n() << ", p=" << proj.p()
        << "); the Hadamard estimator does not exist. ";
    if (proj.n() < *info.minimal_n) {
      msg << "For p=" << proj.p() << " the minimum n = " << *info.minimal_n << ".";
    } else {
      msg << "n meets the minimum n = " << *info.minimal_n
          << " for p=" << proj.p() << ", so this design is degenerate.";
    }
    throw SingularSystem(msg.str(), info);
  }
  const Vector ev = symmetric_eigenvalues(sys.t_);
  sys.min_eigen_ = ev(0);
  sys.max_eigen_ = ev(ev.size() - 1);
  sys.condition_ = condition_number_from_eigenvalues(ev);
  return sys;
}

Vector white_map(const Projection& proj, const Vector& squared_residuals) {
  require_length(squared_residuals, proj.n(), "squared residual vector");
  return proj.s_squared() * squared_residuals;
}

Vector mw_map(const Projection& proj, const Vector& squared_residuals) {
  require_length(squared_residuals, proj.n(), "squared residual vector");
  require_no_unit_leverage(proj);
  return proj.s_squared() * squared_residuals.cwiseQuotient(proj.q().diagonal());
}

Vector hadamard_map(const HadamardSystem& sys, const Vector& squared_residuals) {
  require_length(squared_residuals, sys.n(), "squared residual vector");
  return sys.apply(squared_residuals);
}

VarianceEstimate hadamard_variance(const OlsFit& fit, const HadamardSystem& sys, bool clamp) {
  if (sys.n() != fit.n() || sys.p() != fit.p()) {
    throw DimensionMismatch("Hadamard system was built for a different design");
  }
  VarianceEstimate out;
  out.method = Method::Hadamard;
  out.raw_v_hat = sys.apply(fit.residuals().cwiseAbs2());
  out.v_hat = out.raw_v_hat;
  out.clamped.resize(static_cast<std::size_t>(fit.p()));
  for (Index j = 0; j < fit.p(); ++j) {
    const bool negative = out.raw_v_hat(j) < 0.0;
    out.clamped[static_cast<std::size_t>(j)] = negative;
    if (clamp && negative) out.v_hat(j) = 0.0;
  }
  return out;
}

VarianceEstimate white_variance(const OlsFit& fit) {
  return nonnegative_estimate(Method::White,
                              white_map(fit.projection(), fit.residuals().cwiseAbs2()));
}

VarianceEstimate mw_variance(const OlsFit& fit) {
  return nonnegative_estimate(Method::MacKinnonWhite,
                              mw_map(fit.projection(), fit.residuals().cwiseAbs2()));
}

ScalarEstimate hadamard_variance_p1(const Vector& x, const Vector& residuals) {
  require_length(residuals, x.size(), "residual vector");
  if (x.size() < 2) throw InvalidInput("need at least two observations");
  if (std::abs(x.norm() - 1.0) > 1e-8) {
    throw InvalidInput("covariate vector must have unit norm");
  }
  double weighted = 0.0;
  double quartic = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    const double x2 = x(j) * x(j);
    const double denom = 1.0 - 2.0 * x2;
    if (!(denom > 0.0)) {
      throw DegenerateCoordinate("coordinate " + std::to_string(j) +
                                 " has x_j^2 >= 1/2; the closed form is undefined");
    }
    weighted += x2 / denom * residuals(j) * residuals(j);
    quartic += x2 * x2 / denom;
  }
  return ScalarEstimate{weighted / (1.0 + quartic), 1.0 + 1.0 / quartic};
}

Vector true_variance(const OlsFit& fit, const NoiseModel& noise) {
  return fit.projection().s_squared() * noise.sigma_vec(fit.n());
}

Vector bias_white(const OlsFit& fit, const NoiseModel& noise) {
  const Vector sigma = noise.sigma_vec(fit.n());
  const Matrix& q = fit.q();
  const Vector expected_sq = q.cwiseProduct(q) * sigma;
  return fit.projection().s_squared() * (expected_sq - sigma);
}

Vector bias_mw(const OlsFit& fit, const NoiseModel& noise) {
  require_no_unit_leverage(fit.projection());
  const Vector sigma = noise.sigma_vec(fit.n());
  const Matrix& q = fit.q();
  const Vector expected_sq = q.cwiseProduct(q) * sigma;
  return fit.projection().s_squared() *
         (expected_sq.cwiseQuotient(q.diagonal()) - sigma);
}

}  // namespace hadest
