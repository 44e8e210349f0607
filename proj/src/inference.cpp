#include "hadest/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "hadest/error.hpp"

namespace hadest {

std::string_view reference_name(Reference r) {
  return r == Reference::Normal ? "Normal" : "StudentT";
}

DofVector degrees_of_freedom(const OlsFit& fit, const HadamardSystem& sys) {
  if (sys.n() != fit.n() || sys.p() != fit.p()) {
    throw DimensionMismatch("Hadamard system was built for a different design");
  }
  const Matrix& ss = sys.s_squared();
  const Index p = ss.rows();
  const double n = static_cast<double>(fit.n());

  const Vector row_sums = ss.rowwise().sum();
  const Matrix t_inv_sst = sys.factorization().solve(Matrix(ss.transpose()));

  DofVector out;
  out.e2 = fit.gram_inverse().diagonal().cwiseAbs2();
  out.raw_d.resize(p);
  out.d.resize(p);
  for (Index j = 0; j < p; ++j) {
    const double quad = ss.row(j).dot(t_inv_sst.col(j));
    const double denom = row_sums(j) * row_sums(j) + 2.0 * quad - out.e2(j);
    // The denominator is Var(V̂_j)/σ^4 >= 0; a nonpositive value means the
    // estimator has no variance to speak of.
    const double raw = denom > 0.0 ? 2.0 * out.e2(j) / denom
                                   : std::numeric_limits<double>::infinity();
    out.raw_d(j) = raw;
    out.d(j) = std::isnan(raw) ? n : std::clamp(raw, 1.0, n);
  }
  return out;
}

double normal_quantile(double prob) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double student_t_quantile(double prob, double dof) {
  if (!(dof > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  if (std::isinf(dof)) return normal_quantile(prob);
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), prob);
}

double critical_value(double alpha, Reference ref, double dof) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  if (alpha == 1.0) return 0.0;
  const double prob = 1.0 - alpha / 2.0;
  return ref == Reference::Normal ? normal_quantile(prob) : student_t_quantile(prob, dof);
}

ConfidenceIntervals confidence_intervals(const Vector& beta_hat, const VarianceEstimate& v,
                                         double alpha, Reference mode,
                                         const std::optional<VarianceEstimate>& fallback) {
  const Index p = beta_hat.size();
  if (v.v_hat.size() != p) throw DimensionMismatch("variance vector does not match beta_hat");
  if (fallback && fallback->v_hat.size() != p) {
    throw DimensionMismatch("fallback variance vector does not match beta_hat");
  }
  if (mode == Reference::StudentT && (!v.dof || v.dof->size() != p)) {
    throw MissingDof("Student-t intervals need a degrees-of-freedom vector");
  }

  ConfidenceIntervals out;
  out.level = 1.0 - alpha;
  out.intervals.resize(static_cast<std::size_t>(p));
  const double q_normal = critical_value(alpha, Reference::Normal);

  for (Index j = 0; j < p; ++j) {
    Interval& iv = out.intervals[static_cast<std::size_t>(j)];
    iv.reference = mode;
    double var = v.v_hat(j);
    const bool flagged =
        static_cast<std::size_t>(j) < v.clamped.size() && v.clamped[static_cast<std::size_t>(j)];
    if (flagged && fallback) {
      var = fallback->v_hat(j);
      iv.fallback = true;
    }
    if (var < 0.0) {
      throw NegativeVariance("coordinate " + std::to_string(j) +
                             " has a negative variance estimate and no fallback");
    }
    double q = q_normal;
    if (mode == Reference::StudentT) {
      iv.dof = (*v.dof)(j);
      q = critical_value(alpha, Reference::StudentT, iv.dof);
    }
    const double half = q * std::sqrt(var);
    iv.variance = var;
    iv.lower = beta_hat(j) - half;
    iv.upper = beta_hat(j) + half;
    iv.degenerate = !(half > 0.0);
  }
  return out;
}

double dependence_bound(const OlsFit& fit, const NoiseModel& noise) {
  const Vector sigma = noise.sigma_vec(fit.n());
  const Vector& sv = fit.projection().singular_values();
  const double smin = sv(sv.size() - 1);
  return std::abs(sigma.maxCoeff() - sigma.minCoeff()) / (2.0 * smin);
}

}  // namespace hadest
