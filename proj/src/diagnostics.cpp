#include "hadest/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include "hadest/error.hpp"
#include "hadest/inference.hpp"

namespace hadest {

Index existence_threshold(Index p) {
  if (p < 1) throw InvalidInput("existence_threshold: p must be at least 1");
  // Start just below the closed form and walk to the exact integer answer.
  const double approx = static_cast<double>(p) + 0.5 + std::sqrt(2.0 * p + 0.25);
  Index n = std::max<Index>(p + 1, static_cast<Index>(std::floor(approx)) - 2);
  auto admissible = [p](Index m) {
    const Index r = m - p;
    return m <= r * (r + 1) / 2;
  };
  while (n > p + 1 && admissible(n - 1)) --n;
  while (!admissible(n)) ++n;
  return n;
}

Index rank_upper_bound(Index r) {
  if (r < 0) throw InvalidInput("rank_upper_bound: rank must be nonnegative");
  return r * (r + 1) / 2;
}

EigenBounds asymptotic_eigen_bounds(double gamma) {
  if (!(gamma >= 0.0 && gamma < 0.5)) {
    throw InapplicableRegime("eigenvalue bounds need aspect ratio gamma < 1/2");
  }
  return EigenBounds{(1.0 - gamma) * (1.0 - 2.0 * gamma), 1.0 - gamma};
}

double rate_bound(double gamma, double t, double c) {
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw InapplicableRegime("rate bound needs aspect ratio 0 < gamma < 1/2");
  }
  if (!(t > 0.0)) throw InvalidInput("rate bound needs t > 0");
  if (!(c > 1.0)) throw InvalidInput("rate bound needs c > 1");
  const double root = 1.0 - std::sqrt(gamma);
  return (2.0 * c / (t * t)) / (root * root * (1.0 - 2.0 * gamma));
}

double tv_constant() { return 4.0 * std::sqrt(5.0) * std::pow(3.0, 0.25); }

TvBound normality_tv_bound(const OlsFit& fit, const HadamardSystem& sys,
                           const NoiseModel& noise, Index coordinate) {
  if (sys.n() != fit.n() || sys.p() != fit.p()) {
    throw DimensionMismatch("Hadamard system was built for a different design");
  }
  if (coordinate < 0 || coordinate >= fit.p()) {
    throw InvalidInput("coordinate " + std::to_string(coordinate) + " is out of range");
  }
  const Vector sigma = noise.sigma_vec(fit.n());
  const Matrix& q = fit.q();

  // Row i of A = (S⊙S) T^{-1} is T^{-1} applied to row i of S⊙S (T symmetric).
  const Vector a = sys.solve(Vector(sys.s_squared().row(coordinate).transpose()));
  Matrix m = q * a.asDiagonal() * q;
  m = 0.5 * (m + m.transpose()).eval();

  const Vector root = sigma.cwiseSqrt();
  Matrix w = root.asDiagonal() * m * root.asDiagonal();
  w = 0.5 * (w + w.transpose()).eval();

  const double c = tv_constant();
  const Vector lw = symmetric_eigenvalues(w);
  const double lw_max = lw(lw.size() - 1);
  const double lw_absmax = lw.cwiseAbs().maxCoeff();

  // ||M||_F^2 = A_i^T (Q⊙Q) A_i; the direct norm is used for accuracy.
  const Vector lm = symmetric_eigenvalues(m);
  const double kappa = sigma.maxCoeff() / sigma.minCoeff();

  TvBound b;
  b.exact = c * lw_max / w.norm();
  b.exact_abs = c * lw_absmax / w.norm();
  b.simplified = c * kappa * lm(lm.size() - 1) / m.norm();
  return b;
}

DiagnosticsReport full_report(const OlsFit& fit, const HadamardSystem* sys,
                              const NoiseModel* noise) {
  DiagnosticsReport r;
  r.n = fit.n();
  r.p = fit.p();
  r.gamma = static_cast<double>(r.p) / static_cast<double>(r.n);
  r.threshold_n = existence_threshold(r.p);
  r.meets_threshold = r.n >= r.threshold_n;
  r.rank_upper_bound = rank_upper_bound(r.n - r.p);
  r.leverage_bounds = leverage_eigen_bounds(fit);
  if (r.gamma < 0.5) r.asymptotic_bounds = asymptotic_eigen_bounds(r.gamma);

  std::ostringstream why;
  if (sys != nullptr) {
    r.system_invertible = true;
    r.exists_generically = r.meets_threshold;
    r.condition_number = sys->condition_estimate();
    r.min_eigenvalue = sys->min_eigen_estimate();
    r.max_eigenvalue = sys->max_eigen_estimate();
    r.dof = degrees_of_freedom(fit, *sys).d;
    why << "Q⊙Q is invertible with condition number " << sys->condition_estimate() << ".";
  } else if (!r.meets_threshold) {
    why << "n=" << r.n << " is below the minimum n = " << r.threshold_n << " for p=" << r.p
        << ": Q⊙Q has rank at most " << r.rank_upper_bound << " < n for every design.";
  } else {
    r.exists_generically = true;
    why << "n meets the minimum n = " << r.threshold_n
        << "; Q⊙Q was not factored, so invertibility for this design is unchecked.";
  }
  r.explanation = why.str();

  if (noise != nullptr) {
    r.dependence_bound = dependence_bound(fit, *noise);
    if (sys != nullptr) {
      Vector exact(r.p), exact_abs(r.p), simplified(r.p);
      for (Index i = 0; i < r.p; ++i) {
        const TvBound b = normality_tv_bound(fit, *sys, *noise, i);
        exact(i) = b.exact;
        exact_abs(i) = b.exact_abs;
        simplified(i) = b.simplified;
      }
      r.per_coordinate_tv_bounds = std::move(exact);
      r.per_coordinate_tv_bounds_abs = std::move(exact_abs);
      r.per_coordinate_tv_simplified = std::move(simplified);
    }
  }
  return r;
}

DiagnosticsReport diagnose(const OlsFit& fit, const NoiseModel* noise) {
  try {
    const HadamardSystem sys = build_hadamard_system(fit);
    return full_report(fit, &sys, noise);
  } catch (const SingularSystem& e) {
    DiagnosticsReport r = full_report(fit, nullptr, noise);
    r.exists_generically = false;
    if (r.meets_threshold) {
      std::ostringstream why;
      why << "n meets the minimum n = " << r.threshold_n << " for p=" << r.p
          << ", but Q⊙Q is singular for this design (min |pivot| " << e.info().min_pivot
          << "). The sample-size condition is necessary, not sufficient: designs such as "
             "X = [R; 0] give a diagonal Q for every n.";
      r.explanation = why.str();
    }
    return r;
  }
}

}  // namespace hadest
