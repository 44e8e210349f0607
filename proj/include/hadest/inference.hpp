#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hadest/estimators.hpp"

namespace hadest {

/// Satterthwaite-style degrees of freedom of the Hadamard estimator.
///
/// The closed form is exact under homoskedastic Gaussian noise and is used
/// as a heuristic otherwise.
struct DofVector {
  Vector d;      // clamped to [1, n]
  Vector raw_d;  // formula output; +inf when the variance term vanishes
  Vector e2;     // diag[(X^T X)^{-1}] ⊙ diag[(X^T X)^{-1}]
};

/// d = 2E / (diag[(S⊙S) 1 1^T (S⊙S)^T] + 2 diag[(S⊙S) T^{-1} (S⊙S)^T] - E),
/// entrywise.
DofVector degrees_of_freedom(const OlsFit& fit, const HadamardSystem& sys);

enum class Reference { Normal, StudentT };

std::string_view reference_name(Reference r);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double variance = 0.0;  // variance actually used for the half-width
  Reference reference = Reference::Normal;
  double dof = 0.0;        // only meaningful for StudentT
  bool fallback = false;   // variance came from the fallback estimate
  bool degenerate = false; // zero width
};

struct ConfidenceIntervals {
  double level = 0.95;
  std::vector<Interval> intervals;
};

/// Upper quantiles of the reference laws.
double normal_quantile(double prob);
double student_t_quantile(double prob, double dof);

/// Two-sided critical value q with P(|R| > q) = alpha. alpha = 1 gives 0.
double critical_value(double alpha, Reference ref, double dof = 0.0);

/// β̂_j ± q sqrt(v_j). Coordinates flagged in `v.clamped` take their variance
/// from `fallback` when one is supplied and are marked `fallback`.
///
/// alpha must lie in (0, 1]; alpha = 1 yields zero-width intervals.
/// Throws MissingDof for StudentT without v.dof and NegativeVariance when a
/// negative variance would be used.
ConfidenceIntervals confidence_intervals(const Vector& beta_hat, const VarianceEstimate& v,
                                         double alpha, Reference mode,
                                         const std::optional<VarianceEstimate>& fallback =
                                             std::nullopt);

/// |Σ_max - Σ_min| / (2 σ_min(X)), an upper bound on ||Cov(β̂, ε̂)||_op.
double dependence_bound(const OlsFit& fit, const NoiseModel& noise);

}  // namespace hadest
