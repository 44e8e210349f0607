#pragma once

#include "hadest/estimators.hpp"

namespace hadest {

/// Scalar summaries built from the raw (unclamped) Hadamard estimator. The
/// signal, noise and MSE estimates are unbiased; the SNR is their ratio.
/// Unbiased estimates can be negative.
struct MomentEstimates {
  double snr_hat = 0.0;
  double signal_sq_hat = 0.0;
  double noise_total_hat = 0.0;
  double mse_hat = 0.0;
};

/// ||β̂||^2 - sum_j V̂_j.
double signal_sq_estimate(const OlsFit& fit, const HadamardSystem& sys);

/// 1_n^T (Q⊙Q)^{-1} (ε̂⊙ε̂), unbiased for tr(Σ).
double noise_total_estimate(const OlsFit& fit, const HadamardSystem& sys);

/// signal_sq_estimate / noise_total_estimate. Throws ZeroDenominator.
double snr_estimate(const OlsFit& fit, const HadamardSystem& sys);

/// sum_{j=1}^p V̂_j, unbiased for E||β̂ - β||^2.
double mse_estimate(const OlsFit& fit, const HadamardSystem& sys);

/// All four at once, sharing the single solve. snr_hat is NaN when the
/// noise estimate is exactly zero.
MomentEstimates estimate_moments(const OlsFit& fit, const HadamardSystem& sys);

}  // namespace hadest
