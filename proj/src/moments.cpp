#include "hadest/moments.hpp"

#include <cmath>
#include <limits>

#include "hadest/error.hpp"

namespace hadest {

namespace {

Vector solved_squares(const OlsFit& fit, const HadamardSystem& sys) {
  if (sys.n() != fit.n() || sys.p() != fit.p()) {
    throw DimensionMismatch("Hadamard system was built for a different design");
  }
  return sys.solve(fit.residuals().cwiseAbs2());
}

}  // namespace

MomentEstimates estimate_moments(const OlsFit& fit, const HadamardSystem& sys) {
  const Vector z = solved_squares(fit, sys);
  MomentEstimates m;
  m.mse_hat = (sys.s_squared() * z).sum();
  m.signal_sq_hat = fit.beta_hat().squaredNorm() - m.mse_hat;
  m.noise_total_hat = z.sum();
  m.snr_hat = m.noise_total_hat != 0.0 ? m.signal_sq_hat / m.noise_total_hat
                                       : std::numeric_limits<double>::quiet_NaN();
  return m;
}

double signal_sq_estimate(const OlsFit& fit, const HadamardSystem& sys) {
  return estimate_moments(fit, sys).signal_sq_hat;
}

double noise_total_estimate(const OlsFit& fit, const HadamardSystem& sys) {
  return solved_squares(fit, sys).sum();
}

double snr_estimate(const OlsFit& fit, const HadamardSystem& sys) {
  const MomentEstimates m = estimate_moments(fit, sys);
  if (m.noise_total_hat == 0.0 || !std::isfinite(m.noise_total_hat)) {
    throw ZeroDenominator("noise level estimate is zero; SNR is undefined");
  }
  return m.snr_hat;
}

double mse_estimate(const OlsFit& fit, const HadamardSystem& sys) {
  return estimate_moments(fit, sys).mse_hat;
}

}  // namespace hadest
