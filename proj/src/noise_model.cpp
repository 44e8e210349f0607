#include "hadest/noise_model.hpp"

#include <cmath>

#include "hadest/error.hpp"

namespace hadest {

Matrix ar1_covariance(double rho, Index p) {
  Matrix t(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      t(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return t;
}

Vector ar1_eigenvalues(double rho, Index n) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("AR-1 parameter must lie in [0, 1)");
  if (n < 1) throw InvalidInput("AR-1 dimension must be positive");
  if (rho == 0.0) return Vector::Ones(n);
  Vector ev = symmetric_eigenvalues(ar1_covariance(rho, n));
  return ev.reverse();
}

NoiseModel NoiseModel::homoskedastic(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidInput("noise variance must be positive and finite");
  }
  return NoiseModel(Homoskedastic{sigma2});
}

NoiseModel NoiseModel::diagonal(Vector variances) {
  if (variances.size() == 0) throw InvalidInput("noise variance vector is empty");
  if (!variances.allFinite() || !(variances.minCoeff() > 0.0)) {
    throw InvalidInput("noise variances must be positive and finite");
  }
  return NoiseModel(Diagonal{std::move(variances)});
}

NoiseModel NoiseModel::ar1_eigen(double rho, Index n) {
  Vector ev = ar1_eigenvalues(rho, n);
  // Rounding can push the tiniest eigenvalue of a nearly singular Toeplitz
  // matrix to zero or below; variances must stay strictly positive.
  if (!(ev.minCoeff() > 0.0)) {
    throw InvalidInput("AR-1 spectrum is numerically singular for this rho and n");
  }
  return NoiseModel(Ar1Eigen{rho, n, std::move(ev)});
}

Vector NoiseModel::sigma_vec(Index n) const {
  return std::visit(
      [n](const auto& k) -> Vector {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Homoskedastic>) {
          return Vector::Constant(n, k.sigma2);
        } else if constexpr (std::is_same_v<K, Diagonal>) {
          if (k.variances.size() != n) {
            throw DimensionMismatch("noise model has " + std::to_string(k.variances.size()) +
                                    " variances, expected " + std::to_string(n));
          }
          return k.variances;
        } else {
          if (k.n != n) {
            throw DimensionMismatch("AR-1 noise model has length " + std::to_string(k.n) +
                                    ", expected " + std::to_string(n));
          }
          return k.eigenvalues;
        }
      },
      kind_);
}

NoiseModel NoiseModel::scaled(double c) const {
  if (!(c > 0.0)) throw InvalidInput("noise scale must be positive");
  return std::visit(
      [c](const auto& k) -> NoiseModel {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Homoskedastic>) {
          return NoiseModel(Homoskedastic{c * k.sigma2});
        } else if constexpr (std::is_same_v<K, Diagonal>) {
          return NoiseModel(Diagonal{c * k.variances});
        } else {
          return NoiseModel(Diagonal{c * k.eigenvalues});
        }
      },
      kind_);
}

}  // namespace hadest
