#include <catch2/catch_amalgamated.hpp>

#include "hadest/error.hpp"
#include "hadest/estimators.hpp"
#include "hadest/simulation.hpp"
#include "test_util.hpp"

using namespace hadest;
using Catch::Approx;

namespace {

OlsFit fit_for(const Matrix& x, std::uint64_t seed) {
  return fit_ols(Design(x), testutil::gaussian_vector(x.rows(), seed));
}

/// Unit-norm vector with max x_j^2 < 1/2.
Vector random_unit(Index n, std::uint64_t seed) {
  for (std::uint64_t k = 0;; ++k) {
    Vector x = testutil::gaussian_vector(n, seed * 7919 + k);
    x.normalize();
    if (x.cwiseAbs2().maxCoeff() < 0.45) return x;
  }
}

/// Residual-like vector orthogonal to x.
Vector orthogonal_to(const Vector& x, std::uint64_t seed) {
  Vector e = testutil::gaussian_vector(x.size(), seed);
  return e - x * x.dot(e);
}

Matrix rotation_block_design(Index n) {
  const double c = std::cos(0.7), s = std::sin(0.7);
  Matrix x = Matrix::Zero(n, 2);
  x(0, 0) = c;
  x(0, 1) = -s;
  x(1, 0) = s;
  x(1, 1) = c;
  return x;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(method_name(Method::White) == "White");
  CHECK(method_name(Method::MacKinnonWhite) == "MW");
  CHECK(method_name(Method::Hadamard) == "Hadamard");
}

TEST_CASE("build_hadamard_system at and below the existence threshold") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const OlsFit fit = fit_for(testutil::gaussian_matrix(15, 10, seed), seed);
    CHECK_NOTHROW(build_hadamard_system(fit));
  }
  const OlsFit small = fit_for(testutil::gaussian_matrix(11, 10, 3), 3);
  try {
    build_hadamard_system(small);
    FAIL("expected SingularSystem");
  } catch (const SingularSystem& e) {
    CHECK(std::string(e.what()).find("minimum n = 15") != std::string::npos);
    REQUIRE(e.info().minimal_n);
    CHECK(*e.info().minimal_n == 15);
    CHECK(*e.info().n == 11);
    CHECK(*e.info().p == 10);
  }
  CHECK_THROWS_AS(build_hadamard_system(fit_for(rotation_block_design(4), 1)), SingularSystem);
}

TEST_CASE("p = 1 worked example") {
  const Vector x = Vector::Constant(4, 0.5);
  const Vector e = (Vector(4) << 1, -1, 1, -1).finished();
  const ScalarEstimate closed = hadamard_variance_p1(x, e);
  CHECK(closed.v_hat == Approx(4.0 / 3.0));
  CHECK(closed.dof == 3.0);

  const OlsFit fit = fit_ols(Design(Matrix(x)), e);  // e ⟂ x, so ε̂ = e
  const HadamardSystem sys = build_hadamard_system(fit);
  CHECK(hadamard_variance(fit, sys).v_hat(0) == Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(hadamard_variance_p1(x, Vector::Zero(4)).v_hat == 0.0);
}

TEST_CASE("p = 1 closed forms agree with the general path") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Vector x = random_unit(25, seed);
    const Vector e = orthogonal_to(x, seed + 1);
    const ScalarEstimate closed = hadamard_variance_p1(x, e);
    const OlsFit fit = fit_ols(Design(Matrix(x)), e);
    const HadamardSystem sys = build_hadamard_system(fit);
    const double general = hadamard_variance(fit, sys).v_hat(0);
    CHECK(std::abs(closed.v_hat - general) <= 1e-10 * std::abs(general));

    const Vector w = x.cwiseAbs2();
    CHECK(white_variance(fit).v_hat(0) == Approx(w.dot(e.cwiseAbs2())).epsilon(1e-12));
    const Vector wm = w.array() / (1.0 - w.array());
    CHECK(mw_variance(fit).v_hat(0) == Approx(wm.dot(e.cwiseAbs2())).epsilon(1e-12));
  }
}

TEST_CASE("p = 1 degenerate coordinate") {
  Vector x = Vector::Zero(3);
  x(0) = std::sqrt(0.6);
  x(1) = std::sqrt(0.4);
  CHECK_THROWS_AS(hadamard_variance_p1(x, Vector::Ones(3)), DegenerateCoordinate);
  CHECK_THROWS_AS(hadamard_variance_p1(Vector::Ones(4), Vector::Ones(4)), InvalidInput);
}

TEST_CASE("exact unbiasedness identity on random designs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index n = 20 + static_cast<Index>(seed) * 9;
    const Index p = std::max<Index>(1, static_cast<Index>(0.4 * n) - static_cast<Index>(seed % 5));
    const OlsFit fit = fit_for(testutil::gaussian_matrix(n, p, seed), seed);
    const HadamardSystem sys = build_hadamard_system(fit);
    const Vector sigma = testutil::uniform_vector(n, 0.1, 3.0, seed + 5);
    const Vector expected_sq = sys.t() * sigma;
    const Vector truth = sys.s_squared() * sigma;
    CHECK(testutil::rel_err(hadamard_map(sys, expected_sq), truth) <= 1e-8);
    CHECK(testutil::rel_err(true_variance(fit, NoiseModel::diagonal(sigma)), truth) <= 1e-12);
  }
}

TEST_CASE("estimator maps match explicit matrices on small instances") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Index n = 12;
    const Index p = 2 + static_cast<Index>(seed % 3);
    const Matrix x = testutil::gaussian_matrix(n, p, seed);
    const OlsFit fit = fit_for(x, seed);
    const HadamardSystem sys = build_hadamard_system(fit);
    const Matrix s = testutil::s_oracle(x);
    const Matrix ss = s.cwiseProduct(s);
    const Matrix q = testutil::q_oracle(x);
    const Matrix a = testutil::hadamard_matrix_oracle(x);
    for (Index k = 0; k < n; ++k) {
      const Vector ek = Vector::Unit(n, k);
      CHECK((white_map(fit.projection(), ek) - ss.col(k)).norm() <= 1e-10 * ss.norm());
      CHECK((mw_map(fit.projection(), ek) - ss.col(k) / q(k, k)).norm() <= 1e-10 * ss.norm());
      CHECK((hadamard_map(sys, ek) - a.col(k)).norm() <= 1e-8 * a.norm());
    }
  }
}

TEST_CASE("White and MW expectation identities") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix x = testutil::gaussian_matrix(40, 8, seed);
    const OlsFit fit = fit_for(x, seed);
    const Matrix q = testutil::q_oracle(x);
    const Matrix t = q.cwiseProduct(q);
    const Vector sigma = testutil::uniform_vector(40, 0.2, 4.0, seed);
    const NoiseModel noise = NoiseModel::diagonal(sigma);
    const Vector truth = true_variance(fit, noise);
    CHECK(testutil::rel_err(white_map(fit.projection(), t * sigma),
                            Vector(truth + bias_white(fit, noise))) <= 1e-8);
    CHECK(testutil::rel_err(mw_map(fit.projection(), t * sigma),
                            Vector(truth + bias_mw(fit, noise))) <= 1e-8);

    // MW is unbiased under homoskedasticity.
    const Vector gi = testutil::gram_inverse(x).diagonal();
    CHECK(testutil::rel_err(mw_map(fit.projection(), 2.5 * t * Vector::Ones(40)), 2.5 * gi) <=
          1e-8);
  }
}

TEST_CASE("true variance") {
  const Matrix x = testutil::gaussian_matrix(30, 4, 2);
  const OlsFit fit = fit_for(x, 2);
  CHECK(testutil::rel_err(true_variance(fit, NoiseModel::homoskedastic(1.0)),
                          Vector(testutil::gram_inverse(x).diagonal())) <= 1e-10);
  const Vector sigma = testutil::uniform_vector(30, 0.5, 2.0, 3);
  const Matrix s = testutil::s_oracle(x);
  const Vector triple = (s * sigma.asDiagonal() * s.transpose()).diagonal();
  CHECK(testutil::rel_err(true_variance(fit, NoiseModel::diagonal(sigma)), triple) <= 1e-10);
  CHECK(true_variance(fit, NoiseModel::diagonal(sigma)).minCoeff() > 0.0);

  const Vector u = random_unit(10, 4);
  const OlsFit f1 = fit_ols(Design(Matrix(u)), Vector::Zero(10));
  const Vector sig10 = testutil::uniform_vector(10, 0.5, 2.0, 5);
  CHECK(true_variance(f1, NoiseModel::diagonal(sig10))(0) ==
        Approx(u.cwiseAbs2().dot(sig10)).epsilon(1e-12));
  CHECK_THROWS_AS(true_variance(fit, NoiseModel::diagonal(Vector::Ones(29))), DimensionMismatch);
}

TEST_CASE("bias formulas") {
  const Matrix x = testutil::gaussian_matrix(50, 10, 6);
  const OlsFit fit = fit_for(x, 6);
  const Matrix s = testutil::s_oracle(x);
  const Vector bw = bias_white(fit, NoiseModel::homoskedastic(2.0));
  const Vector closed = -2.0 * s.cwiseProduct(s) * fit.leverages();
  CHECK(testutil::rel_err(bw, closed) <= 1e-10);
  CHECK(bw.maxCoeff() <= 0.0);

  const Vector true_v = true_variance(fit, NoiseModel::homoskedastic(3.0));
  CHECK(bias_mw(fit, NoiseModel::homoskedastic(3.0)).cwiseAbs().maxCoeff() <=
        1e-10 * 3.0 * true_v.maxCoeff());
  CHECK(bias_mw(fit, NoiseModel::diagonal(Vector::Constant(50, 7.0))).cwiseAbs().maxCoeff() <=
        1e-10 * 7.0 * true_v.maxCoeff());

  // Near-zero leverages: Q ≈ I, White bias ≈ 0.
  Matrix tiny = Matrix::Zero(2000, 1);
  tiny.col(0) = testutil::uniform_vector(2000, 0.9, 1.1, 9);
  const OlsFit flat = fit_ols(Design(tiny), Vector::Zero(2000));
  const Vector b = bias_white(flat, NoiseModel::homoskedastic(1.0));
  CHECK(std::abs(b(0)) <= 2e-3 * true_variance(flat, NoiseModel::homoskedastic(1.0))(0));
}

TEST_CASE("leverage one is rejected by MW") {
  Matrix x = Matrix::Zero(5, 2);
  x(0, 0) = 1.0;  // observation 0 has leverage 1
  x.col(1) = testutil::gaussian_vector(5, 3);
  x(0, 1) = 0.0;
  const OlsFit fit = fit_ols(Design(x), testutil::gaussian_vector(5, 4));
  CHECK_THROWS_AS(mw_variance(fit), LeverageOne);
  CHECK_THROWS_AS(bias_mw(fit, NoiseModel::homoskedastic(1.0)), LeverageOne);
}

TEST_CASE("zero residuals give zero variances") {
  const Matrix x = testutil::gaussian_matrix(30, 5, 1);
  const Vector beta = testutil::gaussian_vector(5, 2);
  const OlsFit fit = fit_ols(Design(x), x * beta);
  const HadamardSystem sys = build_hadamard_system(fit);
  CHECK(white_variance(fit).v_hat.cwiseAbs().maxCoeff() <= 1e-20);
  CHECK(mw_variance(fit).v_hat.cwiseAbs().maxCoeff() <= 1e-20);
  CHECK(hadamard_variance(fit, sys).v_hat.cwiseAbs().maxCoeff() <= 1e-20);
}

TEST_CASE("residual scaling multiplies every estimate by c^2") {
  const OlsFit fit = fit_for(testutil::gaussian_matrix(40, 10, 12), 13);
  const HadamardSystem sys = build_hadamard_system(fit);
  const double c = 3.0;
  const OlsFit scaled = fit.with_response(c * fit.y());
  CHECK(testutil::rel_err(white_variance(scaled).v_hat, c * c * white_variance(fit).v_hat) <=
        1e-12);
  CHECK(testutil::rel_err(mw_variance(scaled).v_hat, c * c * mw_variance(fit).v_hat) <= 1e-12);
  CHECK(testutil::rel_err(hadamard_variance(scaled, sys).raw_v_hat,
                          c * c * hadamard_variance(fit, sys).raw_v_hat) <= 1e-12);
}

TEST_CASE("clamping and flags") {
  // Search a few small designs for a negative Hadamard coordinate.
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 200 && !found; ++seed) {
    const OlsFit fit = fit_for(testutil::gaussian_matrix(16, 10, seed), seed + 3);
    const HadamardSystem sys = build_hadamard_system(fit);
    const VarianceEstimate raw = hadamard_variance(fit, sys);
    if (!raw.any_clamped()) continue;
    found = true;
    const VarianceEstimate clamped = hadamard_variance(fit, sys, true);
    for (Index j = 0; j < raw.raw_v_hat.size(); ++j) {
      const bool negative = raw.raw_v_hat(j) < 0.0;
      CHECK(raw.clamped[static_cast<std::size_t>(j)] == negative);
      CHECK(raw.v_hat(j) == raw.raw_v_hat(j));
      CHECK(clamped.v_hat(j) == std::max(raw.raw_v_hat(j), 0.0));
      CHECK(clamped.raw_v_hat(j) == raw.raw_v_hat(j));
    }
  }
  CHECK(found);
}

TEST_CASE("White and MW are nonnegative") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const OlsFit fit = fit_for(testutil::gaussian_matrix(30, 12, seed), seed);
    CHECK(white_variance(fit).v_hat.minCoeff() >= 0.0);
    CHECK(mw_variance(fit).v_hat.minCoeff() >= 0.0);
    CHECK_FALSE(white_variance(fit).any_clamped());
  }
}

TEST_CASE("Monte-Carlo unbiasedness of the Hadamard estimator and White bias") {
  const OlsFit base = fit_ols(Design(testutil::gaussian_matrix(60, 20, 77)), Vector::Zero(60));
  const HadamardSystem sys = build_hadamard_system(base);
  const NoiseModel noise = NoiseModel::ar1_eigen(0.9, 60);
  const Vector truth = true_variance(base, noise);
  const Vector bw = bias_white(base, noise);
  const int reps = 5000;
  Vector sum = Vector::Zero(20), sum_sq = Vector::Zero(20);
  Vector wsum = Vector::Zero(20), wsum_sq = Vector::Zero(20);
  for (int k = 0; k < reps; ++k) {
    RngStream rng = trial_stream(2024, static_cast<std::uint64_t>(k));
    const OlsFit fit = base.with_response(gen_noise(noise, 60, rng));
    const Vector v = hadamard_variance(fit, sys).raw_v_hat;
    sum += v;
    sum_sq += v.cwiseAbs2();
    const Vector w = white_variance(fit).v_hat - truth;
    wsum += w;
    wsum_sq += w.cwiseAbs2();
  }
  for (Index j = 0; j < 20; ++j) {
    const double mean = sum(j) / reps;
    const double se = std::sqrt((sum_sq(j) / reps - mean * mean) / reps);
    CHECK(std::abs(mean - truth(j)) <= 4.0 * se);
    const double wmean = wsum(j) / reps;
    const double wse = std::sqrt((wsum_sq(j) / reps - wmean * wmean) / reps);
    CHECK(std::abs(wmean - bw(j)) <= 4.0 * wse);
  }
}

TEST_CASE("MW bias sign pattern under a single large variance") {
  const OlsFit base = fit_ols(Design(testutil::gaussian_matrix(30, 6, 5)), Vector::Zero(30));
  Vector sigma = Vector::Ones(30);
  sigma(4) = 25.0;
  const NoiseModel noise = NoiseModel::diagonal(sigma);
  const Vector truth = true_variance(base, noise);
  const Vector b = bias_mw(base, noise);
  const int reps = 5000;
  Vector sum = Vector::Zero(6), sum_sq = Vector::Zero(6);
  for (int k = 0; k < reps; ++k) {
    RngStream rng = trial_stream(99, static_cast<std::uint64_t>(k));
    const Vector d = mw_variance(base.with_response(gen_noise(noise, 30, rng))).v_hat - truth;
    sum += d;
    sum_sq += d.cwiseAbs2();
  }
  for (Index j = 0; j < 6; ++j) {
    const double mean = sum(j) / reps;
    const double se = std::sqrt((sum_sq(j) / reps - mean * mean) / reps);
    CHECK(std::abs(mean - b(j)) <= 4.0 * se);
    if (std::abs(b(j)) > 4.0 * se) CHECK((mean > 0) == (b(j) > 0));
  }
}

TEST_CASE("noise models") {
  CHECK(NoiseModel::homoskedastic(2.0).sigma_vec(3) == Vector::Constant(3, 2.0));
  CHECK(NoiseModel::ar1_eigen(0.0, 5).sigma_vec(5) == Vector::Ones(5));
  const Vector ev = ar1_eigenvalues(0.9, 40);
  CHECK(testutil::rel_err(ev, testutil::ar1_eigs_oracle(0.9, 40)) <= 1e-10);
  for (Index i = 1; i < ev.size(); ++i) CHECK(ev(i - 1) >= ev(i));
  CHECK(ev.sum() == Approx(40.0));
  CHECK_THROWS_AS(NoiseModel::ar1_eigen(0.9, 40).sigma_vec(41), DimensionMismatch);
  CHECK_THROWS_AS(NoiseModel::homoskedastic(0.0), InvalidInput);
  CHECK_THROWS_AS(NoiseModel::diagonal((Vector(2) << 1.0, -1.0).finished()), InvalidInput);
  CHECK_THROWS_AS(NoiseModel::ar1_eigen(1.0, 4), InvalidInput);
  CHECK(NoiseModel::homoskedastic(2.0).scaled(3.0).sigma_vec(2) == Vector::Constant(2, 6.0));
}
