#include <algorithm>
#include <numeric>

#include <catch2/catch_amalgamated.hpp>

#include "hadest/error.hpp"
#include "hadest/regression.hpp"
#include "test_util.hpp"

using namespace hadest;
using Catch::Approx;

namespace {

OlsFit random_fit(Index n, Index p, std::uint64_t seed) {
  return fit_ols(Design(testutil::gaussian_matrix(n, p, seed)),
                 testutil::gaussian_vector(n, seed + 1000));
}

}  // namespace

TEST_CASE("constant fit") {
  const OlsFit fit = fit_ols(Design(Matrix::Ones(4, 1)), Vector::Constant(4, 2.0));
  CHECK(fit.beta_hat()(0) == Approx(2.0));
  CHECK(fit.residuals().norm() <= 1e-14);
}

TEST_CASE("unit-norm single covariate") {
  const OlsFit fit = fit_ols(Design(Matrix::Constant(4, 1, 0.5)),
                             (Vector(4) << 1, 0, 1, 0).finished());
  CHECK(fit.beta_hat()(0) == Approx(1.0));
  const Vector expected = (Vector(4) << 0.5, -0.5, 0.5, -0.5).finished();
  CHECK((fit.residuals() - expected).norm() <= 1e-14);
  CHECK(fit.gram_inverse()(0, 0) == Approx(1.0));
  CHECK(fit.leverages().sum() == Approx(1.0));
}

TEST_CASE("coefficients match the normal equations") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix x = testutil::gaussian_matrix(30, 5, seed);
    const Vector y = testutil::gaussian_vector(30, seed + 50);
    const OlsFit fit = fit_ols(Design(x), y);
    const Vector oracle = Matrix(x.transpose() * x).fullPivLu().solve(x.transpose() * y);
    CHECK(testutil::rel_err(fit.beta_hat(), oracle) <= 1e-8);
  }
}

TEST_CASE("projection invariants") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index n = 20 + static_cast<Index>(seed) * 7;
    const Index p = 3 + static_cast<Index>(seed);
    const Matrix x = testutil::gaussian_matrix(n, p, seed);
    const Vector y = testutil::gaussian_vector(n, seed + 99);
    const OlsFit fit = fit_ols(Design(x), y);
    const Matrix& q = fit.q();
    CHECK((q * x).norm() <= 1e-8 * x.norm());
    CHECK((q * q - q).norm() <= 1e-8);
    CHECK((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fit.s() * x - Matrix::Identity(p, p)).norm() <= 1e-8);
    CHECK((fit.residuals() - q * y).norm() <= 1e-10 * std::max(1.0, y.norm()));
    CHECK(fit.leverages().minCoeff() >= 0.0);
    CHECK(fit.leverages().maxCoeff() <= 1.0);
    CHECK(std::abs(fit.leverages().sum() - static_cast<double>(p)) <= 1e-6);
    CHECK((fit.s() - testutil::s_oracle(x)).norm() <= 1e-8 * fit.s().norm());
    CHECK((fit.gram_inverse() - testutil::gram_inverse(x)).norm() <=
          1e-8 * fit.gram_inverse().norm());
  }
}

TEST_CASE("design validation") {
  CHECK_THROWS_AS(Design(Matrix::Ones(3, 3)), InvalidInput);
  CHECK_THROWS_AS(Design(Matrix(4, 0)), InvalidInput);
  Matrix bad = Matrix::Ones(4, 1);
  bad(2, 0) = std::nan("");
  CHECK_THROWS_AS(Design(bad), InvalidInput);

  Matrix collinear = testutil::gaussian_matrix(10, 3, 2);
  collinear.col(2) = collinear.col(0) - collinear.col(1);
  CHECK_THROWS_AS(fit_ols(Design(collinear), Vector::Zero(10)), RankDeficientDesign);
  CHECK_THROWS_AS(fit_ols(Design(Matrix::Ones(5, 1)), Vector::Zero(4)), DimensionMismatch);
}

TEST_CASE("row permutation invariance") {
  const Matrix x = testutil::gaussian_matrix(25, 4, 3);
  const Vector y = testutil::gaussian_vector(25, 4);
  std::vector<Index> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 7, perm.end());
  Matrix xp(25, 4);
  Vector yp(25);
  for (Index i = 0; i < 25; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp(i) = y(perm[static_cast<std::size_t>(i)]);
  }
  const OlsFit a = fit_ols(Design(x), y);
  const OlsFit b = fit_ols(Design(xp), yp);
  CHECK(testutil::rel_err(b.beta_hat(), a.beta_hat()) <= 1e-12);
  for (Index i = 0; i < 25; ++i) {
    const Index k = perm[static_cast<std::size_t>(i)];
    CHECK(b.residuals()(i) == Approx(a.residuals()(k)).margin(1e-12));
    CHECK(b.leverages()(i) == Approx(a.leverages()(k)).margin(1e-12));
  }
}

TEST_CASE("column permutation permutes coefficients") {
  const Matrix x = testutil::gaussian_matrix(25, 4, 8);
  const Vector y = testutil::gaussian_vector(25, 9);
  Matrix xc(25, 4);
  xc << x.col(2), x.col(0), x.col(3), x.col(1);
  const OlsFit a = fit_ols(Design(x), y);
  const OlsFit b = fit_ols(Design(xc), y);
  CHECK(b.beta_hat()(0) == Approx(a.beta_hat()(2)).margin(1e-12));
  CHECK(b.beta_hat()(1) == Approx(a.beta_hat()(0)).margin(1e-12));
  CHECK(b.beta_hat()(2) == Approx(a.beta_hat()(3)).margin(1e-12));
  CHECK(b.beta_hat()(3) == Approx(a.beta_hat()(1)).margin(1e-12));
}

TEST_CASE("response scaling is exact") {
  const OlsFit fit = random_fit(30, 6, 21);
  for (double c : {2.0, -3.0, 0.5, 1e3}) {
    const OlsFit scaled = fit.with_response(c * fit.y());
    CHECK(testutil::rel_err(scaled.beta_hat(), c * fit.beta_hat()) <= 1e-12);
    CHECK(testutil::rel_err(scaled.residuals(), c * fit.residuals()) <= 1e-12);
  }
}

TEST_CASE("with_response shares the projection") {
  const OlsFit fit = random_fit(20, 3, 5);
  const OlsFit other = fit.with_response(Vector::Ones(20));
  CHECK(&fit.projection() == &other.projection());
}

TEST_CASE("leverage bounds in closed form") {
  const EigenBounds balanced = leverage_eigen_bounds(Vector::Constant(10, 0.2));
  CHECK(balanced.lower == Approx(0.48));
  CHECK(balanced.upper == Approx(0.8));
  const EigenBounds zero = leverage_eigen_bounds(Vector::Zero(5));
  CHECK(zero.lower == Approx(1.0));
  CHECK(zero.upper == Approx(1.0));
  const EigenBounds big = leverage_eigen_bounds((Vector(3) << 0.6, 0.1, 0.3).finished());
  CHECK(big.lower <= 0.0);
}

TEST_CASE("leverage bounds sandwich the spectrum of Q⊙Q") {
  auto check = [](const Matrix& x) {
    const OlsFit fit = fit_ols(Design(x), Vector::Zero(x.rows()));
    if (fit.leverages().maxCoeff() >= 0.5) return;
    const EigenBounds b = leverage_eigen_bounds(fit);
    const Matrix t = fit.q().cwiseProduct(fit.q());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(t, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= b.lower - 1e-12);
    CHECK(eig.eigenvalues().maxCoeff() <= b.upper + 1e-12);
  };
  check(testutil::gaussian_matrix(400, 80, 17));
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    check(testutil::gaussian_matrix(40 + static_cast<Index>(seed), 5, seed));
  }
}
