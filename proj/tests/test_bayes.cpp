#include <doctest.h>

#include <cmath>

#include "regtune/bayes.hpp"
#include "regtune/estimators.hpp"
#include "regtune/rng.hpp"

using namespace regtune;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = rng.gaussian();
  return X;
}

Vector random_vector(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("centered prior reduces to plain ridge") {
  Rng rng(71);
  Matrix X = random_matrix(rng, 4, 16);
  Vector y = random_vector(rng, 16);
  GaussianPriorModel m;
  m.mu_star = Vector::Zero(4);
  m.omega = 0.8;
  m.sigma_noise = 1.2;
  double lam = m.sigma_noise * m.sigma_noise / (m.omega * m.omega);
  Vector pm = posterior_mean(X, y, m);
  Vector rr = solve_ridge(X, y, lam).w_hat;
  CHECK((pm - rr).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("diffuse prior approaches least squares") {
  Rng rng(72);
  Matrix X = random_matrix(rng, 3, 30);
  Vector y = random_vector(rng, 30);
  GaussianPriorModel m;
  m.mu_star = random_vector(rng, 3);
  m.omega = 1e6;
  m.sigma_noise = 1.0;
  Vector pm = posterior_mean(X, y, m);
  Vector ols = solve_shifted(gram(X), 0.0, X * y);
  CHECK((pm - ols).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("scalar posterior mean by hand") {
  Matrix X(1, 1);
  X << 1;
  Vector y(1);
  y << 2;
  GaussianPriorModel m;
  m.mu_star = Vector(1);
  m.mu_star << 4;
  m.omega = 1.0;
  m.sigma_noise = 1.0;
  // (1 + 1)^{-1} (2 + 4) = 3
  CHECK(posterior_mean(X, y, m)(0) == doctest::Approx(3.0).epsilon(1e-14));
  EquivalenceCheck ec = check_map_equals_bayes(X, y, m, 1e-12);
  CHECK(ec.pass);
}

TEST_CASE("posterior mean equals recentered ridge on random instances") {
  Rng rng(73);
  for (int rep = 0; rep < 40; ++rep) {
    int d = 1 + static_cast<int>(rng.uniform_index(20));
    int n = 1 + static_cast<int>(rng.uniform_index(100));
    Matrix X = random_matrix(rng, d, n);
    Vector y = random_vector(rng, n);
    GaussianPriorModel m;
    m.mu_star = random_vector(rng, d);
    m.omega = std::pow(10.0, rng.uniform(-1.0, 1.0));
    m.sigma_noise = std::pow(10.0, rng.uniform(-1.0, 1.0));
    EquivalenceCheck ec = check_map_equals_bayes(X, y, m, 1e-10);
    CHECK(ec.max_diff <= 1e-10);
    CHECK(ec.pass);
  }
}

TEST_CASE("zero-center equivalence is even tighter") {
  Rng rng(74);
  Matrix X = random_matrix(rng, 5, 20);
  Vector y = random_vector(rng, 20);
  GaussianPriorModel m;
  m.mu_star = Vector::Zero(5);
  m.omega = 1.0;
  m.sigma_noise = 1.0;
  Vector pm = posterior_mean(X, y, m);
  Vector rr = solve_ridge(X, y, 1.0).w_hat;
  CHECK((pm - rr).cwiseAbs().maxCoeff() <= 1e-12);
}
