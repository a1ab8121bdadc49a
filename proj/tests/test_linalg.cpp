#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "regtune/linalg.hpp"
#include "regtune/rng.hpp"

using namespace regtune;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix X(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) X(i, j) = rng.gaussian();
  return X;
}

// Conjugate gradient, independent of the factorization-based solver.
Vector cg_solve(const Matrix& A, const Vector& b, int iters, double tol) {
  Vector x = Vector::Zero(b.size());
  Vector r = b, p = b;
  double rs = r.squaredNorm();
  for (int k = 0; k < iters; ++k) {
    Vector Ap = A * p;
    double alpha = rs / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    double rs_new = r.squaredNorm();
    if (std::sqrt(rs_new) < tol) break;
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return x;
}

}  // namespace

TEST_CASE("gram of the identity is scaled identity") {
  Matrix X = Matrix::Identity(2, 2);
  CHECK((gram(X) - Matrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("gram of a single row is the squared norm") {
  Matrix X(1, 2);
  X << 1, 2;
  Matrix G = gram(X);
  CHECK(G.rows() == 1);
  CHECK(G(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("gram matches a naive triple-loop product") {
  Rng rng(11);
  Matrix X = random_matrix(rng, 5, 20);
  Matrix G = gram(X);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      double s = 0;
      for (int k = 0; k < 20; ++k) s += X(i, k) * X(j, k);
      CHECK(std::abs(G(i, j) - s) <= 1e-12);
    }
  }
}

TEST_CASE("gram output is exactly symmetric") {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix G = gram(random_matrix(rng, 6, 13));
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("smallest nonzero eigenvalue of the identity") {
  CHECK(smallest_nonzero_eig(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
}

TEST_CASE("smallest nonzero eigenvalue skips zero eigenvalues") {
  Matrix G = Matrix::Zero(3, 3);
  G(0, 0) = 9;
  G(2, 2) = 4;
  CHECK(smallest_nonzero_eig(G) == doctest::Approx(4.0));
}

TEST_CASE("rank-2 gram matches an SVD-based oracle") {
  Rng rng(13);
  Matrix B = random_matrix(rng, 4, 2);
  Matrix C = random_matrix(rng, 2, 12);
  Matrix X = B * C;  // rank 2
  double v = smallest_nonzero_eig(gram(X));
  Eigen::JacobiSVD<Matrix> svd(X);
  double s2 = svd.singularValues()(1);
  CHECK(std::abs(v - s2 * s2) <= 1e-8 * std::max(1.0, s2 * s2));
}

TEST_CASE("smallest nonzero eigenvalue scales linearly") {
  Rng rng(14);
  Matrix G = gram(random_matrix(rng, 5, 9));
  double v = smallest_nonzero_eig(G);
  for (double c : {0.5, 3.0, 1e4}) {
    CHECK(smallest_nonzero_eig(c * G) == doctest::Approx(c * v).epsilon(1e-10));
  }
}

TEST_CASE("asymmetric input is rejected") {
  Matrix G(2, 2);
  G << 1, 2, 0, 1;
  CHECK_THROWS_AS(smallest_nonzero_eig(G), NonSymmetricError);
}

TEST_CASE("shifted solve on a diagonal system") {
  Vector b(2);
  b << 2, 4;
  Vector x = solve_shifted(Matrix::Identity(2, 2), 1.0, b);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x(1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("shifted solve on a scalar system") {
  Matrix G(1, 1);
  G << 4;
  Vector b(1);
  b << 6;
  CHECK(solve_shifted(G, 2.0, b)(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shifted solve matches conjugate gradients") {
  Rng rng(15);
  Matrix G = gram(random_matrix(rng, 8, 16));
  Vector b = Vector::NullaryExpr(8, [&](Eigen::Index) { return rng.gaussian(); });
  Vector x = solve_shifted(G, 0.3, b);
  Matrix A = G + 0.3 * Matrix::Identity(8, 8);
  Vector oracle = cg_solve(A, b, 2000, 1e-14);
  CHECK((x - oracle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("shifted solve residual bound on random instances") {
  Rng rng(16);
  for (int rep = 0; rep < 500; ++rep) {
    int d = 1 + static_cast<int>(rng.uniform_index(50));
    int n = d + static_cast<int>(rng.uniform_index(30));
    Matrix G = gram(random_matrix(rng, d, n));
    Vector b = Vector::NullaryExpr(d, [&](Eigen::Index) { return rng.gaussian(); });
    double shift = std::pow(10.0, rng.uniform(-4.0, 2.0));
    Vector x = solve_shifted(G, shift, b);
    Matrix A = G + shift * Matrix::Identity(d, d);
    CHECK((A * x - b).norm() <= 1e-9 * b.norm());
  }
}

TEST_CASE("larger shifts give smaller solutions") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    int d = 2 + static_cast<int>(rng.uniform_index(10));
    Matrix X = random_matrix(rng, d, d + 5);
    Matrix G = gram(X);
    Vector b = X * Vector::NullaryExpr(d + 5, [&](Eigen::Index) { return rng.gaussian(); });
    double lo = std::pow(10.0, rng.uniform(-3.0, 0.0));
    double hi = lo * (1.0 + rng.uniform(0.1, 10.0));
    CHECK(solve_shifted(G, hi, b).norm() <= solve_shifted(G, lo, b).norm() + 1e-9);
  }
}

TEST_CASE("zero shift on a rank-deficient gram is rejected") {
  Matrix G = Matrix::Zero(3, 3);
  G(0, 0) = 1;
  Vector b = Vector::Ones(3);
  CHECK_THROWS_AS(solve_shifted(G, 0.0, b), SingularError);
}

TEST_CASE("zero matrix has infinite smallest nonzero eigenvalue") {
  CHECK(std::isinf(smallest_nonzero_eig(Matrix::Zero(3, 3))));
}
