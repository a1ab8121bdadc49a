#pragma once

#include <Eigen/Dense>

#include "regtune/errors.hpp"

namespace regtune {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultRankTol = 1e-10;

// Eigenvalues of a symmetric PSD matrix, sorted nonincreasing. Values below
// rank_tolerance * max eigenvalue are treated as zero by consumers.
struct Spectrum {
  Vector eigenvalues;  // nonincreasing
  double rank_tolerance = kDefaultRankTol;

  int rank() const;
  double max_eig() const;
};

// Eigendecomposition G = U diag(e) U^T with e ascending (Eigen's order).
struct EigPair {
  Vector e;
  Matrix U;
};

Matrix gram(const Matrix& X);  // X X^T, symmetrized

Spectrum gram_spectrum(const Matrix& G, double rank_tolerance = kDefaultRankTol);

EigPair eig_sym(const Matrix& G);

// V(G): smallest eigenvalue above rank_tolerance * max eigenvalue.
// Returns +inf for the zero matrix. Throws NonSymmetricError.
double smallest_nonzero_eig(const Matrix& G, double rank_tolerance = kDefaultRankTol);

// (G + shift I)^{-1} b through a symmetric factorization.
// Throws SingularError when shift == 0 and G is rank-deficient.
Vector solve_shifted(const Matrix& G, double shift, const Vector& b,
                     double rank_tolerance = kDefaultRankTol);

}  // namespace regtune
