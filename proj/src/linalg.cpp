#include "regtune/linalg.hpp"

#include <cmath>
#include <limits>

namespace regtune {

int Spectrum::rank() const {
  if (eigenvalues.size() == 0) return 0;
  double cutoff = rank_tolerance * std::max(eigenvalues(0), 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) > cutoff) ++r;
  }
  return r;
}

double Spectrum::max_eig() const {
  return eigenvalues.size() ? eigenvalues(0) : 0.0;
}

Matrix gram(const Matrix& X) {
  Matrix G = X * X.transpose();
  G = 0.5 * (G + G.transpose()).eval();
  return G;
}

static void check_symmetric(const Matrix& G) {
  if (G.rows() != G.cols()) throw NonSymmetricError("matrix is not square");
  double scale = G.cwiseAbs().maxCoeff();
  double asym = (G - G.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(scale, 1.0)) {
    throw NonSymmetricError("matrix asymmetry exceeds tolerance");
  }
}

Spectrum gram_spectrum(const Matrix& G, double rank_tolerance) {
  check_symmetric(G);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  Spectrum s;
  s.eigenvalues = es.eigenvalues().reverse();
  s.rank_tolerance = rank_tolerance;
  return s;
}

EigPair eig_sym(const Matrix& G) {
  check_symmetric(G);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  return EigPair{es.eigenvalues(), es.eigenvectors()};
}

double smallest_nonzero_eig(const Matrix& G, double rank_tolerance) {
  Spectrum s = gram_spectrum(G, rank_tolerance);
  double cutoff = rank_tolerance * std::max(s.max_eig(), 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    double e = s.eigenvalues(i);
    if (e > cutoff && e < best) best = e;
  }
  return best;
}

Vector solve_shifted(const Matrix& G, double shift, const Vector& b,
                     double rank_tolerance) {
  check_symmetric(G);
  if (shift == 0.0) {
    Spectrum s = gram_spectrum(G, rank_tolerance);
    if (s.rank() < G.rows()) {
      throw SingularError("zero shift with rank-deficient matrix");
    }
  }
  Matrix A = G + shift * Matrix::Identity(G.rows(), G.cols());
  Eigen::LDLT<Matrix> ldlt(A);
  Vector x = ldlt.solve(b);
  // One step of iterative refinement keeps the residual near roundoff.
  Vector r = b - A * x;
  x += ldlt.solve(r);
  return x;
}

}  // namespace regtune
