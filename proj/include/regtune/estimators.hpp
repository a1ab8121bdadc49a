#pragma once

#include <vector>

#include "regtune/linalg.hpp"

namespace regtune {

enum class EstimatorKind { Ridge, RecenteredRidge, Lasso, ElasticNet };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Ridge;
  double lambda = 0.0;    // L2 weight for ridge / recentered ridge
  double lambda1 = 0.0;   // L1 weight
  double lambda2 = 0.0;   // L2 weight for elastic net
  Vector mu;              // recentering point; empty means zero

  static EstimatorSpec ridge(double lambda);
  static EstimatorSpec recentered(double lambda, Vector mu);
  static EstimatorSpec lasso(double lambda1);
  static EstimatorSpec elastic_net(double lambda1, double lambda2);
};

struct SolveResult {
  Vector w_hat;
  std::vector<int> active_set;  // sorted indices with nonzero coordinates
  std::vector<int> signs;       // +-1 per active index
  double kkt_residual = 0.0;
};

// Objective convention throughout: ||X^T w - y||^2 + lambda1 ||w||_1
// + lambda2 ||w - mu||^2. Stationarity for an active coordinate j reads
// 2 x_j (X^T w - y) + 2 lambda2 w_j = -lambda1 sign(w_j), and inactive
// coordinates satisfy |2 x_j (X^T w - y)| <= lambda1. Formulas written for
// the convention without the factor 2 on the gradient map onto this one by
// replacing their lambda1 with lambda1/2; kLambda1Gradient2 records that the
// factor-2 convention is in force.
inline constexpr bool kLambda1Gradient2 = true;

SolveResult solve_ridge(const Matrix& X, const Vector& y, double lambda,
                        double rank_tolerance = kDefaultRankTol);

SolveResult solve_recentered_ridge(const Matrix& X, const Vector& y,
                                   double lambda, const Vector& mu,
                                   double rank_tolerance = kDefaultRankTol);

SolveResult solve_elastic_net(const Matrix& X, const Vector& y, double lambda1,
                              double lambda2);

// One linear piece of the homotopy path: for lambda1 in [lambda_lo, lambda_hi]
// the solution is intercept + lambda1 * slope (zero off the active set).
struct PathSegment {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  std::vector<int> E;
  std::vector<int> s;
  Vector intercept;  // length d
  Vector slope;      // length d

  Vector eval(double lambda1) const { return intercept + lambda1 * slope; }
};

// Piecewise-linear solution path over [lambda_lo, lambda_hi], segments ordered
// by decreasing lambda1. lambda_lo must be positive.
std::vector<PathSegment> lasso_path(const Matrix& X, const Vector& y,
                                    double lambda2, double lambda_lo,
                                    double lambda_hi);

// First activation level: below 2 ||X y||_inf the all-zero vector stops being
// optimal (lambda2 = 0 case; also correct for any lambda2).
double lambda1_max(const Matrix& X, const Vector& y);

// Proximal-gradient reference solver for the full objective; structurally
// independent of the active-set code, used as a cross-check.
Vector prox_oracle(const Matrix& X, const Vector& y, double lambda1,
                   double lambda2, const Vector* mu = nullptr,
                   int max_iters = 200000, double tol = 1e-10);

// Max KKT violation of w for the objective above (mu = 0 unless given).
double kkt_residual(const Matrix& X, const Vector& y, double lambda1,
                    double lambda2, const Vector& w, const Vector* mu = nullptr);

SolveResult solve(const Matrix& X, const Vector& y, const EstimatorSpec& spec);

}  // namespace regtune
