#pragma once

#include "regtune/linalg.hpp"

namespace regtune {

// Linear model with Gaussian prior w ~ N(mu_star, omega^2 I) and observation
// noise N(0, sigma_noise^2 I).
struct GaussianPriorModel {
  Vector mu_star;
  double omega = 1.0;
  double sigma_noise = 1.0;
};

// Analytic posterior mean (X X^T + (sigma^2/omega^2) I)^{-1} (X y + (sigma^2/omega^2) mu*).
// Computed through the Gram eigendecomposition, a different factorization
// from the recentered ridge solver it is checked against.
Vector posterior_mean(const Matrix& X, const Vector& y,
                      const GaussianPriorModel& model);

struct EquivalenceCheck {
  double max_diff = 0.0;
  bool pass = false;
};

// Compares the posterior mean with the recentered ridge solution at
// (lambda, mu) = (sigma^2/omega^2, mu*).
EquivalenceCheck check_map_equals_bayes(const Matrix& X, const Vector& y,
                                        const GaussianPriorModel& model,
                                        double tol);

}  // namespace regtune
