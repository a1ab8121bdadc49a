#include "regtune/bayes.hpp"

#include <cmath>

#include "regtune/errors.hpp"
#include "regtune/estimators.hpp"

namespace regtune {

Vector posterior_mean(const Matrix& X, const Vector& y,
                      const GaussianPriorModel& model) {
  if (!(model.omega > 0) || !(model.sigma_noise > 0)) {
    throw ConfigError("omega and sigma_noise must be positive");
  }
  double lambda = model.sigma_noise * model.sigma_noise /
                  (model.omega * model.omega);
  Vector mu = model.mu_star.size() ? model.mu_star : Vector::Zero(X.rows());
  Vector rhs = X * y + lambda * mu;
  EigPair ep = eig_sym(gram(X));
  Vector coef = (ep.U.transpose() * rhs).array() / (ep.e.array() + lambda);
  return ep.U * coef;
}

EquivalenceCheck check_map_equals_bayes(const Matrix& X, const Vector& y,
                                        const GaussianPriorModel& model,
                                        double tol) {
  double lambda = model.sigma_noise * model.sigma_noise /
                  (model.omega * model.omega);
  Vector mu = model.mu_star.size() ? model.mu_star : Vector::Zero(X.rows());
  Vector bayes = posterior_mean(X, y, model);
  Vector map = solve_recentered_ridge(X, y, lambda, mu).w_hat;
  EquivalenceCheck c;
  c.max_diff = (bayes - map).cwiseAbs().maxCoeff();
  c.pass = c.max_diff <= tol;
  return c;
}

}  // namespace regtune
