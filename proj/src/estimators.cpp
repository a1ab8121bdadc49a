#include "regtune/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regtune/errors.hpp"

namespace regtune {

EstimatorSpec EstimatorSpec::ridge(double lambda) {
  EstimatorSpec s;
  s.kind = EstimatorKind::Ridge;
  s.lambda = lambda;
  return s;
}

EstimatorSpec EstimatorSpec::recentered(double lambda, Vector mu) {
  EstimatorSpec s;
  s.kind = EstimatorKind::RecenteredRidge;
  s.lambda = lambda;
  s.mu = std::move(mu);
  return s;
}

EstimatorSpec EstimatorSpec::lasso(double lambda1) {
  EstimatorSpec s;
  s.kind = EstimatorKind::Lasso;
  s.lambda1 = lambda1;
  return s;
}

EstimatorSpec EstimatorSpec::elastic_net(double lambda1, double lambda2) {
  EstimatorSpec s;
  s.kind = EstimatorKind::ElasticNet;
  s.lambda1 = lambda1;
  s.lambda2 = lambda2;
  return s;
}

double kkt_residual(const Matrix& X, const Vector& y, double lambda1,
                    double lambda2, const Vector& w, const Vector* mu) {
  Vector r = X.transpose() * w - y;
  Vector c = 2.0 * (X * r);
  double worst = 0.0;
  for (int j = 0; j < w.size(); ++j) {
    double muj = mu && mu->size() ? (*mu)(j) : 0.0;
    if (w(j) != 0.0 || lambda1 == 0.0) {
      double sgn = w(j) > 0 ? 1.0 : (w(j) < 0 ? -1.0 : 0.0);
      double g = c(j) + 2.0 * lambda2 * (w(j) - muj) + lambda1 * sgn;
      worst = std::max(worst, std::abs(g));
    } else {
      double g = std::abs(c(j) - 2.0 * lambda2 * muj) - lambda1;
      worst = std::max(worst, std::max(0.0, g));
    }
  }
  return worst;
}

static SolveResult dense_result(const Matrix& X, const Vector& y,
                                double lambda1, double lambda2, Vector w,
                                const Vector* mu) {
  SolveResult r;
  r.kkt_residual = kkt_residual(X, y, lambda1, lambda2, w, mu);
  for (int j = 0; j < w.size(); ++j) {
    if (w(j) != 0.0) {
      r.active_set.push_back(j);
      r.signs.push_back(w(j) > 0 ? 1 : -1);
    }
  }
  r.w_hat = std::move(w);
  return r;
}

SolveResult solve_ridge(const Matrix& X, const Vector& y, double lambda,
                        double rank_tolerance) {
  Vector w = solve_shifted(gram(X), lambda, X * y, rank_tolerance);
  return dense_result(X, y, 0.0, lambda, std::move(w), nullptr);
}

SolveResult solve_recentered_ridge(const Matrix& X, const Vector& y,
                                   double lambda, const Vector& mu,
                                   double rank_tolerance) {
  Vector rhs = X * y;
  if (mu.size()) rhs += lambda * mu;
  Vector w = solve_shifted(gram(X), lambda, rhs, rank_tolerance);
  return dense_result(X, y, 0.0, lambda, std::move(w), &mu);
}

double lambda1_max(const Matrix& X, const Vector& y) {
  return 2.0 * (X * y).cwiseAbs().maxCoeff();
}

namespace {

// Workspace for the decreasing-lambda1 homotopy shared by lasso_path and the
// pointwise elastic net solve.
struct Homotopy {
  const Matrix& X;
  const Vector& y;
  double lambda2;
  std::vector<int> E;
  std::vector<int> s;
  Vector u;  // |E|, intercept of w_E(lambda1)
  Vector v;  // |E|, slope
  Vector a;  // d, intercept of inactive correlations
  Vector b;  // d, slope of inactive correlations

  Homotopy(const Matrix& X_, const Vector& y_, double l2)
      : X(X_), y(y_), lambda2(l2) {}

  // Solves for the current active piece and refreshes correlation lines.
  void refresh() {
    int k = static_cast<int>(E.size());
    int d = static_cast<int>(X.rows());
    Vector r0, r1;
    if (k == 0) {
      u.resize(0);
      v.resize(0);
      r0 = -y;
      r1 = Vector::Zero(y.size());
    } else {
      Matrix XE(k, X.cols());
      for (int i = 0; i < k; ++i) XE.row(i) = X.row(E[i]);
      Matrix A = XE * XE.transpose();
      A.diagonal().array() += lambda2;
      Eigen::LDLT<Matrix> ldlt(A);
      Vector dvec = ldlt.vectorD();
      double dmax = dvec.cwiseAbs().maxCoeff();
      if (dvec.minCoeff() <= 1e-12 * std::max(dmax, 1.0)) {
        throw DegenerateError("active block is rank-deficient on the path");
      }
      Vector sv(k);
      for (int i = 0; i < k; ++i) sv(i) = static_cast<double>(s[i]);
      u = ldlt.solve(XE * y);
      v = -0.5 * ldlt.solve(sv);
      r0 = XE.transpose() * u - y;
      r1 = XE.transpose() * v;
    }
    a = 2.0 * (X * r0);
    b = 2.0 * (X * r1);
  }

  bool active(int j) const {
    return std::find(E.begin(), E.end(), j) != E.end();
  }

  Vector scatter(const Vector& dense_piece) const {
    Vector w = Vector::Zero(X.rows());
    for (size_t i = 0; i < E.size(); ++i) w(E[i]) = dense_piece(i);
    return w;
  }
};

struct Event {
  double lambda = -1.0;
  bool addition = false;
  int index = -1;
  int sign = 0;
};

// Next breakpoint strictly below lambda_cur. Tie rule: additions beat
// removals, then lowest index; ties resolved within 1e-12 relative.
Event next_event(const Homotopy& h, double lambda_cur) {
  constexpr double kRelTie = 1e-12;
  Event best;
  auto better = [&](const Event& e) {
    if (best.index < 0) return true;
    double tol = kRelTie * std::max(1.0, std::abs(best.lambda));
    if (e.lambda > best.lambda + tol) return true;
    if (e.lambda < best.lambda - tol) return false;
    if (e.addition != best.addition) return e.addition;
    return e.index < best.index;
  };
  double hi = lambda_cur * (1.0 - 1e-12);
  int d = static_cast<int>(h.X.rows());
  for (int j = 0; j < d; ++j) {
    if (h.active(j)) continue;
    // correlation line c_j(l) = a_j + l b_j meets the +l boundary (join with
    // sign -1) or the -l boundary (join with sign +1)
    double den_p = 1.0 - h.b(j);
    if (den_p != 0.0) {
      double lam = h.a(j) / den_p;
      if (lam > 0.0 && lam <= hi) {
        Event e{lam, true, j, -1};
        if (better(e)) best = e;
      }
    }
    double den_m = 1.0 + h.b(j);
    if (den_m != 0.0) {
      double lam = -h.a(j) / den_m;
      if (lam > 0.0 && lam <= hi) {
        Event e{lam, true, j, +1};
        if (better(e)) best = e;
      }
    }
  }
  for (size_t i = 0; i < h.E.size(); ++i) {
    if (h.v(i) == 0.0) continue;
    double lam = -h.u(i) / h.v(i);
    if (lam > 0.0 && lam <= hi) {
      Event e{lam, false, h.E[i], 0};
      if (better(e)) best = e;
    }
  }
  return best;
}

}  // namespace

std::vector<PathSegment> lasso_path(const Matrix& X, const Vector& y,
                                    double lambda2, double lambda_lo,
                                    double lambda_hi) {
  if (!(lambda_lo > 0.0)) throw ConfigError("path lower bound must be positive");
  if (!(lambda_hi > lambda_lo)) {
    throw ConfigError("path range is empty");
  }
  int d = static_cast<int>(X.rows());
  double l1max = lambda1_max(X, y);
  std::vector<PathSegment> segs;

  double lambda_cur = std::max(lambda_hi, l1max);
  Homotopy h(X, y, lambda2);
  h.refresh();

  int max_events = 50 * d + 200;
  for (int iter = 0; iter <= max_events; ++iter) {
    if (iter == max_events) throw DegenerateError("homotopy event cap reached");
    Event ev = next_event(h, lambda_cur);
    double lambda_next = ev.index >= 0 ? ev.lambda : 0.0;
    double seg_lo = std::max(lambda_next, lambda_lo);
    bool done = lambda_next <= lambda_lo;
    if (lambda_cur - seg_lo > 1e-14 * std::max(lambda_cur, 1.0) &&
        lambda_cur > lambda_lo) {
      PathSegment seg;
      seg.lambda_lo = seg_lo;
      seg.lambda_hi = std::min(lambda_cur, lambda_hi);
      seg.E = h.E;
      seg.s = h.s;
      seg.intercept = h.scatter(h.u);
      seg.slope = h.scatter(h.v);
      if (seg.lambda_hi > seg.lambda_lo) segs.push_back(std::move(seg));
    }
    if (done) break;
    if (ev.addition) {
      auto pos = std::upper_bound(h.E.begin(), h.E.end(), ev.index);
      h.s.insert(h.s.begin() + (pos - h.E.begin()), ev.sign);
      h.E.insert(pos, ev.index);
    } else {
      auto pos = std::find(h.E.begin(), h.E.end(), ev.index);
      h.s.erase(h.s.begin() + (pos - h.E.begin()));
      h.E.erase(pos);
    }
    h.refresh();
    lambda_cur = ev.lambda;
  }

  std::reverse(segs.begin(), segs.end());  // ascending in lambda1
  return segs;
}

SolveResult solve_elastic_net(const Matrix& X, const Vector& y, double lambda1,
                              double lambda2) {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("negative penalty");
  if (lambda1 == 0.0) {
    Vector w = solve_shifted(gram(X), lambda2, X * y);
    return dense_result(X, y, 0.0, lambda2, std::move(w), nullptr);
  }
  double l1max = lambda1_max(X, y);
  if (lambda1 >= l1max) {
    return dense_result(X, y, lambda1, lambda2, Vector::Zero(X.rows()), nullptr);
  }
  // Run the event loop down to lambda1 and read off the final piece.
  double hi = std::max(l1max, lambda1 * (1.0 + 1e-9)) * (1.0 + 1e-9);
  auto segs = lasso_path(X, y, lambda2, lambda1, hi);
  const PathSegment& seg = segs.front();  // covers [lambda1, ...]
  Vector w = seg.eval(lambda1);
  SolveResult r;
  r.w_hat = w;
  for (size_t i = 0; i < seg.E.size(); ++i) {
    if (w(seg.E[i]) != 0.0) {
      r.active_set.push_back(seg.E[i]);
      r.signs.push_back(seg.s[i]);
    }
  }
  r.kkt_residual = kkt_residual(X, y, lambda1, lambda2, w, nullptr);
  return r;
}

Vector prox_oracle(const Matrix& X, const Vector& y, double lambda1,
                   double lambda2, const Vector* mu, int max_iters,
                   double tol) {
  int d = static_cast<int>(X.rows());
  Matrix G = gram(X);
  Vector Xy = X * y;
  double emax = gram_spectrum(G).max_eig();
  double step = 1.0 / (2.0 * emax + 2.0 * lambda2 + 1e-12);
  Vector muv = mu && mu->size() ? *mu : Vector::Zero(d);
  double thresh = step * lambda1;
  auto objective = [&](const Vector& w) {
    return (X.transpose() * w - y).squaredNorm() +
           lambda1 * w.lpNorm<1>() + lambda2 * (w - muv).squaredNorm();
  };
  auto prox_step = [&](const Vector& z) {
    Vector grad = 2.0 * (G * z) - 2.0 * Xy + 2.0 * lambda2 * (z - muv);
    Vector w = z - step * grad;
    for (int j = 0; j < d; ++j) {
      if (w(j) > thresh) {
        w(j) -= thresh;
      } else if (w(j) < -thresh) {
        w(j) += thresh;
      } else {
        w(j) = 0.0;
      }
    }
    return w;
  };
  // Accelerated proximal gradient with adaptive restart on objective increase.
  Vector w = Vector::Zero(d);
  Vector w_prev = w;
  Vector z = w;
  double tk = 1.0;
  double obj_prev = objective(w);
  for (int it = 0; it < max_iters; ++it) {
    w_prev = w;
    w = prox_step(z);
    double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    z = w + ((tk - 1.0) / tk1) * (w - w_prev);
    tk = tk1;
    if ((it & 15) == 0) {
      double obj = objective(w);
      if (obj > obj_prev) {  // momentum overshoot, restart
        z = w;
        tk = 1.0;
      }
      obj_prev = obj;
      if (kkt_residual(X, y, lambda1, lambda2, w, mu) <= tol) return w;
    }
  }
  if (kkt_residual(X, y, lambda1, lambda2, w, mu) <= tol) return w;
  throw NotConvergedError("proximal gradient did not reach tolerance");
}

SolveResult solve(const Matrix& X, const Vector& y, const EstimatorSpec& spec) {
  switch (spec.kind) {
    case EstimatorKind::Ridge:
      return solve_ridge(X, y, spec.lambda);
    case EstimatorKind::RecenteredRidge:
      return solve_recentered_ridge(X, y, spec.lambda, spec.mu);
    case EstimatorKind::Lasso:
      return solve_elastic_net(X, y, spec.lambda1, 0.0);
    case EstimatorKind::ElasticNet:
      return solve_elastic_net(X, y, spec.lambda1, spec.lambda2);
  }
  throw ConfigError("unknown estimator kind");
}

}  // namespace regtune
