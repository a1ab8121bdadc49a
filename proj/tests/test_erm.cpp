#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "regtune/erm.hpp"
#include "regtune/rng.hpp"

using namespace regtune;

namespace {

ProblemInstance scalar_instance() {
  Task t;
  t.X = Matrix(1, 1);
  t.X << 1;
  t.y = Vector(1);
  t.y << 2;
  t.X_v = Matrix(1, 1);
  t.X_v << 1;
  t.y_v = Vector(1);
  t.y_v << 1;
  ProblemInstance inst;
  inst.tasks.push_back(t);
  inst.d = inst.n = inst.n_v = 1;
  inst.gen.input.d = 1;
  return inst;
}

GenTriple noisy_gen(int d, double sigma) {
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, d};
  g.prior.mean = Vector::Zero(d);
  g.prior.omega = 1.0;
  g.noise.sigma = sigma;
  return g;
}

}  // namespace

TEST_CASE("noiseless instance has zero validation loss at zero penalty") {
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, 3};
  Vector w0(3);
  w0 << 1, 2, -1;
  g.prior.mean = w0;
  g.prior.family = PriorFamily::PointMass;
  g.noise.sigma = 0.0;
  ProblemInstance inst = sample_instance(g, 4, 8, 3, 61);
  double lv = validation_loss(inst, EstimatorSpec::ridge(0.0), LossSpec::squared());
  CHECK(lv <= 1e-18);
}

TEST_CASE("scalar validation loss by hand") {
  ProblemInstance inst = scalar_instance();
  double lv = validation_loss(inst, EstimatorSpec::ridge(2.0), LossSpec::squared());
  // w = 2 / (1 + 2) = 2/3, loss (2/3 - 1)^2 = 1/9
  CHECK(lv == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("validation loss ignores task and example order") {
  GenTriple g = noisy_gen(3, 0.5);
  ProblemInstance inst = sample_instance(g, 6, 10, 4, 62);
  EstimatorSpec est = EstimatorSpec::ridge(0.7);
  LossSpec loss = LossSpec::squared();
  double lv = validation_loss(inst, est, loss);

  ProblemInstance rev = inst;
  std::reverse(rev.tasks.begin(), rev.tasks.end());
  for (Task& t : rev.tasks) {
    t.X_v = t.X_v.rowwise().reverse().eval();
    t.y_v = t.y_v.reverse().eval();
  }
  CHECK(validation_loss(rev, est, loss) == lv);
}

TEST_CASE("clipped losses never exceed the cap") {
  GenTriple g = noisy_gen(3, 2.0);
  ProblemInstance inst = sample_instance(g, 5, 8, 4, 63);
  double lv = validation_loss(inst, EstimatorSpec::ridge(0.01), LossSpec::clipped(0.2));
  CHECK(lv <= 0.2 + 1e-15);
}

TEST_CASE("noiseless tuning lands at the lower edge") {
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, 3};
  Vector w0(3);
  w0 << 0.5, -1, 2;
  g.prior.mean = w0;
  g.prior.family = PriorFamily::PointMass;
  g.noise.sigma = 0.0;
  ProblemInstance inst = sample_instance(g, 4, 10, 4, 64);
  SearchSpec s;
  s.lambda_min = 1e-4;
  s.lambda_max = 1e2;
  TuneResult tr = tune_erm(inst, Family::Ridge, s, LossSpec::squared());
  CHECK(tr.lambda_erm.lambda <= 1e-4 * 1.01);
}

TEST_CASE("tuning matches a dense grid scan") {
  ProblemInstance inst = scalar_instance();
  SearchSpec s;
  s.lambda_min = 0.01;
  s.lambda_max = 100.0;
  TuneResult tr = tune_erm(inst, Family::Ridge, s, LossSpec::squared());
  double best = 1e300, best_lam = 0;
  for (int k = 0; k < 1000000; ++k) {
    double lam = std::exp(std::log(0.01) + (std::log(100.0) - std::log(0.01)) * k / 999999.0);
    double lv = validation_loss(inst, EstimatorSpec::ridge(lam), LossSpec::squared());
    if (lv < best) {
      best = lv;
      best_lam = lam;
    }
  }
  // The refinement stops at a relative bracket width of 1e-4, so the tuned
  // loss can sit slightly above the dense scan's minimum near a zero.
  CHECK(tr.loss_at_erm <= best + 1e-8);
  // grid resolution of the dense scan
  CHECK(std::abs(std::log(tr.lambda_erm.lambda) - std::log(best_lam)) <= 1e-3);
}

TEST_CASE("reported loss is the minimum over all evaluations") {
  GenTriple g = noisy_gen(4, 0.7);
  ProblemInstance inst = sample_instance(g, 8, 12, 4, 65);
  TuneResult tr = tune_erm(inst, Family::Ridge, SearchSpec{}, LossSpec::squared());
  for (auto& [lam, lv] : tr.grid) CHECK(tr.loss_at_erm <= lv + 1e-15);
  for (auto& [lam, lv] : tr.refinement_trace) CHECK(tr.loss_at_erm <= lv + 1e-15);
}

TEST_CASE("l1 tuning beats every grid candidate") {
  GenTriple g = noisy_gen(4, 0.5);
  ProblemInstance inst = sample_instance(g, 6, 16, 5, 66);
  TuneResult tr = tune_erm(inst, Family::Lasso, SearchSpec{}, LossSpec::squared());
  double check = validation_loss(inst, tr.lambda_erm, LossSpec::squared());
  CHECK(check == doctest::Approx(tr.loss_at_erm).epsilon(1e-10));
  for (double l1 : {0.01, 0.1, 0.5, 1.0, 2.0}) {
    double lv = validation_loss(inst, EstimatorSpec::lasso(l1), LossSpec::squared());
    CHECK(tr.loss_at_erm <= lv + 1e-12);
  }
}

TEST_CASE("elastic net tuning searches the lambda2 grid") {
  GenTriple g = noisy_gen(3, 0.5);
  ProblemInstance inst = sample_instance(g, 5, 12, 4, 67);
  SearchSpec s;
  s.lambda2_grid = {0.1, 1.0};
  TuneResult tr = tune_erm(inst, Family::ElasticNet, s, LossSpec::squared());
  CHECK((tr.lambda_erm.lambda2 == 0.1 || tr.lambda_erm.lambda2 == 1.0));
  double check = validation_loss(inst, tr.lambda_erm, LossSpec::squared());
  CHECK(check == doctest::Approx(tr.loss_at_erm).epsilon(1e-10));
}

TEST_CASE("oracle estimates agree across seeds") {
  GenTriple g = noisy_gen(3, 0.7);
  SearchSpec resolved = resolve_search(SearchSpec{}, Family::Ridge, g, 12, 5);
  OracleResult a = oracle_lambda_star(g, Family::Ridge, resolved,
                                      LossSpec::squared(), 4000, 12, 4, 101);
  OracleResult b = oracle_lambda_star(g, Family::Ridge, resolved,
                                      LossSpec::squared(), 4000, 12, 4, 202);
  double se = std::sqrt(a.se * a.se + b.se * b.se);
  CHECK(std::abs(a.lv_star - b.lv_star) <= 3.0 * se + 1e-12);
}

TEST_CASE("degenerate single-point search has no excess risk") {
  GenTriple g = noisy_gen(2, 0.5);
  SearchSpec s;
  s.lambda_min = 1.0;
  s.lambda_max = 1.0 + 1e-9;
  s.grid_points = 2;
  RiskResult r = excess_risk(g, Family::Ridge, s, LossSpec::squared(), 10, 10,
                             4, 8, 71, 2000);
  CHECK(std::abs(r.mean_gap) <= 3.0 * r.se + 1e-12);
}

TEST_CASE("pooled mean is the average of per-replicate gaps") {
  GenTriple g = noisy_gen(2, 0.5);
  RiskResult r = excess_risk(g, Family::Ridge, SearchSpec{}, LossSpec::squared(),
                             20, 10, 4, 6, 72, 2000);
  double s = 0;
  for (double gp : r.gaps) s += gp;
  CHECK(r.mean_gap == doctest::Approx(s / r.gaps.size()).epsilon(1e-12));
  CHECK(r.mean_gap >= -3.0 * r.se);
}

TEST_CASE("risk gaps shrink as tasks accumulate") {
  GenTriple g = noisy_gen(3, 1.0);
  SearchSpec resolved = resolve_search(SearchSpec{}, Family::Ridge, g, 16, 7);
  OracleCurve oracle(g, Family::Ridge, resolved, LossSpec::squared(), 4000, 16,
                     5, 303);
  RiskResult a = excess_risk_with_oracle(g, Family::Ridge, LossSpec::squared(),
                                         oracle, 25, 16, 5, 30, 91);
  RiskResult b = excess_risk_with_oracle(g, Family::Ridge, LossSpec::squared(),
                                         oracle, 400, 16, 5, 30, 92);
  CHECK(b.mean_gap <= a.mean_gap + 3.0 * std::sqrt(a.se * a.se + b.se * b.se));
}
