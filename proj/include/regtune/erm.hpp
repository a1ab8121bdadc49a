#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "regtune/estimators.hpp"
#include "regtune/task_gen.hpp"

namespace regtune {

// Estimator family being tuned: one hyperparameter (lambda or lambda1) plus
// an optional outer lambda2 grid for the elastic net.
enum class Family { Ridge, RecenteredRidge, Lasso, ElasticNet };

struct LossSpec {
  enum class Kind { Squared, ClippedSquared };
  Kind kind = Kind::Squared;
  double C = 0.0;  // cap for ClippedSquared

  double operator()(double pred, double target) const {
    double d = pred - target;
    double l = d * d;
    if (kind == Kind::ClippedSquared && l > C) l = C;
    return l;
  }
  // From boundedness: an l bounded by C has Lipschitz constant 2 sqrt(C) in
  // the prediction. Plain squared loss carries no a-priori constant.
  double lipschitz() const { return kind == Kind::ClippedSquared ? 2.0 * std::sqrt(C) : 0.0; }

  static LossSpec squared() { return LossSpec{}; }
  static LossSpec clipped(double C) { return LossSpec{Kind::ClippedSquared, C}; }
};

struct SearchSpec {
  // Ridge / recentered ridge domain. Zeros mean auto: [1e-6, 1e6] times the
  // data scale trace(X X^T)/d.
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int grid_points = 64;
  double refine_rel_width = 1e-4;  // golden-section stop, relative log width
  // L1 families. lambda1_max zero means auto (first activation level).
  double lambda1_min = 1e-3;
  double lambda1_max = 0.0;
  std::vector<double> lambda2_grid = {0.0};
  Vector mu;  // recentering point for RecenteredRidge
};

// Fills in auto fields from the data (or from the generator's expected data
// scale plus a deterministic pilot draw, so tuner and oracle share a domain).
SearchSpec resolve_search(const SearchSpec& s, Family family,
                          const ProblemInstance& inst);
SearchSpec resolve_search(const SearchSpec& s, Family family,
                          const GenTriple& gen, int n, uint64_t seed);

struct TuneResult {
  EstimatorSpec lambda_erm;
  double loss_at_erm = 0.0;
  std::vector<std::pair<double, double>> grid;  // (hyperparameter, loss)
  std::vector<std::pair<double, double>> refinement_trace;
};

double validation_loss(const ProblemInstance& inst, const EstimatorSpec& est,
                       const LossSpec& loss);

TuneResult tune_erm(const ProblemInstance& inst, Family family,
                    const SearchSpec& search, const LossSpec& loss);

struct OracleResult {
  double lambda_star = 0.0;   // lambda or lambda1
  double lambda2_star = 0.0;  // elastic net only
  double lv_star = 0.0;
  double se = 0.0;  // standard error of the loss estimate at the minimizer
};

// Monte Carlo estimate of the population validation-loss curve over fresh
// tasks, with common random numbers across hyperparameter values. Compact
// per-task caches make single evaluations cheap.
class OracleCurve {
 public:
  OracleCurve(const GenTriple& gen, Family family, const SearchSpec& resolved,
              const LossSpec& loss, int T_oracle, int n, int n_v,
              uint64_t seed);
  ~OracleCurve();
  OracleCurve(OracleCurve&&) noexcept;

  // Mean loss at the given hyperparameters over the cached fresh tasks.
  double eval(const EstimatorSpec& est) const;
  OracleResult minimize() const;
  const SearchSpec& search() const;
  Family family() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

OracleResult oracle_lambda_star(const GenTriple& gen, Family family,
                                const SearchSpec& search, const LossSpec& loss,
                                int T_oracle, int n, int n_v, uint64_t seed);

struct RiskResult {
  double mean_gap = 0.0;
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // normal 95%
  std::vector<double> gaps;          // per replicate
  std::vector<double> lambdas;       // tuned lambda (or lambda1) per replicate
  OracleResult oracle;
};

RiskResult excess_risk(const GenTriple& gen, Family family,
                       const SearchSpec& search, const LossSpec& loss, int T,
                       int n, int n_v, int replicates, uint64_t seed,
                       int T_oracle = 20000);

// Excess risk reusing a prebuilt oracle curve (T-sweeps share the oracle).
RiskResult excess_risk_with_oracle(const GenTriple& gen, Family family,
                                   const LossSpec& loss,
                                   const OracleCurve& oracle, int T, int n,
                                   int n_v, int replicates, uint64_t seed);

}  // namespace regtune
