#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "regtune/erm.hpp"
#include "regtune/task_gen.hpp"

namespace regtune {

// Which excess-risk upper bound to evaluate.
enum class BoundId {
  Ridge,            // generic ridge bound
  RidgeWellSpec,    // well-specified refinement of the ridge bound
  RecenteredRidge,  // recentered ridge with a center estimate
  Lasso,
  ElasticNet,
  RidgeAlt,         // alternative ridge bound with a T^{1/4} tail term
};

std::string bound_id_name(BoundId id);
BoundId bound_id_from_name(const std::string& s);

// Measured constants the bound formulas consume. NaN marks a missing value;
// eval_bound reports which required field is absent.
struct BoundInputs {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
  int T = 0, n = 0, n_v = 0, d = 0;
  double delta = kMissing;
  double L = kMissing, C = kMissing;
  double M = kMissing, b_v = kMissing, M_tilde = kMissing;
  double Lambda_DT = kMissing;
  double Lambda_tilde_DT = kMissing;
  double E_xv_norm = kMissing, E_xv_norm_sq = kMissing;
  double E_y_over_sqrtV = kMissing;
  double E_ysq_over_V = kMissing;       // alternative ridge bound only
  double E_ws_plus_noise = kMissing;    // E[||w*|| + ||eps||/sqrt(V)]
  double lambda1_max = kMissing, lambda2_min = kMissing;
  double E_en_term = kMissing;  // subset expectation for lasso / elastic net
  double mu_err = kMissing;     // ||mu_hat - mu*||
};

struct BoundReport {
  BoundId theorem_id = BoundId::Ridge;
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;  // pairwise sum of terms
  BoundInputs inputs_echo;
};

BoundReport eval_bound(BoundId id, const BoundInputs& inputs);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// E[max over T fresh tasks of 1/V(X X^T)], by Monte Carlo.
McEstimate estimate_lambda_DT(const GenTriple& gen, int T, int n, int mc_reps,
                              uint64_t seed);

enum class SubsetMode { ExactEnum, SampledSubsets, PathObserved };

// E[max over tasks and covariate subsets E of 1/(V(X_E X_E^T) + lambda2_shift)].
// lambda2_shift = 0 gives the lasso variant. ExactEnum requires d <= 15;
// SampledSubsets draws K uniform nonempty subsets per task (downward biased);
// PathObserved uses the subsets realized on the homotopy path.
McEstimate estimate_lambda_tilde_DT(const GenTriple& gen, int T, int n,
                                    int mc_reps, SubsetMode mode, int K,
                                    double lambda2_shift, uint64_t seed);

// Subset expectation entering the validation-sampling term:
// lasso (en_variant = false):  E[max_E ||y||/sqrt(V) + lambda1_max sqrt(d)/V]
// elastic net (en_variant = true):
//   E[max_E ||y|| sqrt(V*)/(V* + lambda2_min)
//          + lambda1_max sqrt(d)/(V + lambda2_min)]
// where V* is the nonzero eigenvalue maximizing sqrt(e)/(e + lambda2_min).
McEstimate estimate_en_subset_term(const GenTriple& gen, int n, int mc_reps,
                                   SubsetMode mode, int K, double lambda1_max,
                                   double lambda2_min, bool en_variant,
                                   uint64_t seed);

// Reference overlay curves: a dimension-light curve sqrt((log d + log(1/delta))/T)
// and the worst-case-distribution curve sqrt((d + log(1/delta))/T), unit
// constants by convention.
struct ReferenceCurves {
  double distfree = 0.0;
  double priorwork = 0.0;
};
ReferenceCurves reference_curve_distfree(int d, int T, double delta);

struct RademacherEstimate {
  McEstimate task_level;     // signs drawn per task
  McEstimate example_level;  // signs drawn per validation example
};

// Empirical sign-randomized complexity: draws sign vectors and maximizes the
// signed mean loss over the hyperparameter grid.
RademacherEstimate rademacher_estimate(const ProblemInstance& inst,
                                       Family family, const SearchSpec& search,
                                       const LossSpec& loss,
                                       int num_sign_samples, uint64_t seed);

// Exact E_sigma |sum_t sigma_t c_t| by enumerating all sign vectors (T <= 30).
double enumerate_abs_signed_mean(const std::vector<double>& c);

}  // namespace regtune
