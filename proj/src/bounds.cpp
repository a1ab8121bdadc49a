#include "regtune/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "regtune/errors.hpp"
#include "regtune/reduce.hpp"
#include "regtune/rng.hpp"

namespace regtune {

std::string bound_id_name(BoundId id) {
  switch (id) {
    case BoundId::Ridge: return "ridge";
    case BoundId::RidgeWellSpec: return "ridge_wellspec";
    case BoundId::RecenteredRidge: return "recentered_ridge";
    case BoundId::Lasso: return "lasso";
    case BoundId::ElasticNet: return "elastic_net";
    case BoundId::RidgeAlt: return "ridge_alt";
  }
  return "?";
}

BoundId bound_id_from_name(const std::string& s) {
  if (s == "ridge") return BoundId::Ridge;
  if (s == "ridge_wellspec") return BoundId::RidgeWellSpec;
  if (s == "recentered_ridge") return BoundId::RecenteredRidge;
  if (s == "lasso") return BoundId::Lasso;
  if (s == "elastic_net") return BoundId::ElasticNet;
  if (s == "ridge_alt") return BoundId::RidgeAlt;
  throw ConfigError("unknown bound id: " + s);
}

namespace {

double req(double v, const char* name) {
  if (std::isnan(v)) throw MissingInputError(std::string("missing input: ") + name);
  return v;
}

double req_count(int v, const char* name) {
  if (v < 1) throw MissingInputError(std::string("missing input: ") + name);
  return static_cast<double>(v);
}

void push(BoundReport& r, const std::string& label, double v) {
  r.terms.emplace_back(label, v);
}

void finish(BoundReport& r) {
  std::vector<double> vals;
  vals.reserve(r.terms.size());
  for (auto& kv : r.terms) vals.push_back(kv.second);
  r.total = mc::pairwise_sum(vals);
}

}  // namespace

BoundReport eval_bound(BoundId id, const BoundInputs& in) {
  BoundReport r;
  r.theorem_id = id;
  r.inputs_echo = in;
  double T = req_count(in.T, "T");
  double n_v = req_count(in.n_v, "n_v");
  double delta = req(in.delta, "delta");
  double L = req(in.L, "L");
  double C = req(in.C, "C");
  double hoeffding = 5.0 * C * std::sqrt(std::log(16.0 / delta) / (2.0 * T));

  switch (id) {
    case BoundId::Ridge:
    case BoundId::RidgeWellSpec:
    case BoundId::RecenteredRidge: {
      double M = req(in.M, "M");
      double Lam = req(in.Lambda_DT, "Lambda_DT");
      double Exv = req(in.E_xv_norm, "E_xv_norm");
      double Exv2 = req(in.E_xv_norm_sq, "E_xv_norm_sq");
      double bv = req(in.b_v, "b_v");
      if (id == BoundId::RecenteredRidge) {
        push(r, "center_estimate", L * Exv * req(in.mu_err, "mu_err"));
      }
      push(r, "task_sampling", 2.0 * M * L * Lam * Exv / std::sqrt(T));
      double mid = id == BoundId::Ridge
                       ? req(in.E_y_over_sqrtV, "E_y_over_sqrtV")
                       : req(in.E_ws_plus_noise, "E_ws_plus_noise");
      push(r, "validation_sampling",
           2.0 * L * std::sqrt(Exv2) * mid / std::sqrt(n_v * T));
      push(r, "validation_tail",
           2.0 * M * L * bv * Lam * std::sqrt(std::log(4.0 * T / delta) / 2.0) /
               std::sqrt(n_v * T));
      push(r, "task_deviation", hoeffding);
      break;
    }
    case BoundId::Lasso: {
      double d = req_count(in.d, "d");
      double l1max = req(in.lambda1_max, "lambda1_max");
      double LamT = req(in.Lambda_tilde_DT, "Lambda_tilde_DT");
      double Exv = req(in.E_xv_norm, "E_xv_norm");
      double Exv2 = req(in.E_xv_norm_sq, "E_xv_norm_sq");
      double bv = req(in.b_v, "b_v");
      push(r, "task_sampling",
           2.0 * L * l1max * LamT * Exv * std::sqrt(d) / std::sqrt(T));
      push(r, "validation_sampling",
           2.0 * L * std::sqrt(Exv2) * req(in.E_en_term, "E_en_term") /
               std::sqrt(n_v * T));
      push(r, "validation_tail",
           L * bv * l1max * LamT * std::sqrt(2.0 * std::log(T / delta)) /
               std::sqrt(n_v * T));
      push(r, "task_deviation", hoeffding);
      break;
    }
    case BoundId::ElasticNet: {
      double d = req_count(in.d, "d");
      double l1max = req(in.lambda1_max, "lambda1_max");
      double LamT = req(in.Lambda_tilde_DT, "Lambda_tilde_DT");
      double Exv = req(in.E_xv_norm, "E_xv_norm");
      double Exv2 = req(in.E_xv_norm_sq, "E_xv_norm_sq");
      double bv = req(in.b_v, "b_v");
      push(r, "task_sampling",
           2.0 * L * l1max * std::sqrt(d) / std::sqrt(T) *
               (Exv + bv * std::sqrt(std::log(T / delta) / (2.0 * n_v))) *
               LamT);
      push(r, "validation_sampling",
           2.0 * L * std::sqrt(Exv2) * req(in.E_en_term, "E_en_term") /
               std::sqrt(n_v * T));
      push(r, "task_deviation", hoeffding);
      break;
    }
    case BoundId::RidgeAlt: {
      double M = req(in.M, "M");
      double Lam = req(in.Lambda_DT, "Lambda_DT");
      double Exv = req(in.E_xv_norm, "E_xv_norm");
      double Exv2 = req(in.E_xv_norm_sq, "E_xv_norm_sq");
      double Mt = req(in.M_tilde, "M_tilde");
      push(r, "task_sampling", 2.0 * M * L * Lam * Exv / std::sqrt(T));
      push(r, "validation_sampling",
           2.0 * L * std::sqrt(Exv2) *
               std::sqrt(req(in.E_ysq_over_V, "E_ysq_over_V")) /
               std::sqrt(n_v));
      push(r, "validation_tail",
           2.0 * L * Mt * std::sqrt(Exv2) *
               std::pow(std::log(4.0 / delta) / 2.0, 0.25) /
               (std::sqrt(n_v) * std::pow(T, 0.25)));
      push(r, "task_deviation", hoeffding);
      break;
    }
  }
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------

McEstimate estimate_lambda_DT(const GenTriple& gen, int T, int n, int mc_reps,
                              uint64_t seed) {
  std::vector<double> draws = mc::map_indexed(
      static_cast<size_t>(mc_reps), [&](size_t r) {
        uint64_t rep_seed = splitmix64(seed ^ splitmix64(0x6c646dULL + r));
        double worst = 0;
        for (int t = 0; t < T; ++t) {
          Matrix X = sample_inputs(gen.input, n, rep_seed, static_cast<uint64_t>(t));
          double V = smallest_nonzero_eig(gram(X));
          worst = std::max(worst, 1.0 / V);
        }
        return worst;
      });
  mc::MeanSe ms = mc::mean_se(draws);
  return {ms.mean, ms.se};
}

namespace {

// Max over nonempty covariate subsets of f(subset Gram spectrum info).
// visit(E) is called with each index subset.
template <class F>
void for_each_subset_exact(int d, F&& visit) {
  if (d > 15) throw DimensionTooLargeError("exact subset enumeration needs d <= 15");
  std::vector<int> idx;
  for (uint32_t mask = 1; mask < (1u << d); ++mask) {
    idx.clear();
    for (int j = 0; j < d; ++j) {
      if (mask & (1u << j)) idx.push_back(j);
    }
    visit(idx);
  }
}

Matrix rows_of(const Matrix& X, const std::vector<int>& idx) {
  Matrix XE(static_cast<int>(idx.size()), X.cols());
  for (size_t i = 0; i < idx.size(); ++i) XE.row(static_cast<int>(i)) = X.row(idx[i]);
  return XE;
}

std::vector<std::vector<int>> sampled_subsets(int d, int K, Rng& rng) {
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<size_t>(K));
  while (static_cast<int>(out.size()) < K) {
    std::vector<int> idx;
    for (int j = 0; j < d; ++j) {
      if (rng.next_u64() & 1ULL) idx.push_back(j);
    }
    if (!idx.empty()) out.push_back(std::move(idx));
  }
  return out;
}

std::vector<std::vector<int>> path_subsets(const Task& t, double lambda1_hint) {
  double hi = lambda1_max(t.X, t.y) * (1.0 + 1e-9);
  double lo = std::max(hi * 1e-5, lambda1_hint > 0 ? lambda1_hint : 0.0);
  if (lo >= hi) lo = hi * 1e-5;
  auto path = lasso_path(t.X, t.y, 0.0, lo, hi);
  std::vector<std::vector<int>> out;
  for (const PathSegment& seg : path) {
    if (!seg.E.empty()) out.push_back(seg.E);
  }
  if (out.empty()) out.push_back({0});
  return out;
}

template <class Score>
double subset_max(const Task& task, SubsetMode mode, int K, Rng& subset_rng,
                  Score&& score) {
  double worst = 0;
  auto visit = [&](const std::vector<int>& idx) {
    worst = std::max(worst, score(idx));
  };
  switch (mode) {
    case SubsetMode::ExactEnum:
      for_each_subset_exact(static_cast<int>(task.X.rows()), visit);
      break;
    case SubsetMode::SampledSubsets:
      for (auto& idx : sampled_subsets(static_cast<int>(task.X.rows()), K, subset_rng))
        visit(idx);
      break;
    case SubsetMode::PathObserved:
      for (auto& idx : path_subsets(task, 0.0)) visit(idx);
      break;
  }
  return worst;
}

}  // namespace

McEstimate estimate_lambda_tilde_DT(const GenTriple& gen, int T, int n,
                                    int mc_reps, SubsetMode mode, int K,
                                    double lambda2_shift, uint64_t seed) {
  if (mode == SubsetMode::ExactEnum && gen.input.d > 15) {
    throw DimensionTooLargeError("exact subset enumeration needs d <= 15");
  }
  std::vector<double> draws = mc::map_indexed(
      static_cast<size_t>(mc_reps), [&](size_t r) {
        uint64_t rep_seed = splitmix64(seed ^ splitmix64(0x6c74ULL + r));
        Rng subset_rng = Rng::keyed(rep_seed, 0x5353ULL);
        double worst = 0;
        for (int t = 0; t < T; ++t) {
          Task task = sample_task(gen, n, 1, rep_seed, static_cast<uint64_t>(t));
          auto score = [&](const std::vector<int>& idx) {
            double V = smallest_nonzero_eig(gram(rows_of(task.X, idx)));
            return 1.0 / (V + lambda2_shift);
          };
          worst = std::max(worst, subset_max(task, mode, K, subset_rng, score));
        }
        return worst;
      });
  mc::MeanSe ms = mc::mean_se(draws);
  return {ms.mean, ms.se};
}

McEstimate estimate_en_subset_term(const GenTriple& gen, int n, int mc_reps,
                                   SubsetMode mode, int K, double lambda1_max_in,
                                   double lambda2_min, bool en_variant,
                                   uint64_t seed) {
  double sqrt_d = std::sqrt(static_cast<double>(gen.input.d));
  std::vector<double> draws = mc::map_indexed(
      static_cast<size_t>(mc_reps), [&](size_t r) {
        uint64_t rep_seed = splitmix64(seed ^ splitmix64(0x656eULL + r));
        Rng subset_rng = Rng::keyed(rep_seed, 0x5354ULL);
        Task task = sample_task(gen, n, 1, rep_seed, 0);
        double ynorm = task.y.norm();
        auto score = [&](const std::vector<int>& idx) {
          Spectrum sp = gram_spectrum(gram(rows_of(task.X, idx)));
          double cutoff = sp.rank_tolerance * std::max(sp.max_eig(), 0.0);
          double V = std::numeric_limits<double>::infinity();
          double vstar_val = 0, vstar = 0;
          for (int i = 0; i < sp.eigenvalues.size(); ++i) {
            double e = sp.eigenvalues(i);
            if (e <= cutoff) continue;
            V = std::min(V, e);
            double g = std::sqrt(e) / (e + lambda2_min);
            if (g > vstar_val) {
              vstar_val = g;
              vstar = e;
            }
          }
          if (!std::isfinite(V)) return 0.0;
          if (en_variant) {
            return ynorm * std::sqrt(vstar) / (vstar + lambda2_min) +
                   lambda1_max_in * sqrt_d / (V + lambda2_min);
          }
          return ynorm / std::sqrt(V) + lambda1_max_in * sqrt_d / V;
        };
        return subset_max(task, mode, K, subset_rng, score);
      });
  mc::MeanSe ms = mc::mean_se(draws);
  return {ms.mean, ms.se};
}

ReferenceCurves reference_curve_distfree(int d, int T, double delta) {
  ReferenceCurves rc;
  double ld = std::log(static_cast<double>(d));
  double l1d = std::log(1.0 / delta);
  rc.distfree = std::sqrt((ld + l1d) / static_cast<double>(T));
  rc.priorwork = std::sqrt((static_cast<double>(d) + l1d) / static_cast<double>(T));
  return rc;
}

// ---------------------------------------------------------------------------

RademacherEstimate rademacher_estimate(const ProblemInstance& inst,
                                       Family family, const SearchSpec& search,
                                       const LossSpec& loss,
                                       int num_sign_samples, uint64_t seed) {
  SearchSpec rs = resolve_search(search, family, inst);
  size_t T = inst.tasks.size();
  size_t nv = static_cast<size_t>(inst.n_v);

  // Hyperparameter grid. One point suffices when the domain is degenerate.
  std::vector<EstimatorSpec> grid;
  int G = std::max(rs.grid_points, 1);
  bool l1 = family == Family::Lasso || family == Family::ElasticNet;
  double lo = l1 ? rs.lambda1_min : rs.lambda_min;
  double hi = l1 ? rs.lambda1_max : rs.lambda_max;
  for (int k = 0; k < G; ++k) {
    double x = G == 1 ? lo
                      : std::exp(std::log(lo) +
                                 (std::log(hi) - std::log(lo)) * k / (G - 1.0));
    switch (family) {
      case Family::Ridge: grid.push_back(EstimatorSpec::ridge(x)); break;
      case Family::RecenteredRidge:
        grid.push_back(EstimatorSpec::recentered(x, rs.mu));
        break;
      case Family::Lasso: grid.push_back(EstimatorSpec::lasso(x)); break;
      case Family::ElasticNet:
        grid.push_back(EstimatorSpec::elastic_net(x, rs.lambda2_grid.front()));
        break;
    }
  }

  // losses[g][t * nv + i]
  std::vector<std::vector<double>> losses(grid.size(),
                                          std::vector<double>(T * nv));
  for (size_t t = 0; t < T; ++t) {
    const Task& task = inst.tasks[t];
    for (size_t g = 0; g < grid.size(); ++g) {
      SolveResult sr = solve(task.X, task.y, grid[g]);
      Vector pred = task.X_v.transpose() * sr.w_hat;
      for (size_t i = 0; i < nv; ++i) {
        losses[g][t * nv + i] =
            loss(pred(static_cast<int>(i)), task.y_v(static_cast<int>(i)));
      }
    }
  }

  double norm = 1.0 / static_cast<double>(T * nv);
  std::vector<double> task_draws(num_sign_samples), ex_draws(num_sign_samples);
  for (int s = 0; s < num_sign_samples; ++s) {
    Rng rng = Rng::keyed(seed, 0x726164ULL, static_cast<uint64_t>(s));
    std::vector<double> tsign(T);
    for (size_t t = 0; t < T; ++t) tsign[t] = rng.rademacher();
    std::vector<double> esign(T * nv);
    for (size_t k = 0; k < T * nv; ++k) esign[k] = rng.rademacher();
    double sup_t = -std::numeric_limits<double>::infinity();
    double sup_e = -std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < grid.size(); ++g) {
      double st = 0, se = 0;
      for (size_t t = 0; t < T; ++t) {
        for (size_t i = 0; i < nv; ++i) {
          double l = losses[g][t * nv + i];
          st += tsign[t] * l;
          se += esign[t * nv + i] * l;
        }
      }
      sup_t = std::max(sup_t, st * norm);
      sup_e = std::max(sup_e, se * norm);
    }
    task_draws[s] = sup_t;
    ex_draws[s] = sup_e;
  }
  RademacherEstimate out;
  mc::MeanSe mt = mc::mean_se(task_draws);
  mc::MeanSe me = mc::mean_se(ex_draws);
  out.task_level = {mt.mean, mt.se};
  out.example_level = {me.mean, me.se};
  return out;
}

double enumerate_abs_signed_mean(const std::vector<double>& c) {
  size_t T = c.size();
  if (T > 30) throw DimensionTooLargeError("sign enumeration needs <= 30 terms");
  uint64_t count = 1ULL << T;
  double acc = 0;
  for (uint64_t mask = 0; mask < count; ++mask) {
    double s = 0;
    for (size_t t = 0; t < T; ++t) {
      s += (mask & (1ULL << t)) ? c[t] : -c[t];
    }
    acc += std::abs(s);
  }
  return acc / static_cast<double>(count);
}

}  // namespace regtune
