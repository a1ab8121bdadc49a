#include "regtune/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "regtune/bayes.hpp"
#include "regtune/bounds.hpp"
#include "regtune/erm.hpp"
#include "regtune/estimators.hpp"
#include "regtune/experiment.hpp"
#include "regtune/reduce.hpp"
#include "regtune/rng.hpp"
#include "regtune/task_gen.hpp"

namespace regtune {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool pass = true;
  std::ostringstream detail;
};

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix X(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) X(i, j) = rng.gaussian();
  }
  return X;
}

Vector random_vector(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

// 1: closed-form / path solvers vs the accelerated proximal reference.
CriterionResult crit_solver_cross_validation(uint64_t seed) {
  CriterionResult cr{1, "solver cross-validation", false, "", 0};
  Check ck;
  double worst_ridge = 0, worst_rec = 0, worst_en = 0, worst_kkt = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng rng = Rng::keyed(seed, 0xc1ULL, static_cast<uint64_t>(rep));
    int d = 1 + static_cast<int>(rng.uniform_index(30));
    int n = d + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(101 - d)));
    Matrix X = random_matrix(rng, d, n) / std::sqrt(static_cast<double>(d));
    Vector y = random_vector(rng, n);
    double lam = std::pow(10.0, rng.uniform(-2.0, 1.0));
    Vector mu = random_vector(rng, d);

    Vector wr = solve_ridge(X, y, lam).w_hat;
    Vector orr = prox_oracle(X, y, 0.0, lam, nullptr, 2000000, 1e-9);
    worst_ridge = std::max(worst_ridge, (wr - orr).cwiseAbs().maxCoeff());

    Vector wrr = solve_recentered_ridge(X, y, lam, mu).w_hat;
    Vector orc = prox_oracle(X, y, 0.0, lam, &mu, 2000000, 1e-9);
    worst_rec = std::max(worst_rec, (wrr - orc).cwiseAbs().maxCoeff());

    double l1max = lambda1_max(X, y);
    double l1 = l1max * rng.uniform(0.05, 0.8);
    double l2 = rep % 2 == 0 ? 0.0 : std::pow(10.0, rng.uniform(-2.0, 0.0));
    SolveResult en = solve_elastic_net(X, y, l1, l2);
    worst_kkt = std::max(worst_kkt, en.kkt_residual);
    Vector oen = prox_oracle(X, y, l1, l2, nullptr, 2000000, 1e-9);
    worst_en = std::max(worst_en, (en.w_hat - oen).cwiseAbs().maxCoeff());
  }
  ck.pass = worst_ridge <= 1e-6 && worst_rec <= 1e-6 && worst_en <= 1e-6 &&
            worst_kkt <= 1e-6;
  ck.detail << "max diffs ridge=" << worst_ridge << " recentered=" << worst_rec
            << " en=" << worst_en << " kkt=" << worst_kkt << " (tol 1e-6)";
  cr.pass = ck.pass;
  cr.detail = ck.detail.str();
  return cr;
}

// 2: homotopy path coverage, continuity, midpoint agreement.
CriterionResult crit_path_exactness(uint64_t seed) {
  CriterionResult cr{2, "path exactness", false, "", 0};
  double worst_mid = 0, worst_jump = 0;
  bool covered = true;
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng = Rng::keyed(seed, 0xc2ULL, static_cast<uint64_t>(rep));
    int d = 2 + static_cast<int>(rng.uniform_index(11));
    int n = d + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(41 - d)));
    Matrix X = random_matrix(rng, d, n) / std::sqrt(static_cast<double>(d));
    Vector y = random_vector(rng, n);
    double l2 = rep % 3 == 0 ? 0.0 : std::pow(10.0, rng.uniform(-3.0, 0.0));
    double l1max = lambda1_max(X, y);
    double lo = 1e-3 * l1max, hi = 1.1 * l1max;
    auto path = lasso_path(X, y, l2, lo, hi);
    if (path.empty() || std::abs(path.front().lambda_lo - lo) > 1e-12 * hi ||
        std::abs(path.back().lambda_hi - hi) > 1e-12 * hi) {
      covered = false;
    }
    for (size_t k = 0; k + 1 < path.size(); ++k) {
      if (std::abs(path[k].lambda_hi - path[k + 1].lambda_lo) > 1e-12 * hi) {
        covered = false;
      }
      double bp = path[k].lambda_hi;
      worst_jump = std::max(
          worst_jump,
          (path[k].eval(bp) - path[k + 1].eval(bp)).cwiseAbs().maxCoeff());
    }
    for (const PathSegment& seg : path) {
      double mid = 0.5 * (seg.lambda_lo + seg.lambda_hi);
      Vector w_point = solve_elastic_net(X, y, mid, l2).w_hat;
      worst_mid = std::max(worst_mid,
                           (seg.eval(mid) - w_point).cwiseAbs().maxCoeff());
    }
  }
  cr.pass = covered && worst_mid <= 1e-8 && worst_jump <= 1e-8;
  std::ostringstream os;
  os << "coverage=" << (covered ? "ok" : "BROKEN") << " max midpoint diff="
     << worst_mid << " max breakpoint jump=" << worst_jump << " (tol 1e-8)";
  cr.detail = os.str();
  return cr;
}

// 3: posterior mean vs recentered ridge at (sigma^2/omega^2, mu*).
CriterionResult crit_bayes_equivalence(uint64_t seed) {
  CriterionResult cr{3, "posterior-mean equivalence", false, "", 0};
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng = Rng::keyed(seed, 0xc3ULL, static_cast<uint64_t>(rep));
    int d = 1 + static_cast<int>(rng.uniform_index(20));
    int n = 1 + static_cast<int>(rng.uniform_index(100));
    Matrix X = random_matrix(rng, d, n);
    Vector y = random_vector(rng, n);
    GaussianPriorModel model;
    model.mu_star = random_vector(rng, d);
    model.omega = std::pow(10.0, rng.uniform(-1.0, 1.0));
    model.sigma_noise = std::pow(10.0, rng.uniform(-1.0, 1.0));
    worst = std::max(worst, check_map_equals_bayes(X, y, model, 1e-10).max_diff);
  }
  cr.pass = worst <= 1e-10;
  std::ostringstream os;
  os << "max |posterior - recentered ridge| = " << worst << " (tol 1e-10)";
  cr.detail = os.str();
  return cr;
}

// 4: the tuned lambda concentrates at sigma^2/omega^2 = 2.
CriterionResult crit_erm_consistency(uint64_t seed) {
  CriterionResult cr{4, "tuned lambda consistency", false, "", 0};
  GenTriple gen;
  gen.input = {InputFamily::GaussianEntries, 1.0, 5};
  gen.prior.mean = Vector::Zero(5);
  gen.prior.omega = 1.0;
  gen.prior.family = PriorFamily::Gaussian;
  gen.noise.sigma = std::sqrt(2.0);
  SearchSpec search;
  SearchSpec resolved = resolve_search(search, Family::Ridge, gen, 50, seed);
  int hits = 0;
  std::ostringstream vals;
  for (int rep = 0; rep < 20; ++rep) {
    uint64_t s = splitmix64(seed ^ splitmix64(0xc4ULL + rep));
    ProblemInstance inst = sample_instance(gen, 2000, 50, 20, s);
    TuneResult tr = tune_erm(inst, Family::Ridge, resolved, LossSpec::squared());
    if (std::abs(tr.lambda_erm.lambda - 2.0) <= 0.25) ++hits;
    vals << (rep ? "," : "") << tr.lambda_erm.lambda;
  }
  cr.pass = hits >= 18;
  std::ostringstream os;
  os << hits << "/20 runs with |lambda-2| <= 0.25; tuned values [" << vals.str()
     << "]";
  cr.detail = os.str();
  return cr;
}

// 5: excess-risk decay rate across T.
CriterionResult crit_T_rate(uint64_t seed) {
  CriterionResult cr{5, "excess-risk rate in T", false, "", 0};
  SweepSpec spec;
  spec.axis = Axis::T;
  spec.grid = {25, 100, 400, 1600};
  spec.gen.input = {InputFamily::UniformEntries, 1.0, 8};
  spec.gen.prior.mean = Vector::Zero(8);
  spec.gen.prior.omega = 1.0;
  spec.gen.noise.sigma = 1.0;
  spec.family = Family::Ridge;
  spec.n = 48;
  spec.n_v = 10;
  spec.replicates = 200;
  spec.seed = splitmix64(seed ^ 0xc5ULL);
  ExperimentResult r = run_sweep(spec);
  cr.pass = r.fit.slope >= -0.65 && r.fit.slope <= -0.35;
  std::ostringstream os;
  os << "fitted slope = " << r.fit.slope << " (CI [" << r.fit.ci_lo << ", "
     << r.fit.ci_hi << "], window [-0.65, -0.35]); risks:";
  for (const SweepPoint& p : r.points) {
    os << " T=" << p.axis_value << ":" << p.mean_risk << "+-" << p.se;
  }
  cr.detail = os.str();
  return cr;
}

// 6: scaling of the extreme inverse eigenvalue statistic.
CriterionResult crit_lambda_scaling(uint64_t seed) {
  CriterionResult cr{6, "inverse-eigenvalue scaling", false, "", 0};
  ScalingStudySpec spec;
  spec.d_grid = {4, 6, 8};
  spec.n_grid = {36, 72, 144, 288};
  spec.T_grid = {1, 4, 16, 64};
  spec.gen.input = {InputFamily::UniformEntries, 1.0, 6};
  spec.gen.prior.mean = Vector::Zero(6);
  spec.mc_reps = 4000;
  spec.seed = splitmix64(seed ^ 0xc6ULL);
  spec.d_for_n_sweep = 6;
  spec.d_for_T_sweep = 4;
  ScalingStudy st = lambda_DT_scaling_study(spec);
  double n_slope = st.n_sweep.fit.slope;
  double T_slope = st.T_sweep.fit.slope;
  bool n_ok = n_slope >= -1.3 && n_slope <= -0.7;
  bool T_ok = T_slope >= 0.3 && T_slope <= 0.7;
  cr.pass = n_ok && T_ok;
  std::ostringstream os;
  os << "n-slope (d=6, T=1) = " << n_slope << " window [-1.3, -0.7] "
     << (n_ok ? "ok" : "FAIL") << "; T-slope (d=4, n=24) = " << T_slope
     << " window [0.3, 0.7] " << (T_ok ? "ok" : "FAIL");
  cr.detail = os.str();
  return cr;
}

// 7: elastic-net excess risk flat in d under the sample-size rule.
CriterionResult crit_dim_independence(uint64_t seed) {
  CriterionResult cr{7, "dimension independence", false, "", 0};
  DimIndependenceSpec spec;
  spec.d_grid = {10, 40};
  spec.gen.input = {InputFamily::GaussianEntries, 1.0, 10};
  spec.gen.prior.omega = 1.0;
  spec.gen.prior.trace_normalized = true;
  spec.gen.noise.sigma = 0.5;
  spec.en_search.lambda1_min = 1e-3;
  // With the trace-held prior the best l2 weight grows linearly in d, so the
  // grid has to span the optimum at both endpoints of the d sweep.
  spec.en_search.lambda2_grid = {0.5, 2.0, 8.0, 32.0};
  spec.T = 400;
  spec.n_v = 10;
  spec.n_rule_c = 8.0;
  spec.replicates = 96;
  spec.T_oracle = 8000;
  spec.seed = splitmix64(seed ^ 0xc7ULL);
  DimIndependenceResult r = dimension_independence_study(spec);
  cr.pass = r.ratio <= 1.5;
  std::ostringstream os;
  os << "risk ratio d=40/d=10 = " << r.ratio
     << " (threshold 1.5, reference sqrt-growth ratio " << r.reference_ratio
     << "); risks:";
  for (const SweepPoint& p : r.sweep.points) {
    os << " d=" << p.axis_value << ":" << p.mean_risk << "+-" << p.se;
  }
  os << " n used:";
  for (int n : r.n_used) os << " " << n;
  cr.detail = os.str();
  return cr;
}

// 8: evaluated upper bound dominates the observed gap.
CriterionResult crit_bound_validity(uint64_t seed) {
  CriterionResult cr{8, "bound validity", false, "", 0};
  GenTriple gen;
  gen.input = {InputFamily::UniformEntries, 1.0, 4};
  gen.prior.mean = Vector::Zero(4);
  gen.prior.omega = 1.0;
  gen.noise.sigma = 0.5;
  const int T = 50, n = 24, n_v = 10;
  SearchSpec search;
  SearchSpec resolved = resolve_search(search, Family::Ridge, gen, n, seed);
  OracleCurve oracle(gen, Family::Ridge, resolved, LossSpec::squared(), 20000,
                     n, n_v, splitmix64(seed ^ 0xc80aULL));
  OracleResult opt = oracle.minimize();
  BoundInputs bi = measure_bound_inputs(gen, Family::Ridge, search, T, n, n_v,
                                        0.05, 2000, splitmix64(seed ^ 0xc8ULL));
  double rhs = eval_bound(BoundId::RidgeWellSpec, bi).total;
  int holds = 0;
  double worst_gap = 0;
  for (int trial = 0; trial < 500; ++trial) {
    uint64_t s = splitmix64(seed ^ splitmix64(0xc81ULL + trial));
    ProblemInstance inst = sample_instance(gen, T, n, n_v, s);
    TuneResult tr = tune_erm(inst, Family::Ridge, resolved, LossSpec::squared());
    double gap = oracle.eval(tr.lambda_erm) - opt.lv_star;
    worst_gap = std::max(worst_gap, gap);
    if (rhs >= gap) ++holds;
  }
  cr.pass = holds >= 495;
  std::ostringstream os;
  os << holds << "/500 trials with RHS >= gap (need >= 495); RHS = " << rhs
     << ", worst observed gap = " << worst_gap;
  cr.detail = os.str();
  return cr;
}

// 9: sign-randomized complexity vs exhaustive enumeration.
CriterionResult crit_rademacher(uint64_t seed) {
  CriterionResult cr{9, "sign-randomized complexity sanity", false, "", 0};
  Check ck;

  // Symmetric signed mean near zero for a single-point search.
  GenTriple gen;
  gen.input = {InputFamily::GaussianEntries, 1.0, 3};
  gen.prior.mean = Vector::Zero(3);
  gen.prior.omega = 1.0;
  gen.noise.sigma = 0.5;
  ProblemInstance inst = sample_instance(gen, 10, 12, 4, splitmix64(seed ^ 0xc9ULL));
  SearchSpec single;
  single.lambda_min = 1.0;
  single.lambda_max = 1.0 + 1e-12;
  single.grid_points = 1;
  RademacherEstimate re = rademacher_estimate(inst, Family::Ridge, single,
                                              LossSpec::squared(), 4000,
                                              splitmix64(seed ^ 0xc90ULL));
  double z = std::abs(re.task_level.mean) / std::max(re.task_level.se, 1e-300);
  if (z > 3.0) {
    ck.pass = false;
    ck.detail << "symmetric mean z-score " << z << " > 3; ";
  }

  // Absolute signed sums: enumeration vs Monte Carlo, 3 SE.
  std::vector<double> per_task(inst.tasks.size());
  for (size_t t = 0; t < inst.tasks.size(); ++t) {
    Vector w = solve_ridge(inst.tasks[t].X, inst.tasks[t].y, 1.0).w_hat;
    Vector pred = inst.tasks[t].X_v.transpose() * w;
    double s = 0;
    for (int i = 0; i < pred.size(); ++i) {
      double dd = pred(i) - inst.tasks[t].y_v(i);
      s += dd * dd;
    }
    per_task[t] = s;
  }
  double exact = enumerate_abs_signed_mean(per_task);
  Rng rng = Rng::keyed(seed, 0xc91ULL, 0);
  int draws = 4000;
  std::vector<double> mcv(draws);
  for (int k = 0; k < draws; ++k) {
    double s = 0;
    for (double c : per_task) s += rng.rademacher() * c;
    mcv[k] = std::abs(s);
  }
  mc::MeanSe ms = mc::mean_se(mcv);
  if (std::abs(ms.mean - exact) > 3.0 * ms.se) {
    ck.pass = false;
    ck.detail << "enumeration " << exact << " vs MC " << ms.mean << " +- "
              << ms.se << " beyond 3 SE; ";
  }

  // E|sum sigma_t c_t| <= sqrt(sum c_t^2) on enumerated signs.
  bool khintchine_ok = exact <= std::sqrt(mc::pairwise_sum([&] {
                         std::vector<double> sq(per_task.size());
                         for (size_t i = 0; i < sq.size(); ++i)
                           sq[i] = per_task[i] * per_task[i];
                         return sq;
                       }()));
  for (int rep = 0; rep < 20 && khintchine_ok; ++rep) {
    Rng r2 = Rng::keyed(seed, 0xc92ULL, static_cast<uint64_t>(rep));
    int T = 2 + static_cast<int>(r2.uniform_index(11));
    std::vector<double> c(T);
    double sq = 0;
    for (int t = 0; t < T; ++t) {
      c[t] = r2.gaussian();
      sq += c[t] * c[t];
    }
    if (enumerate_abs_signed_mean(c) > std::sqrt(sq) * (1.0 + 1e-12)) {
      khintchine_ok = false;
    }
  }
  if (!khintchine_ok) {
    ck.pass = false;
    ck.detail << "moment inequality violated on enumerated signs; ";
  }

  // All-zero losses give exactly zero estimates.
  GenTriple zero_gen;
  zero_gen.input = {InputFamily::GaussianEntries, 1.0, 3};
  zero_gen.prior.mean = Vector::Zero(3);
  zero_gen.prior.family = PriorFamily::PointMass;
  zero_gen.noise.sigma = 0.0;
  ProblemInstance zi = sample_instance(zero_gen, 6, 8, 3, splitmix64(seed ^ 0xc93ULL));
  SearchSpec zs;
  zs.grid_points = 8;
  RademacherEstimate rz = rademacher_estimate(zi, Family::Ridge, zs,
                                              LossSpec::squared(), 64,
                                              splitmix64(seed ^ 0xc94ULL));
  if (rz.task_level.mean != 0.0 || rz.example_level.mean != 0.0) {
    ck.pass = false;
    ck.detail << "zero-loss instance gave nonzero estimate; ";
  }

  cr.pass = ck.pass;
  std::ostringstream os;
  os << (ck.pass ? "symmetric mean, enumeration match, moment inequality, "
                   "zero-loss checks all hold"
                 : ck.detail.str());
  cr.detail = os.str();
  return cr;
}

// ---------------------------------------------------------------------------
// 10: byte-identical rerun of a reduced end-to-end pipeline.

void run_pipeline_once(uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  GenTriple gen;
  gen.input = {InputFamily::UniformEntries, 1.0, 4};
  gen.prior.mean = Vector::Zero(4);
  gen.prior.omega = 1.0;
  gen.noise.sigma = 0.5;

  ProblemInstance inst = sample_instance(gen, 16, 20, 6, seed);
  save_instance_binary((dir / "instance.bin").string(), inst);
  save_instance_json((dir / "instance.json").string(), inst);

  TuneResult tr = tune_erm(inst, Family::Ridge, SearchSpec{}, LossSpec::squared());
  {
    std::ofstream os(dir / "tune.json", std::ios::trunc);
    os << "{\n  \"lambda_erm\": " << format_double(tr.lambda_erm.lambda)
       << ",\n  \"loss_at_erm\": " << format_double(tr.loss_at_erm) << "\n}\n";
  }

  BoundInputs bi = measure_bound_inputs(gen, Family::Ridge, SearchSpec{}, 16,
                                        20, 6, 0.05, 64, seed);
  BoundReport br = eval_bound(BoundId::RidgeWellSpec, bi);
  {
    std::ofstream os(dir / "bounds.json", std::ios::trunc);
    os << "{\n  \"total\": " << format_double(br.total) << ",\n  \"terms\": {";
    for (size_t i = 0; i < br.terms.size(); ++i) {
      os << (i ? ", " : "") << "\"" << br.terms[i].first
         << "\": " << format_double(br.terms[i].second);
    }
    os << "}\n}\n";
  }

  SweepSpec sweep;
  sweep.axis = Axis::T;
  sweep.grid = {8, 16, 32};
  sweep.gen = gen;
  sweep.family = Family::Ridge;
  sweep.n = 20;
  sweep.n_v = 6;
  sweep.replicates = 8;
  sweep.T_oracle = 400;
  sweep.seed = seed;
  ExperimentResult er = run_sweep(sweep);
  write_sweep_csv((dir / "sweep.csv").string(), Axis::T, er);
  write_sweep_json((dir / "sweep.json").string(), Axis::T, er);
  write_sweep_svg((dir / "sweep.svg").string(), Axis::T, er);
}

bool files_identical(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

}  // namespace

bool verify_determinism(uint64_t seed, const std::string& out_dir,
                        std::ostream& log) {
  fs::path base(out_dir);
  run_pipeline_once(seed, base / "run1");
  run_pipeline_once(seed, base / "run2");
  bool all = true;
  for (const char* name :
       {"instance.bin", "instance.json", "tune.json", "bounds.json",
        "sweep.csv", "sweep.json", "sweep.svg"}) {
    bool same = files_identical(base / "run1" / name, base / "run2" / name);
    if (!same) {
      log << "  mismatch: " << name << "\n";
      all = false;
    }
  }
  return all;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            std::ostream& log) {
  std::vector<CriterionResult> out;
  auto want = [&](int id) {
    return opts.only.empty() ||
           std::find(opts.only.begin(), opts.only.end(), id) != opts.only.end();
  };
  auto run_one = [&](int id, auto&& fn) {
    if (!want(id)) return;
    auto t0 = Clock::now();
    CriterionResult cr = fn();
    cr.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    log << (cr.pass ? "[PASS]" : "[FAIL]") << " criterion " << cr.id << " ("
        << cr.name << ", " << cr.seconds << " s): " << cr.detail << "\n"
        << std::flush;
    out.push_back(std::move(cr));
  };
  uint64_t seed = opts.seed;
  run_one(1, [&] { return crit_solver_cross_validation(seed); });
  run_one(2, [&] { return crit_path_exactness(seed); });
  run_one(3, [&] { return crit_bayes_equivalence(seed); });
  run_one(4, [&] { return crit_erm_consistency(seed); });
  run_one(5, [&] { return crit_T_rate(seed); });
  run_one(6, [&] { return crit_lambda_scaling(seed); });
  run_one(7, [&] { return crit_dim_independence(seed); });
  run_one(8, [&] { return crit_bound_validity(seed); });
  run_one(9, [&] { return crit_rademacher(seed); });
  run_one(10, [&] {
    CriterionResult cr{10, "deterministic rerun", false, "", 0};
    bool ok = verify_determinism(splitmix64(seed ^ 0xcaULL),
                                 opts.out_dir + "/determinism", log);
    cr.pass = ok;
    cr.detail = ok ? "two pipeline runs byte-identical"
                   : "outputs differ between reruns";
    return cr;
  });
  return out;
}

}  // namespace regtune
