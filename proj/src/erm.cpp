#include "regtune/erm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regtune/errors.hpp"
#include "regtune/reduce.hpp"

namespace regtune {

namespace {

bool is_l1(Family f) {
  return f == Family::Lasso || f == Family::ElasticNet;
}

double instance_scale(const ProblemInstance& inst) {
  double tr = 0;
  for (const Task& t : inst.tasks) tr += t.X.squaredNorm();
  double s = tr / static_cast<double>(inst.tasks.size()) / inst.d;
  return s > 0 ? s : 1.0;
}

}  // namespace

SearchSpec resolve_search(const SearchSpec& s, Family family,
                          const ProblemInstance& inst) {
  SearchSpec r = s;
  if (is_l1(family)) {
    if (r.lambda1_max <= 0) {
      double m = 0;
      for (const Task& t : inst.tasks) m = std::max(m, lambda1_max(t.X, t.y));
      r.lambda1_max = m * 1.01;
    }
    if (r.lambda1_min <= 0 || r.lambda1_min >= r.lambda1_max) {
      r.lambda1_min = r.lambda1_max * 1e-5;
    }
  } else {
    double scale = instance_scale(inst);
    if (r.lambda_min <= 0) r.lambda_min = 1e-6 * scale;
    if (r.lambda_max <= 0) r.lambda_max = 1e6 * scale;
  }
  return r;
}

SearchSpec resolve_search(const SearchSpec& s, Family family,
                          const GenTriple& gen, int n, uint64_t seed) {
  SearchSpec r = s;
  if (is_l1(family)) {
    if (r.lambda1_max <= 0) {
      // Deterministic pilot draw bounds the first activation level.
      double m = 0;
      for (int t = 0; t < 32; ++t) {
        Task task = sample_task(gen, n, 1, splitmix64(seed ^ 0x70696c6fULL), t);
        m = std::max(m, lambda1_max(task.X, task.y));
      }
      r.lambda1_max = m * 1.25;
    }
    if (r.lambda1_min <= 0 || r.lambda1_min >= r.lambda1_max) {
      r.lambda1_min = r.lambda1_max * 1e-5;
    }
  } else {
    double scale = static_cast<double>(n) * gen.input.sigma_x *
                   gen.input.sigma_x / gen.input.d;
    if (scale <= 0) scale = 1.0;
    if (r.lambda_min <= 0) r.lambda_min = 1e-6 * scale;
    if (r.lambda_max <= 0) r.lambda_max = 1e6 * scale;
  }
  return r;
}

double validation_loss(const ProblemInstance& inst, const EstimatorSpec& est,
                       const LossSpec& loss) {
  size_t T = inst.tasks.size();
  size_t nv = static_cast<size_t>(inst.n_v);
  // Losses are placed by (task, example) index and pairwise-summed, so the
  // result does not depend on evaluation order.
  std::vector<double> cells(T * nv);
  for (size_t t = 0; t < T; ++t) {
    const Task& task = inst.tasks[t];
    SolveResult sr = solve(task.X, task.y, est);
    Vector pred = task.X_v.transpose() * sr.w_hat;
    for (size_t i = 0; i < nv; ++i) {
      cells[t * nv + i] = loss(pred(static_cast<int>(i)), task.y_v(static_cast<int>(i)));
    }
  }
  return mc::pairwise_sum(cells) / static_cast<double>(T * nv);
}

// ---------------------------------------------------------------------------
// Spectral per-task cache for the ridge families: predictions at any lambda
// cost O(n_v d) once the Gram eigendecomposition is stored.

namespace {

struct RidgeCache {
  Vector e;   // Gram eigenvalues, ascending
  Vector c;   // U^T X y
  Vector m;   // U^T mu (zero when not recentered)
  Matrix P;   // X_v^T U
  Vector yv;
};

RidgeCache make_ridge_cache(const Task& t, const Vector& mu) {
  RidgeCache rc;
  EigPair ep = eig_sym(gram(t.X));
  rc.e = ep.e;
  rc.c = ep.U.transpose() * (t.X * t.y);
  rc.m = mu.size() ? Vector(ep.U.transpose() * mu) : Vector::Zero(ep.e.size());
  rc.P = t.X_v.transpose() * ep.U;
  rc.yv = t.y_v;
  return rc;
}

double ridge_cache_task_loss(const RidgeCache& rc, double lambda,
                             const LossSpec& loss) {
  Vector coef = (rc.c.array() + lambda * rc.m.array()) / (rc.e.array() + lambda);
  Vector pred = rc.P * coef;
  double s = 0;
  for (int i = 0; i < pred.size(); ++i) s += loss(pred(i), rc.yv(i));
  return s;
}

double ridge_eval(const std::vector<RidgeCache>& caches, double lambda,
                  const LossSpec& loss, int n_v) {
  std::vector<double> per(caches.size());
  for (size_t t = 0; t < caches.size(); ++t) {
    per[t] = ridge_cache_task_loss(caches[t], lambda, loss);
  }
  return mc::pairwise_sum(per) / static_cast<double>(caches.size() * n_v);
}

// Grid scan plus golden-section refinement on the best bracket, in log space.
struct Min1d {
  double x = 0, fx = 0;
};

template <class F>
Min1d golden_min(F&& f, double lo, double hi, int grid_points,
                 double rel_width,
                 std::vector<std::pair<double, double>>* grid_out,
                 std::vector<std::pair<double, double>>* trace_out) {
  if (!(lo > 0) || !(hi > lo)) throw EmptyDomainError("bad search interval");
  int G = std::max(grid_points, 3);
  double llo = std::log(lo), lhi = std::log(hi);
  int best = 0;
  double bestf = std::numeric_limits<double>::infinity();
  std::vector<double> xs(G), fs(G);
  for (int k = 0; k < G; ++k) {
    double x = std::exp(llo + (lhi - llo) * k / (G - 1.0));
    double v = f(x);
    xs[k] = x;
    fs[k] = v;
    if (grid_out) grid_out->emplace_back(x, v);
    if (v < bestf) {
      bestf = v;
      best = k;
    }
  }
  double a = std::log(xs[std::max(best - 1, 0)]);
  double b = std::log(xs[std::min(best + 1, G - 1)]);
  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(std::exp(x1));
  double f2 = f(std::exp(x2));
  Min1d out{xs[best], bestf};
  while (b - a > rel_width) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(std::exp(x2));
    }
    if (trace_out) trace_out->emplace_back(std::exp(a), std::exp(b));
  }
  for (double cand : {std::exp(x1), std::exp(x2)}) {
    double v = cand == std::exp(x1) ? f1 : f2;
    if (v < out.fx) {
      out.fx = v;
      out.x = cand;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Piecewise-quadratic per-task caches for the L1 families.

struct SegQuad {
  double lo, hi;  // lambda1 range
  double a, b, c; // summed validation loss = a + b l + c l^2 over the task
};

using TaskSegs = std::vector<SegQuad>;

TaskSegs make_task_segs(const Task& t, double lambda2, double l1_lo,
                        double l1_hi) {
  auto path = lasso_path(t.X, t.y, lambda2, l1_lo, l1_hi);
  TaskSegs out;
  out.reserve(path.size());
  for (const PathSegment& seg : path) {
    Vector p0 = t.X_v.transpose() * seg.intercept - t.y_v;
    Vector p1 = t.X_v.transpose() * seg.slope;
    SegQuad q;
    q.lo = seg.lambda_lo;
    q.hi = seg.lambda_hi;
    q.a = p0.squaredNorm();
    q.b = 2.0 * p0.dot(p1);
    q.c = p1.squaredNorm();
    out.push_back(q);
  }
  return out;
}

double task_segs_loss(const TaskSegs& segs, double l1) {
  // Segments ascend; find the one covering l1.
  size_t lo = 0, hi = segs.size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (segs[mid].lo <= l1) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const SegQuad& q = segs[lo];
  return q.a + l1 * (q.b + l1 * q.c);
}

// Exact ERM over lambda1: sweep the union of all task breakpoints; the total
// loss is quadratic between consecutive breakpoints and is minimized in
// closed form on each interval.
Min1d sweep_min_l1(const std::vector<TaskSegs>& tasks, double l1_lo,
                   double l1_hi) {
  struct Ev {
    double lambda;
    size_t task;
  };
  std::vector<Ev> events;
  std::vector<size_t> cur(tasks.size(), 0);
  double A = 0, B = 0, C = 0;
  for (size_t t = 0; t < tasks.size(); ++t) {
    const TaskSegs& s = tasks[t];
    if (s.empty()) throw DegenerateError("empty path cache");
    A += s[0].a;
    B += s[0].b;
    C += s[0].c;
    for (size_t k = 0; k + 1 < s.size(); ++k) {
      events.push_back(Ev{s[k].hi, t});
    }
  }
  std::sort(events.begin(), events.end(), [](const Ev& x, const Ev& y) {
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    return x.task < y.task;
  });

  Min1d best{l1_lo, std::numeric_limits<double>::infinity()};
  auto consider = [&](double x) {
    double v = A + x * (B + x * C);
    if (v < best.fx) {
      best.fx = v;
      best.x = x;
    }
  };
  double x0 = l1_lo;
  auto scan_interval = [&](double x1) {
    consider(x0);
    consider(x1);
    if (C > 0) {
      double v = -B / (2.0 * C);
      if (v > x0 && v < x1) consider(v);
    }
    x0 = x1;
  };
  for (const Ev& ev : events) {
    if (ev.lambda > x0) scan_interval(std::min(ev.lambda, l1_hi));
    const TaskSegs& s = tasks[ev.task];
    size_t k = cur[ev.task];
    A += s[k + 1].a - s[k].a;
    B += s[k + 1].b - s[k].b;
    C += s[k + 1].c - s[k].c;
    cur[ev.task] = k + 1;
  }
  if (l1_hi > x0) scan_interval(l1_hi);
  return best;
}

double l1_norm_factor(size_t T, int n_v) {
  return 1.0 / (static_cast<double>(T) * n_v);
}

}  // namespace

// ---------------------------------------------------------------------------

TuneResult tune_erm(const ProblemInstance& inst, Family family,
                    const SearchSpec& search_in, const LossSpec& loss) {
  if (inst.tasks.empty()) throw ConfigError("empty instance");
  SearchSpec search = resolve_search(search_in, family, inst);
  TuneResult out;
  if (family == Family::Ridge || family == Family::RecenteredRidge) {
    Vector mu = family == Family::RecenteredRidge && search.mu.size()
                    ? search.mu
                    : Vector();
    std::vector<RidgeCache> caches;
    caches.reserve(inst.tasks.size());
    for (const Task& t : inst.tasks) caches.push_back(make_ridge_cache(t, mu));
    auto f = [&](double lam) { return ridge_eval(caches, lam, loss, inst.n_v); };
    Min1d m = golden_min(f, search.lambda_min, search.lambda_max,
                         search.grid_points, search.refine_rel_width,
                         &out.grid, &out.refinement_trace);
    out.lambda_erm = family == Family::Ridge
                         ? EstimatorSpec::ridge(m.x)
                         : EstimatorSpec::recentered(m.x, mu);
    out.loss_at_erm = m.fx;
    return out;
  }

  if (loss.kind != LossSpec::Kind::Squared) {
    throw ConfigError("exact lambda1 search requires squared loss");
  }
  double norm = l1_norm_factor(inst.tasks.size(), inst.n_v);
  double best_loss = std::numeric_limits<double>::infinity();
  double best_l1 = search.lambda1_min, best_l2 = 0;
  for (double l2 : search.lambda2_grid) {
    if (family == Family::Lasso) l2 = 0.0;
    std::vector<TaskSegs> segs;
    segs.reserve(inst.tasks.size());
    for (const Task& t : inst.tasks) {
      segs.push_back(make_task_segs(t, l2, search.lambda1_min, search.lambda1_max));
    }
    Min1d m = sweep_min_l1(segs, search.lambda1_min, search.lambda1_max);
    double v = m.fx * norm;
    out.grid.emplace_back(l2, v);
    if (v < best_loss) {
      best_loss = v;
      best_l1 = m.x;
      best_l2 = l2;
    }
    if (family == Family::Lasso) break;
  }
  out.lambda_erm = family == Family::Lasso
                       ? EstimatorSpec::lasso(best_l1)
                       : EstimatorSpec::elastic_net(best_l1, best_l2);
  out.loss_at_erm = best_loss;
  return out;
}

// ---------------------------------------------------------------------------

struct OracleCurve::Impl {
  Family family;
  SearchSpec search;
  LossSpec loss;
  int n_v = 1;
  std::vector<RidgeCache> ridge;
  std::vector<std::vector<TaskSegs>> l1;  // [lambda2 index][task]
};

OracleCurve::OracleCurve(const GenTriple& gen, Family family,
                         const SearchSpec& resolved, const LossSpec& loss,
                         int T_oracle, int n, int n_v, uint64_t seed)
    : impl_(new Impl) {
  impl_->family = family;
  impl_->search = resolved;
  impl_->loss = loss;
  impl_->n_v = n_v;
  size_t T = static_cast<size_t>(T_oracle);
  if (family == Family::Ridge || family == Family::RecenteredRidge) {
    Vector mu = family == Family::RecenteredRidge && resolved.mu.size()
                    ? resolved.mu
                    : Vector();
    impl_->ridge.resize(T);
    std::vector<RidgeCache>& caches = impl_->ridge;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (long long t = 0; t < static_cast<long long>(T); ++t) {
      Task task = sample_task(gen, n, n_v, seed, static_cast<uint64_t>(t));
      caches[static_cast<size_t>(t)] = make_ridge_cache(task, mu);
    }
  } else {
    if (loss.kind != LossSpec::Kind::Squared) {
      throw ConfigError("L1 oracle curves require squared loss");
    }
    std::vector<double> l2s = resolved.lambda2_grid;
    if (family == Family::Lasso) l2s = {0.0};
    impl_->l1.assign(l2s.size(), std::vector<TaskSegs>(T));
    for (size_t g = 0; g < l2s.size(); ++g) {
      std::vector<TaskSegs>& segs = impl_->l1[g];
      double l2 = l2s[g];
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
#endif
      for (long long t = 0; t < static_cast<long long>(T); ++t) {
        Task task = sample_task(gen, n, n_v, seed, static_cast<uint64_t>(t));
        segs[static_cast<size_t>(t)] = make_task_segs(
            task, l2, resolved.lambda1_min, resolved.lambda1_max);
      }
    }
  }
}

OracleCurve::~OracleCurve() = default;
OracleCurve::OracleCurve(OracleCurve&&) noexcept = default;

const SearchSpec& OracleCurve::search() const { return impl_->search; }
Family OracleCurve::family() const { return impl_->family; }

double OracleCurve::eval(const EstimatorSpec& est) const {
  const Impl& im = *impl_;
  if (im.family == Family::Ridge || im.family == Family::RecenteredRidge) {
    return ridge_eval(im.ridge, est.lambda, im.loss, im.n_v);
  }
  double l2 = est.kind == EstimatorKind::ElasticNet ? est.lambda2 : 0.0;
  std::vector<double> l2s = im.search.lambda2_grid;
  if (im.family == Family::Lasso) l2s = {0.0};
  size_t gi = l2s.size();
  for (size_t g = 0; g < l2s.size(); ++g) {
    if (std::abs(l2s[g] - l2) <= 1e-12 * std::max(1.0, std::abs(l2))) gi = g;
  }
  if (gi == l2s.size()) throw ConfigError("lambda2 not on the oracle grid");
  const std::vector<TaskSegs>& segs = im.l1[gi];
  std::vector<double> per(segs.size());
  for (size_t t = 0; t < segs.size(); ++t) {
    per[t] = task_segs_loss(segs[t], est.lambda1);
  }
  return mc::pairwise_sum(per) * l1_norm_factor(segs.size(), im.n_v);
}

OracleResult OracleCurve::minimize() const {
  const Impl& im = *impl_;
  OracleResult out;
  if (im.family == Family::Ridge || im.family == Family::RecenteredRidge) {
    auto f = [&](double lam) { return ridge_eval(im.ridge, lam, im.loss, im.n_v); };
    Min1d m = golden_min(f, im.search.lambda_min, im.search.lambda_max,
                         im.search.grid_points, im.search.refine_rel_width,
                         nullptr, nullptr);
    out.lambda_star = m.x;
    out.lv_star = m.fx;
    std::vector<double> per(im.ridge.size());
    for (size_t t = 0; t < im.ridge.size(); ++t) {
      per[t] = ridge_cache_task_loss(im.ridge[t], m.x, im.loss) / im.n_v;
    }
    out.se = mc::mean_se(per).se;
    return out;
  }
  std::vector<double> l2s = im.search.lambda2_grid;
  if (im.family == Family::Lasso) l2s = {0.0};
  double bestf = std::numeric_limits<double>::infinity();
  size_t bestg = 0;
  Min1d bestm;
  for (size_t g = 0; g < l2s.size(); ++g) {
    Min1d m = sweep_min_l1(im.l1[g], im.search.lambda1_min, im.search.lambda1_max);
    double v = m.fx * l1_norm_factor(im.l1[g].size(), im.n_v);
    if (v < bestf) {
      bestf = v;
      bestg = g;
      bestm = m;
    }
  }
  out.lambda_star = bestm.x;
  out.lambda2_star = l2s[bestg];
  out.lv_star = bestf;
  std::vector<double> per(im.l1[bestg].size());
  for (size_t t = 0; t < per.size(); ++t) {
    per[t] = task_segs_loss(im.l1[bestg][t], bestm.x) / im.n_v;
  }
  out.se = mc::mean_se(per).se;
  return out;
}

OracleResult oracle_lambda_star(const GenTriple& gen, Family family,
                                const SearchSpec& search, const LossSpec& loss,
                                int T_oracle, int n, int n_v, uint64_t seed) {
  SearchSpec resolved = resolve_search(search, family, gen, n, seed);
  OracleCurve curve(gen, family, resolved, loss, T_oracle, n, n_v, seed);
  return curve.minimize();
}

RiskResult excess_risk_with_oracle(const GenTriple& gen, Family family,
                                   const LossSpec& loss,
                                   const OracleCurve& oracle, int T, int n,
                                   int n_v, int replicates, uint64_t seed) {
  OracleResult opt = oracle.minimize();
  RiskResult out;
  out.oracle = opt;
  out.gaps.resize(replicates);
  out.lambdas.resize(replicates);
  const SearchSpec& resolved = oracle.search();
  std::vector<double> gaps = mc::map_indexed(
      static_cast<size_t>(replicates),
      [&](size_t r) {
        uint64_t inst_seed = splitmix64(seed ^ splitmix64(0x7265706cULL + r));
        ProblemInstance inst = sample_instance(gen, T, n, n_v, inst_seed);
        TuneResult tr = tune_erm(inst, family, resolved, loss);
        out.lambdas[r] = (family == Family::Lasso || family == Family::ElasticNet)
                             ? tr.lambda_erm.lambda1
                             : tr.lambda_erm.lambda;
        return oracle.eval(tr.lambda_erm) - opt.lv_star;
      });
  out.gaps = gaps;
  mc::MeanSe ms = mc::mean_se(gaps);
  out.mean_gap = ms.mean;
  out.se = ms.se;
  out.ci_lo = ms.mean - 1.96 * ms.se;
  out.ci_hi = ms.mean + 1.96 * ms.se;
  return out;
}

RiskResult excess_risk(const GenTriple& gen, Family family,
                       const SearchSpec& search, const LossSpec& loss, int T,
                       int n, int n_v, int replicates, uint64_t seed,
                       int T_oracle) {
  SearchSpec resolved = resolve_search(search, family, gen, n, seed);
  OracleCurve oracle(gen, family, resolved, loss, T_oracle, n, n_v,
                     splitmix64(seed ^ 0x6f7261636cULL));
  return excess_risk_with_oracle(gen, family, loss, oracle, T, n, n_v,
                                 replicates, seed);
}

}  // namespace regtune
