#include "regtune/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "regtune/errors.hpp"
#include "regtune/reduce.hpp"
#include "regtune/rng.hpp"

namespace regtune {

using nlohmann::json;

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::T: return "T";
    case Axis::d: return "d";
    case Axis::n: return "n";
    case Axis::n_v: return "n_v";
  }
  return "?";
}

Axis axis_from_name(const std::string& s) {
  if (s == "T") return Axis::T;
  if (s == "d") return Axis::d;
  if (s == "n") return Axis::n;
  if (s == "n_v") return Axis::n_v;
  throw ConfigError("unknown axis: " + s);
}

SlopeFit fit_loglog_slope(const std::vector<std::array<double, 3>>& points) {
  if (points.size() < 2) throw ConfigError("need at least two points for a fit");
  size_t m = points.size();
  std::vector<double> lx(m), ly(m), w(m);
  for (size_t i = 0; i < m; ++i) {
    auto [x, y, se] = points[i];
    if (!(x > 0) || !(y > 0)) throw NonPositiveError("log-log fit needs positive data");
    lx[i] = std::log(x);
    ly[i] = std::log(y);
    double sl = se > 0 ? se / y : 0.0;  // delta method to the log scale
    w[i] = sl > 0 ? 1.0 / (sl * sl) : 0.0;
  }
  bool any_w = std::any_of(w.begin(), w.end(), [](double v) { return v > 0; });
  if (!any_w) std::fill(w.begin(), w.end(), 1.0);
  for (double& v : w) {
    if (v == 0.0) v = *std::max_element(w.begin(), w.end());
  }
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sw += w[i];
    swx += w[i] * lx[i];
    swy += w[i] * ly[i];
    swxx += w[i] * lx[i] * lx[i];
    swxy += w[i] * lx[i] * ly[i];
  }
  double det = sw * swxx - swx * swx;
  if (det == 0) throw ConfigError("degenerate design for slope fit");
  SlopeFit f;
  f.slope = (sw * swxy - swx * swy) / det;
  f.intercept = (swxx * swy - swx * swxy) / det;
  // Residual-scaled standard error of the slope.
  double rss = 0;
  for (size_t i = 0; i < m; ++i) {
    double r = ly[i] - f.intercept - f.slope * lx[i];
    rss += w[i] * r * r;
  }
  double dof = std::max<double>(1.0, static_cast<double>(m) - 2.0);
  double var_slope = (rss / dof) * sw / det;
  double sd = std::sqrt(std::max(var_slope, 0.0));
  f.ci_lo = f.slope - 1.96 * sd;
  f.ci_hi = f.slope + 1.96 * sd;
  return f;
}

BoundId bound_id_for_family(Family f) {
  switch (f) {
    case Family::Ridge: return BoundId::RidgeWellSpec;
    case Family::RecenteredRidge: return BoundId::RecenteredRidge;
    case Family::Lasso: return BoundId::Lasso;
    case Family::ElasticNet: return BoundId::ElasticNet;
  }
  throw ConfigError("unknown family");
}

BoundInputs measure_bound_inputs(const GenTriple& gen, Family family,
                                 const SearchSpec& search, int T, int n,
                                 int n_v, double delta, int mc_reps,
                                 uint64_t seed, int pilot_T_cap) {
  SearchSpec rs = resolve_search(search, family, gen, n, seed);
  int pilot_T = std::min(T, pilot_T_cap);
  ProblemInstance pilot =
      sample_instance(gen, pilot_T, n, n_v, splitmix64(seed ^ 0x70696cULL));
  EmpiricalConstants ec = empirical_constants(pilot, 4096, seed);
  BoundInputs bi;
  bi.T = T;
  bi.n = n;
  bi.n_v = n_v;
  bi.d = gen.input.d;
  bi.delta = delta;
  bi.C = ec.C_hat;
  bi.L = ec.L_hat;
  bi.M = ec.M;
  bi.b_v = ec.b_v;
  bi.M_tilde = ec.M_tilde;
  bi.E_xv_norm = ec.E_norm_xv;
  bi.E_xv_norm_sq = ec.E_norm_xv_sq;
  bi.E_y_over_sqrtV = ec.E_y_over_sqrtV;
  bi.E_ysq_over_V = ec.E_ysq_over_V;
  bi.E_ws_plus_noise = ec.E_ws_plus_noise;
  bi.mu_err = 0.0;
  if (family == Family::RecenteredRidge) {
    Vector truth = gen.prior.mean.size() ? gen.prior.mean
                                         : Vector::Zero(gen.input.d).eval();
    Vector mu = rs.mu.size() ? rs.mu : Vector::Zero(gen.input.d).eval();
    bi.mu_err = (mu - truth).norm();
  }
  if (family == Family::Lasso || family == Family::ElasticNet) {
    bi.lambda1_max = rs.lambda1_max;
    double l2min = 0.0;
    if (family == Family::ElasticNet) {
      l2min = *std::min_element(rs.lambda2_grid.begin(), rs.lambda2_grid.end());
    }
    bi.lambda2_min = l2min;
    SubsetMode mode =
        gen.input.d <= 10 ? SubsetMode::ExactEnum : SubsetMode::SampledSubsets;
    bi.Lambda_tilde_DT =
        estimate_lambda_tilde_DT(gen, T, n, mc_reps, mode, 1024, l2min,
                                 splitmix64(seed ^ 0x6c74ULL))
            .mean;
    bi.E_en_term =
        estimate_en_subset_term(gen, n, mc_reps, mode, 1024, rs.lambda1_max,
                                l2min, family == Family::ElasticNet,
                                splitmix64(seed ^ 0x656eULL))
            .mean;
  } else {
    bi.Lambda_DT =
        estimate_lambda_DT(gen, T, n, mc_reps, splitmix64(seed ^ 0x6cULL)).mean;
  }
  return bi;
}

namespace {

GenTriple gen_with_d(const GenTriple& base, int d) {
  GenTriple g = base;
  g.input.d = d;
  if (g.prior.mean.size() && g.prior.mean.size() != d) {
    g.prior.mean = Vector::Zero(d);
  }
  return g;
}

SweepPoint injected_point(const SweepSpec& spec, double axis_value) {
  std::vector<double> vals(spec.replicates);
  for (int r = 0; r < spec.replicates; ++r) {
    vals[r] = spec.injected_risk(axis_value, r);
  }
  mc::MeanSe ms = mc::mean_se(vals);
  SweepPoint p;
  p.axis_value = axis_value;
  p.mean_risk = ms.mean;
  p.se = ms.se;
  return p;
}

}  // namespace

ExperimentResult run_sweep(const SweepSpec& spec) {
  if (spec.grid.size() < 1) throw ConfigError("empty sweep grid");
  ExperimentResult out;
  size_t total = spec.grid.size();

  // Axis-T sweeps share one oracle curve; the optimum does not depend on T.
  std::unique_ptr<OracleCurve> shared_oracle;
  SearchSpec resolved;
  if (!spec.injected_risk && spec.axis == Axis::T) {
    resolved = resolve_search(spec.search, spec.family, spec.gen, spec.n, spec.seed);
    shared_oracle = std::make_unique<OracleCurve>(
        spec.gen, spec.family, resolved, spec.loss, spec.T_oracle, spec.n,
        spec.n_v, splitmix64(spec.seed ^ 0x6f7261ULL));
  }

  for (size_t k = 0; k < spec.grid.size(); ++k) {
    double av = spec.grid[k];
    SweepPoint p;
    if (spec.injected_risk) {
      p = injected_point(spec, av);
      int d_here = spec.axis == Axis::d ? static_cast<int>(av) : spec.gen.input.d;
      int T_here = spec.axis == Axis::T ? static_cast<int>(av) : spec.T;
      p.ref = reference_curve_distfree(d_here, T_here, spec.delta);
      out.points.push_back(p);
      if (spec.progress) spec.progress(k + 1, total);
      continue;
    }
    int T = spec.T, n = spec.n, n_v = spec.n_v;
    GenTriple gen = spec.gen;
    switch (spec.axis) {
      case Axis::T: T = static_cast<int>(av); break;
      case Axis::d: gen = gen_with_d(gen, static_cast<int>(av)); break;
      case Axis::n: n = static_cast<int>(av); break;
      case Axis::n_v: n_v = static_cast<int>(av); break;
    }
    uint64_t point_seed = splitmix64(spec.seed ^ splitmix64(0x706f696eULL + k));
    RiskResult rr;
    if (shared_oracle) {
      rr = excess_risk_with_oracle(gen, spec.family, spec.loss, *shared_oracle,
                                   T, n, n_v, spec.replicates, point_seed);
    } else {
      rr = excess_risk(gen, spec.family, spec.search, spec.loss, T, n, n_v,
                       spec.replicates, point_seed, spec.T_oracle);
    }
    p.axis_value = av;
    p.mean_risk = rr.mean_gap;
    p.se = rr.se;
    p.ref = reference_curve_distfree(gen.input.d, T, spec.delta);
    if (spec.with_bounds) {
      BoundInputs bi = measure_bound_inputs(
          gen, spec.family, spec.search, T, n, n_v, spec.delta,
          spec.bound_mc_reps, point_seed, spec.bound_pilot_T_cap);
      p.bound_total = eval_bound(bound_id_for_family(spec.family), bi).total;
    }
    out.points.push_back(p);
    if (spec.progress) spec.progress(k + 1, total);
  }

  if (out.points.size() >= 2) {
    std::vector<std::array<double, 3>> pts;
    bool positive = true;
    for (const SweepPoint& p : out.points) {
      if (!(p.axis_value > 0) || !(p.mean_risk > 0)) positive = false;
      pts.push_back({p.axis_value, p.mean_risk, p.se});
    }
    if (positive) out.fit = fit_loglog_slope(pts);
  }
  return out;
}

ScalingStudy lambda_DT_scaling_study(const ScalingStudySpec& spec) {
  ScalingStudy out;
  auto run = [&](const std::vector<int>& grid, auto point_params,
                 uint64_t tag) {
    ExperimentResult r;
    for (size_t k = 0; k < grid.size(); ++k) {
      auto [d, n, T] = point_params(grid[k]);
      if (n < 6 * d) throw ConfigError("scaling study needs n >= 6d");
      McEstimate est = estimate_lambda_DT(
          gen_with_d(spec.gen, d), T, n, spec.mc_reps,
          splitmix64(spec.seed ^ splitmix64(tag + k)));
      SweepPoint p;
      p.axis_value = static_cast<double>(grid[k]);
      p.mean_risk = est.mean;
      p.se = est.se;
      r.points.push_back(p);
    }
    std::vector<std::array<double, 3>> pts;
    for (const SweepPoint& p : r.points) {
      pts.push_back({p.axis_value, p.mean_risk, p.se});
    }
    r.fit = fit_loglog_slope(pts);
    return r;
  };
  out.d_sweep = run(
      spec.d_grid,
      [&](int d) { return std::tuple{d, spec.n_over_d * d, 1}; }, 0x6453ULL);
  out.n_sweep = run(
      spec.n_grid,
      [&](int n) { return std::tuple{spec.d_for_n_sweep, n, 1}; }, 0x6e53ULL);
  out.T_sweep = run(
      spec.T_grid,
      [&](int T) {
        return std::tuple{spec.d_for_T_sweep, spec.n_over_d * spec.d_for_T_sweep, T};
      },
      0x5453ULL);
  return out;
}

DimIndependenceResult dimension_independence_study(
    const DimIndependenceSpec& spec) {
  if (spec.d_grid.empty()) throw ConfigError("empty d grid");
  double l2min = 0;
  for (double v : spec.en_search.lambda2_grid) {
    if (v > 0 && (l2min == 0 || v < l2min)) l2min = v;
  }
  if (l2min <= 0) throw ConfigError("dimension study needs a positive lambda2");
  DimIndependenceResult out;
  for (size_t k = 0; k < spec.d_grid.size(); ++k) {
    int d = spec.d_grid[k];
    int n = static_cast<int>(std::ceil(
        spec.n_rule_c * (d + std::log(static_cast<double>(spec.T) / l2min))));
    out.n_used.push_back(n);
    SweepPoint p;
    p.axis_value = static_cast<double>(d);
    if (spec.injected_risk) {
      std::vector<double> vals(spec.replicates);
      for (int r = 0; r < spec.replicates; ++r) vals[r] = spec.injected_risk(d, r);
      mc::MeanSe ms = mc::mean_se(vals);
      p.mean_risk = ms.mean;
      p.se = ms.se;
    } else {
      RiskResult rr = excess_risk(
          gen_with_d(spec.gen, d), Family::ElasticNet, spec.en_search,
          spec.loss, spec.T, n, spec.n_v, spec.replicates,
          splitmix64(spec.seed ^ splitmix64(0x646bULL + k)), spec.T_oracle);
      p.mean_risk = rr.mean_gap;
      p.se = rr.se;
    }
    p.ref = reference_curve_distfree(d, spec.T, 0.05);
    out.sweep.points.push_back(p);
  }
  const SweepPoint& first = out.sweep.points.front();
  const SweepPoint& last = out.sweep.points.back();
  out.ratio = first.mean_risk != 0.0 ? last.mean_risk / first.mean_risk : 1.0;
  out.reference_ratio = std::sqrt(last.axis_value / first.axis_value);
  return out;
}

// ---------------------------------------------------------------------------
// Emission

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_sweep_csv(const std::string& path, Axis axis,
                     const ExperimentResult& r) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open for write: " + path);
  os << axis_name(axis)
     << ",mean_risk,se,bound_total,reference_distfree,reference_priorwork\n";
  for (const SweepPoint& p : r.points) {
    os << format_double(p.axis_value) << ',' << format_double(p.mean_risk)
       << ',' << format_double(p.se) << ',' << format_double(p.bound_total)
       << ',' << format_double(p.ref.distfree) << ','
       << format_double(p.ref.priorwork) << '\n';
  }
}

void write_sweep_json(const std::string& path, Axis axis,
                      const ExperimentResult& r) {
  json j;
  j["axis"] = axis_name(axis);
  j["fitted_slope"] = r.fit.slope;
  j["intercept"] = r.fit.intercept;
  j["slope_ci"] = {r.fit.ci_lo, r.fit.ci_hi};
  json pts = json::array();
  for (const SweepPoint& p : r.points) {
    pts.push_back({{"axis_value", p.axis_value},
                   {"mean_risk", p.mean_risk},
                   {"se", p.se},
                   {"bound_total", p.bound_total},
                   {"reference_distfree", p.ref.distfree},
                   {"reference_priorwork", p.ref.priorwork}});
  }
  j["points"] = std::move(pts);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open for write: " + path);
  os << j.dump(2) << "\n";
}

namespace {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> xy;
};

void write_svg(const std::string& path, const std::string& xlabel,
               const std::vector<Series>& series) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Series& s : series) {
    for (auto [x, y] : s.xy) {
      if (!(x > 0) || !(y > 0)) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  }
  if (xmin > xmax || ymin > ymax) {
    xmin = ymin = 0;
    xmax = ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;
  const double W = 640, H = 480, ml = 60, mr = 20, mt = 20, mb = 50;
  auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open for write: " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
     << "\" text-anchor=\"middle\" font-size=\"14\">log10 " << xlabel
     << "</text>\n";
  double legend_y = mt + 14;
  for (const Series& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.xy) {
      if (!(x > 0) || !(y > 0)) continue;
      os << px(std::log10(x)) << ',' << py(std::log10(y)) << ' ';
    }
    os << "\"/>\n";
    for (auto [x, y] : s.xy) {
      if (!(x > 0) || !(y > 0)) continue;
      os << "<circle cx=\"" << px(std::log10(x)) << "\" cy=\""
         << py(std::log10(y)) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    os << "<text x=\"" << (W - mr - 160) << "\" y=\"" << legend_y
       << "\" font-size=\"12\" fill=\"" << s.color << "\">" << s.name
       << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
}

}  // namespace

void write_sweep_svg(const std::string& path, Axis axis,
                     const ExperimentResult& r) {
  Series risk{"mean excess risk", "#1f6fb2", {}};
  Series bound{"bound total", "#c23b22", {}};
  Series ref1{"reference (log d)", "#2e8b57", {}};
  Series ref2{"reference (poly d)", "#888888", {}};
  for (const SweepPoint& p : r.points) {
    risk.xy.emplace_back(p.axis_value, p.mean_risk);
    if (p.bound_total > 0) bound.xy.emplace_back(p.axis_value, p.bound_total);
    ref1.xy.emplace_back(p.axis_value, p.ref.distfree);
    ref2.xy.emplace_back(p.axis_value, p.ref.priorwork);
  }
  std::vector<Series> all{risk};
  if (!bound.xy.empty()) all.push_back(bound);
  all.push_back(ref1);
  all.push_back(ref2);
  write_svg(path, axis_name(axis), all);
}

}  // namespace regtune
