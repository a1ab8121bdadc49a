#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "regtune/bounds.hpp"
#include "regtune/erm.hpp"

namespace regtune {

enum class Axis { T, d, n, n_v };

std::string axis_name(Axis a);
Axis axis_from_name(const std::string& s);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // in log y
  double ci_lo = 0.0, ci_hi = 0.0;
};

// Weighted least squares of log y on log x; weights from per-point standard
// errors mapped to the log scale (se/y). Throws NonPositiveError.
SlopeFit fit_loglog_slope(const std::vector<std::array<double, 3>>& points);

struct SweepSpec {
  Axis axis = Axis::T;
  std::vector<double> grid;  // increasing axis values
  GenTriple gen;
  Family family = Family::Ridge;
  SearchSpec search;
  LossSpec loss;
  int T = 100, n = 24, n_v = 10;  // fixed values; the axis one is overridden
  int replicates = 50;
  uint64_t seed = 0;
  int T_oracle = 20000;
  double delta = 0.05;
  bool with_bounds = false;
  int bound_mc_reps = 200;
  int bound_pilot_T_cap = 400;
  // Test hook: when set, per-point risks come from this function instead of
  // Monte Carlo (axis value, replicate) -> risk.
  std::function<double(double, int)> injected_risk;
  std::function<void(size_t, size_t)> progress;  // (completed, total points)
};

struct SweepPoint {
  double axis_value = 0.0;
  double mean_risk = 0.0;
  double se = 0.0;
  double bound_total = 0.0;  // 0 when bounds disabled
  ReferenceCurves ref;
};

struct ExperimentResult {
  std::vector<SweepPoint> points;
  SlopeFit fit;
};

ExperimentResult run_sweep(const SweepSpec& spec);

// Fills bound inputs by measuring constants on a pilot instance and Monte
// Carlo estimates of the distribution-level quantities.
BoundInputs measure_bound_inputs(const GenTriple& gen, Family family,
                                 const SearchSpec& search, int T, int n,
                                 int n_v, double delta, int mc_reps,
                                 uint64_t seed, int pilot_T_cap = 400);

BoundId bound_id_for_family(Family f);

// Scaling of the 1/V extreme statistic: three sweeps (d at fixed n/d, n at
// fixed d, T at fixed d and n) with log-log slope fits.
struct ScalingStudySpec {
  std::vector<int> d_grid, n_grid, T_grid;
  GenTriple gen;
  int mc_reps = 2000;
  uint64_t seed = 0;
  int n_over_d = 6;        // d sweep keeps n = n_over_d * d; also sizes T sweep
  int d_for_n_sweep = 6;   // n sweep fixes this d, T = 1
  int d_for_T_sweep = 4;   // T sweep fixes this d, n = n_over_d * d
};

struct ScalingStudy {
  ExperimentResult d_sweep, n_sweep, T_sweep;
};

ScalingStudy lambda_DT_scaling_study(const ScalingStudySpec& spec);

// Elastic-net excess risk across d with the sample-size rule
// n = ceil(c (d + log(T / lambda2_min))).
struct DimIndependenceSpec {
  std::vector<int> d_grid;
  GenTriple gen;          // sub-Gaussian input family expected
  SearchSpec en_search;   // lambda2_grid must have a positive lower value
  LossSpec loss;
  int T = 400, n_v = 10;
  double n_rule_c = 8.0;
  int replicates = 25;
  uint64_t seed = 0;
  int T_oracle = 4000;
  std::function<double(int, int)> injected_risk;  // (d, replicate) test hook
};

struct DimIndependenceResult {
  ExperimentResult sweep;
  double ratio = 0.0;            // risk(d_max) / risk(d_min)
  double reference_ratio = 0.0;  // sqrt(d_max / d_min)
  std::vector<int> n_used;
};

DimIndependenceResult dimension_independence_study(const DimIndependenceSpec& spec);

// Output emission. CSV headers are documented in docs/formats.md.
void write_sweep_csv(const std::string& path, Axis axis,
                     const ExperimentResult& r);
void write_sweep_json(const std::string& path, Axis axis,
                      const ExperimentResult& r);
void write_sweep_svg(const std::string& path, Axis axis,
                     const ExperimentResult& r);

std::string format_double(double v);  // shortest round-trip style, CSV cells

}  // namespace regtune
