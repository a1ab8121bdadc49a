#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regtune/linalg.hpp"
#include "regtune/rng.hpp"

namespace regtune {

enum class InputFamily {
  UniformEntries,
  GaussianEntries,
  RademacherEntries,
  BoundedDensityCustom,  // triangular density on a symmetric interval
};

// Entry-iid covariate distribution scaled so E[x x^T] = (sigma_x^2 / d) I_d.
struct InputDist {
  InputFamily family = InputFamily::GaussianEntries;
  double sigma_x = 1.0;
  int d = 1;
};

enum class PriorFamily { Gaussian, PointMass, UniformBall };

struct PriorSpec {
  Vector mean;  // length d; empty means zero
  double omega = 1.0;
  PriorFamily family = PriorFamily::Gaussian;
  // When set, Gaussian covariance is (omega^2/d) I so the trace stays omega^2
  // as d grows. Default covariance is omega^2 I.
  bool trace_normalized = false;
};

enum class NoiseFamily { Gaussian, Uniform };

struct NoiseSpec {
  double sigma = 0.0;  // standard deviation for either family
  NoiseFamily family = NoiseFamily::Gaussian;
};

// Everything needed to draw fresh tasks.
struct GenTriple {
  InputDist input;
  PriorSpec prior;
  NoiseSpec noise;
};

struct Task {
  Matrix X;    // d x n, columns are training covariate vectors
  Vector y;    // n
  Matrix X_v;  // d x n_v
  Vector y_v;  // n_v
  std::optional<Vector> w_star;  // present for well-specified tasks
  Vector noise_train;  // drawn noise, stored so y - X^T w* is reproducible
  Vector noise_val;
};

struct ProblemInstance {
  std::vector<Task> tasks;
  int d = 0, n = 0, n_v = 0;
  uint64_t seed = 0;
  GenTriple gen;  // descriptors echoed for reproducibility
};

// One task from substreams keyed by (seed, task_index, block); identical
// (seed, task_index) gives identical bytes regardless of T.
Task sample_task(const GenTriple& gen, int n, int n_v, uint64_t seed,
                 uint64_t task_index);

// Just the input matrix of task task_index (same bytes as the corresponding
// sample_task X block).
Matrix sample_inputs(const InputDist& input, int n, uint64_t seed,
                     uint64_t task_index);

ProblemInstance sample_instance(const InputDist& input, const PriorSpec& prior,
                                const NoiseSpec& noise, int T, int n, int n_v,
                                uint64_t seed);

ProblemInstance sample_instance(const GenTriple& gen, int T, int n, int n_v,
                                uint64_t seed);

// Measured constants feeding the bound evaluator.
struct EmpiricalConstants {
  double M = 0;            // max_t ||X^t y^t||
  double b_v = 0;          // max validation column norm
  double M_tilde = 0;      // max_t ||y^t|| / sqrt(V(X^t X^t^T))
  double E_norm_xv = 0;    // mean ||x_v|| (instance columns + fresh draws)
  double E_norm_xv_sq = 0; // mean ||x_v||^2
  double E_y_over_sqrtV = 0;
  double E_ysq_over_V = 0;
  double E_ws_plus_noise = 0;  // mean of ||w*|| + ||eps|| / sqrt(V); 0 if no w*
  double C_hat = 0;        // max per-example squared loss over a ridge grid
  double L_hat = 0;        // 2 sqrt(C_hat)
};

EmpiricalConstants empirical_constants(const ProblemInstance& inst,
                                       int extra_validation_samples = 0,
                                       uint64_t seed = 0);

// Binary container with bit-exact round trip, plus a JSON form.
void save_instance_binary(const std::string& path, const ProblemInstance& inst);
ProblemInstance load_instance_binary(const std::string& path);
void save_instance_json(const std::string& path, const ProblemInstance& inst);
ProblemInstance load_instance_json(const std::string& path);

std::string input_family_name(InputFamily f);
InputFamily input_family_from_name(const std::string& s);
std::string prior_family_name(PriorFamily f);
PriorFamily prior_family_from_name(const std::string& s);
std::string noise_family_name(NoiseFamily f);
NoiseFamily noise_family_from_name(const std::string& s);

}  // namespace regtune
