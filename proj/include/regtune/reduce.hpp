#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace regtune::mc {

// Pairwise (tree) summation. The reduction order depends only on n, never on
// the number of workers, so parallel and serial runs sum bit-identically.
inline double pairwise_sum(const double* v, size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

// Evaluates f(i) for i in [0, n) into indexed slots. Each slot is computed
// independently, so the parallel and serial variants produce identical bytes.
template <class F>
std::vector<double> map_indexed_parallel(size_t n, F&& f) {
  std::vector<double> out(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    out[static_cast<size_t>(i)] = f(static_cast<size_t>(i));
  }
  return out;
}

// Serial reference used by tests and the benchmark baseline.
template <class F>
std::vector<double> map_indexed_serial(size_t n, F&& f) {
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

template <class F>
std::vector<double> map_indexed(size_t n, F&& f, bool parallel = true) {
  return parallel ? map_indexed_parallel(n, f) : map_indexed_serial(n, f);
}

// Mean and standard error of a sample, pairwise-summed.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  size_t n = v.size();
  if (n == 0) return r;
  r.mean = pairwise_sum(v) / static_cast<double>(n);
  if (n < 2) return r;
  std::vector<double> sq(n);
  for (size_t i = 0; i < n; ++i) {
    double d = v[i] - r.mean;
    sq[i] = d * d;
  }
  double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  r.se = var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
  return r;
}

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace regtune::mc
