// Compares the OpenMP map against the serial reference on a ridge-tuning
// style workload and checks the outputs are byte-identical.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "regtune/erm.hpp"
#include "regtune/reduce.hpp"
#include "regtune/task_gen.hpp"

using namespace regtune;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
  int T = argc > 1 ? std::atoi(argv[1]) : 256;
  GenTriple gen;
  gen.input = {InputFamily::GaussianEntries, 1.0, 16};
  gen.prior.mean = Vector::Zero(16);
  gen.prior.omega = 1.0;
  gen.noise.sigma = 0.5;

  auto work = [&](size_t t) {
    Task task = sample_task(gen, 64, 16, 42, t);
    ProblemInstance inst;
    inst.tasks.push_back(task);
    inst.d = 16;
    inst.n = 64;
    inst.n_v = 16;
    inst.gen = gen;
    TuneResult tr = tune_erm(inst, Family::Ridge, SearchSpec{}, LossSpec::squared());
    return tr.loss_at_erm;
  };

  auto t0 = Clock::now();
  std::vector<double> serial = mc::map_indexed_serial(T, work);
  double s_serial = std::chrono::duration<double>(Clock::now() - t0).count();

  auto t1 = Clock::now();
  std::vector<double> parallel = mc::map_indexed_parallel(T, work);
  double s_parallel = std::chrono::duration<double>(Clock::now() - t1).count();

  bool identical =
      serial.size() == parallel.size() &&
      std::memcmp(serial.data(), parallel.data(),
                  serial.size() * sizeof(double)) == 0;

  std::printf("tasks:      %d\n", T);
  std::printf("workers:    %d\n", mc::worker_count());
  std::printf("serial:     %.3f s\n", s_serial);
  std::printf("parallel:   %.3f s\n", s_parallel);
  std::printf("speedup:    %.2fx\n", s_serial / s_parallel);
  std::printf("bit-equal:  %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
