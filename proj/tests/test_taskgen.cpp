#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "regtune/task_gen.hpp"

using namespace regtune;

namespace {

GenTriple basic_gen(int d) {
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, d};
  g.prior.mean = Vector::Zero(d);
  g.prior.omega = 1.0;
  g.noise.sigma = 0.5;
  return g;
}

bool same_bytes(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_bytes(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("noiseless point-mass prior gives exact linear responses") {
  GenTriple g;
  g.input = {InputFamily::UniformEntries, 1.0, 3};
  Vector w0(3);
  w0 << 1, -2, 0.5;
  g.prior.mean = w0;
  g.prior.family = PriorFamily::PointMass;
  g.noise.sigma = 0.0;
  ProblemInstance inst = sample_instance(g, 5, 8, 4, 99);
  for (const Task& t : inst.tasks) {
    CHECK((t.y - t.X.transpose() * w0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((t.y_v - t.X_v.transpose() * w0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("uniform entries have unit expected squared norm") {
  InputDist input{InputFamily::UniformEntries, 1.0, 4};
  Matrix X = sample_inputs(input, 100000, 7, 0);
  double mean_sq = X.colwise().squaredNorm().mean();
  CHECK(mean_sq == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gaussian entries hit the target per-coordinate variance") {
  InputDist input{InputFamily::GaussianEntries, std::sqrt(2.0), 2};
  Matrix X = sample_inputs(input, 100000, 8, 0);
  for (int i = 0; i < 2; ++i) {
    double var = X.row(i).squaredNorm() / X.cols();
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("covariance is isotropic for every input family") {
  for (InputFamily fam :
       {InputFamily::UniformEntries, InputFamily::GaussianEntries,
        InputFamily::RademacherEntries, InputFamily::BoundedDensityCustom}) {
    InputDist input{fam, 1.3, 3};
    Matrix X = sample_inputs(input, 100000, 9, 0);
    Matrix cov = (X * X.transpose()) / X.cols();
    Matrix target = (1.3 * 1.3 / 3.0) * Matrix::Identity(3, 3);
    CHECK((cov - target).norm() / target.norm() <= 0.03);
  }
}

TEST_CASE("scalar instance constants") {
  Task t;
  t.X = Matrix(1, 1);
  t.X << 1;
  t.y = Vector(1);
  t.y << 2;
  t.X_v = Matrix(1, 1);
  t.X_v << 1;
  t.y_v = Vector(1);
  t.y_v << 0;
  ProblemInstance inst;
  inst.tasks.push_back(t);
  inst.d = inst.n = inst.n_v = 1;
  inst.gen.input.d = 1;
  EmpiricalConstants ec = empirical_constants(inst);
  CHECK(ec.M == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ec.M_tilde == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ec.b_v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("max statistics are unchanged under task duplication") {
  GenTriple g = basic_gen(3);
  ProblemInstance inst = sample_instance(g, 4, 10, 5, 21);
  ProblemInstance dup = inst;
  for (int k = 0; k < 3; ++k) {
    dup.tasks.insert(dup.tasks.end(), inst.tasks.begin(), inst.tasks.end());
  }
  EmpiricalConstants a = empirical_constants(inst);
  EmpiricalConstants b = empirical_constants(dup);
  CHECK(a.M == b.M);
  CHECK(a.b_v == b.b_v);
  CHECK(a.M_tilde == b.M_tilde);
}

TEST_CASE("M matches an exhaustive scan") {
  GenTriple g = basic_gen(4);
  ProblemInstance inst = sample_instance(g, 7, 12, 4, 22);
  double m = 0;
  for (const Task& t : inst.tasks) m = std::max(m, (t.X * t.y).norm());
  CHECK(empirical_constants(inst).M == m);
}

TEST_CASE("same seed reproduces the instance bit for bit") {
  GenTriple g = basic_gen(5);
  ProblemInstance a = sample_instance(g, 6, 9, 3, 1234);
  ProblemInstance b = sample_instance(g, 6, 9, 3, 1234);
  for (size_t t = 0; t < a.tasks.size(); ++t) {
    CHECK(same_bytes(a.tasks[t].X, b.tasks[t].X));
    CHECK(same_bytes(a.tasks[t].y, b.tasks[t].y));
    CHECK(same_bytes(a.tasks[t].X_v, b.tasks[t].X_v));
    CHECK(same_bytes(a.tasks[t].y_v, b.tasks[t].y_v));
  }
}

TEST_CASE("stored noise reproduces the responses exactly") {
  GenTriple g = basic_gen(4);
  ProblemInstance inst = sample_instance(g, 5, 8, 3, 23);
  for (const Task& t : inst.tasks) {
    REQUIRE(t.w_star.has_value());
    Vector mean_train = t.X.transpose() * *t.w_star;
    Vector mean_val = t.X_v.transpose() * *t.w_star;
    CHECK((t.y - (mean_train + t.noise_train)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((t.y_v - (mean_val + t.noise_val)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("growing T keeps the leading tasks") {
  GenTriple g = basic_gen(3);
  ProblemInstance small = sample_instance(g, 10, 6, 2, 77);
  ProblemInstance large = sample_instance(g, 20, 6, 2, 77);
  for (int t = 0; t < 10; ++t) {
    CHECK(same_bytes(small.tasks[t].X, large.tasks[t].X));
    CHECK(same_bytes(small.tasks[t].y, large.tasks[t].y));
  }
}

TEST_CASE("sample_inputs agrees with the full task draw") {
  GenTriple g = basic_gen(4);
  Task t = sample_task(g, 9, 3, 55, 2);
  Matrix X = sample_inputs(g.input, 9, 55, 2);
  CHECK(same_bytes(t.X, X));
}

TEST_CASE("binary container round-trips bit exactly") {
  namespace fs = std::filesystem;
  GenTriple g = basic_gen(3);
  ProblemInstance inst = sample_instance(g, 4, 7, 3, 31);
  fs::path p = fs::temp_directory_path() / "regtune_test_inst.bin";
  save_instance_binary(p.string(), inst);
  ProblemInstance back = load_instance_binary(p.string());
  CHECK(back.d == inst.d);
  CHECK(back.seed == inst.seed);
  REQUIRE(back.tasks.size() == inst.tasks.size());
  for (size_t t = 0; t < inst.tasks.size(); ++t) {
    CHECK(same_bytes(inst.tasks[t].X, back.tasks[t].X));
    CHECK(same_bytes(inst.tasks[t].y, back.tasks[t].y));
    CHECK(same_bytes(inst.tasks[t].X_v, back.tasks[t].X_v));
    CHECK(same_bytes(inst.tasks[t].y_v, back.tasks[t].y_v));
  }
  fs::remove(p);
}

TEST_CASE("json container round-trips") {
  namespace fs = std::filesystem;
  GenTriple g = basic_gen(2);
  ProblemInstance inst = sample_instance(g, 3, 5, 2, 32);
  fs::path p = fs::temp_directory_path() / "regtune_test_inst.json";
  save_instance_json(p.string(), inst);
  ProblemInstance back = load_instance_json(p.string());
  REQUIRE(back.tasks.size() == inst.tasks.size());
  for (size_t t = 0; t < inst.tasks.size(); ++t) {
    CHECK((inst.tasks[t].X - back.tasks[t].X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.tasks[t].y - back.tasks[t].y).cwiseAbs().maxCoeff() == 0.0);
  }
  fs::remove(p);
}

TEST_CASE("family names round-trip") {
  for (InputFamily f :
       {InputFamily::UniformEntries, InputFamily::GaussianEntries,
        InputFamily::RademacherEntries, InputFamily::BoundedDensityCustom}) {
    CHECK(input_family_from_name(input_family_name(f)) == f);
  }
  for (PriorFamily f : {PriorFamily::Gaussian, PriorFamily::PointMass,
                        PriorFamily::UniformBall}) {
    CHECK(prior_family_from_name(prior_family_name(f)) == f);
  }
}
