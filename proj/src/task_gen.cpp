#include "regtune/task_gen.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "regtune/errors.hpp"

namespace regtune {

using nlohmann::json;

namespace {

// Substream block tags within one task.
enum Block : uint64_t { kX = 0, kWstar = 1, kEps = 2, kXv = 3, kEpsV = 4 };

double draw_entry(const InputDist& in, Rng& rng) {
  double d = static_cast<double>(in.d);
  switch (in.family) {
    case InputFamily::UniformEntries: {
      double a = in.sigma_x * std::sqrt(3.0 / d);
      return rng.uniform(-a, a);
    }
    case InputFamily::GaussianEntries:
      return in.sigma_x / std::sqrt(d) * rng.gaussian();
    case InputFamily::RademacherEntries:
      return in.sigma_x / std::sqrt(d) * static_cast<double>(rng.rademacher());
    case InputFamily::BoundedDensityCustom: {
      // Triangular on [-a, a]; variance a^2/6 matches sigma_x^2/d.
      double a = in.sigma_x * std::sqrt(6.0 / d);
      return a * (rng.uniform() + rng.uniform() - 1.0);
    }
  }
  throw ConfigError("unknown input family");
}

Matrix draw_matrix(const InputDist& in, int rows, int cols, Rng& rng) {
  Matrix X(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) X(i, j) = draw_entry(in, rng);
  }
  return X;
}

Vector draw_wstar(const PriorSpec& prior, int d, Rng& rng) {
  Vector mean = prior.mean.size() ? prior.mean : Vector::Zero(d);
  if (mean.size() != d) throw ConfigError("prior mean has wrong dimension");
  switch (prior.family) {
    case PriorFamily::PointMass:
      return mean;
    case PriorFamily::Gaussian: {
      double scale = prior.trace_normalized
                         ? prior.omega / std::sqrt(static_cast<double>(d))
                         : prior.omega;
      Vector w(d);
      for (int i = 0; i < d; ++i) w(i) = mean(i) + scale * rng.gaussian();
      return w;
    }
    case PriorFamily::UniformBall: {
      Vector g(d);
      for (int i = 0; i < d; ++i) g(i) = rng.gaussian();
      double norm = g.norm();
      if (norm == 0.0) return mean;
      double radius =
          std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) * prior.omega;
      return mean + (radius / norm) * g;
    }
  }
  throw ConfigError("unknown prior family");
}

Vector draw_noise(const NoiseSpec& noise, int n, Rng& rng) {
  Vector e(n);
  switch (noise.family) {
    case NoiseFamily::Gaussian:
      for (int i = 0; i < n; ++i) e(i) = noise.sigma * rng.gaussian();
      return e;
    case NoiseFamily::Uniform: {
      double a = noise.sigma * std::sqrt(3.0);
      for (int i = 0; i < n; ++i) e(i) = rng.uniform(-a, a);
      return e;
    }
  }
  throw ConfigError("unknown noise family");
}

}  // namespace

Task sample_task(const GenTriple& gen, int n, int n_v, uint64_t seed,
                 uint64_t task_index) {
  int d = gen.input.d;
  Task t;
  {
    Rng rng = Rng::keyed(seed, task_index, kX);
    t.X = draw_matrix(gen.input, d, n, rng);
  }
  {
    Rng rng = Rng::keyed(seed, task_index, kWstar);
    t.w_star = draw_wstar(gen.prior, d, rng);
  }
  {
    Rng rng = Rng::keyed(seed, task_index, kEps);
    t.noise_train = draw_noise(gen.noise, n, rng);
  }
  {
    Rng rng = Rng::keyed(seed, task_index, kXv);
    t.X_v = draw_matrix(gen.input, d, n_v, rng);
  }
  {
    Rng rng = Rng::keyed(seed, task_index, kEpsV);
    t.noise_val = draw_noise(gen.noise, n_v, rng);
  }
  Vector mean_train = t.X.transpose() * (*t.w_star);
  Vector mean_val = t.X_v.transpose() * (*t.w_star);
  t.y = mean_train + t.noise_train;
  t.y_v = mean_val + t.noise_val;
  return t;
}

Matrix sample_inputs(const InputDist& input, int n, uint64_t seed,
                     uint64_t task_index) {
  Rng rng = Rng::keyed(seed, task_index, kX);
  return draw_matrix(input, input.d, n, rng);
}

ProblemInstance sample_instance(const GenTriple& gen, int T, int n, int n_v,
                                uint64_t seed) {
  if (T < 1 || n < 1 || n_v < 1) throw ConfigError("T, n, n_v must be >= 1");
  ProblemInstance inst;
  inst.d = gen.input.d;
  inst.n = n;
  inst.n_v = n_v;
  inst.seed = seed;
  inst.gen = gen;
  inst.tasks.reserve(T);
  for (int t = 0; t < T; ++t) {
    inst.tasks.push_back(sample_task(gen, n, n_v, seed, static_cast<uint64_t>(t)));
  }
  return inst;
}

ProblemInstance sample_instance(const InputDist& input, const PriorSpec& prior,
                                const NoiseSpec& noise, int T, int n, int n_v,
                                uint64_t seed) {
  return sample_instance(GenTriple{input, prior, noise}, T, n, n_v, seed);
}

EmpiricalConstants empirical_constants(const ProblemInstance& inst,
                                       int extra_validation_samples,
                                       uint64_t seed) {
  if (inst.tasks.empty()) throw ConfigError("empty instance");
  EmpiricalConstants c;
  double sum_xv = 0, sum_xv_sq = 0;
  double sum_y_over = 0, sum_ysq_over = 0, sum_ws = 0;
  long xv_count = 0;
  bool have_ws = true;
  double trace_sum = 0;

  for (const Task& t : inst.tasks) {
    double m = (t.X * t.y).norm();
    c.M = std::max(c.M, m);
    Matrix G = gram(t.X);
    trace_sum += G.trace();
    double V = smallest_nonzero_eig(G);
    double ynorm = t.y.norm();
    c.M_tilde = std::max(c.M_tilde, ynorm / std::sqrt(V));
    sum_y_over += ynorm / std::sqrt(V);
    sum_ysq_over += ynorm * ynorm / V;
    for (int j = 0; j < t.X_v.cols(); ++j) {
      double nv = t.X_v.col(j).norm();
      c.b_v = std::max(c.b_v, nv);
      sum_xv += nv;
      sum_xv_sq += nv * nv;
      ++xv_count;
    }
    if (t.w_star) {
      sum_ws += t.w_star->norm() + t.noise_train.norm() / std::sqrt(V);
    } else {
      have_ws = false;
    }
  }

  if (extra_validation_samples > 0) {
    Rng rng = Rng::keyed(seed, 0x66726573ULL, 0);  // fresh validation columns
    for (int i = 0; i < extra_validation_samples; ++i) {
      Vector x(inst.d);
      for (int k = 0; k < inst.d; ++k) x(k) = draw_entry(inst.gen.input, rng);
      double nv = x.norm();
      sum_xv += nv;
      sum_xv_sq += nv * nv;
      ++xv_count;
    }
  }

  double T = static_cast<double>(inst.tasks.size());
  c.E_norm_xv = sum_xv / static_cast<double>(xv_count);
  c.E_norm_xv_sq = sum_xv_sq / static_cast<double>(xv_count);
  c.E_y_over_sqrtV = sum_y_over / T;
  c.E_ysq_over_V = sum_ysq_over / T;
  c.E_ws_plus_noise = have_ws ? sum_ws / T : 0.0;

  // Empirical loss bound: max per-example squared validation loss of the
  // ridge solution over a wide log grid of lambda.
  double scale = trace_sum / T / static_cast<double>(inst.d);
  if (scale <= 0) scale = 1.0;
  const int kGrid = 16;
  for (const Task& t : inst.tasks) {
    Matrix G = gram(t.X);
    EigPair ep = eig_sym(G);
    Vector cvec = ep.U.transpose() * (t.X * t.y);
    Matrix P = t.X_v.transpose() * ep.U;
    for (int g = 0; g < kGrid; ++g) {
      double lam = scale * std::pow(10.0, -6.0 + 12.0 * g / (kGrid - 1.0));
      Vector coef = cvec.array() / (ep.e.array() + lam);
      Vector pred = P * coef;
      for (int i = 0; i < pred.size(); ++i) {
        double diff = pred(i) - t.y_v(i);
        c.C_hat = std::max(c.C_hat, diff * diff);
      }
    }
  }
  c.L_hat = 2.0 * std::sqrt(c.C_hat);
  return c;
}

// --- names ---

std::string input_family_name(InputFamily f) {
  switch (f) {
    case InputFamily::UniformEntries: return "UniformEntries";
    case InputFamily::GaussianEntries: return "GaussianEntries";
    case InputFamily::RademacherEntries: return "RademacherEntries";
    case InputFamily::BoundedDensityCustom: return "BoundedDensityCustom";
  }
  return "?";
}

InputFamily input_family_from_name(const std::string& s) {
  if (s == "UniformEntries") return InputFamily::UniformEntries;
  if (s == "GaussianEntries") return InputFamily::GaussianEntries;
  if (s == "RademacherEntries") return InputFamily::RademacherEntries;
  if (s == "BoundedDensityCustom") return InputFamily::BoundedDensityCustom;
  throw ConfigError("unknown input family: " + s);
}

std::string prior_family_name(PriorFamily f) {
  switch (f) {
    case PriorFamily::Gaussian: return "Gaussian";
    case PriorFamily::PointMass: return "PointMass";
    case PriorFamily::UniformBall: return "UniformBall";
  }
  return "?";
}

PriorFamily prior_family_from_name(const std::string& s) {
  if (s == "Gaussian") return PriorFamily::Gaussian;
  if (s == "PointMass") return PriorFamily::PointMass;
  if (s == "UniformBall") return PriorFamily::UniformBall;
  throw ConfigError("unknown prior family: " + s);
}

std::string noise_family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Gaussian: return "Gaussian";
    case NoiseFamily::Uniform: return "Uniform";
  }
  return "?";
}

NoiseFamily noise_family_from_name(const std::string& s) {
  if (s == "Gaussian") return NoiseFamily::Gaussian;
  if (s == "Uniform") return NoiseFamily::Uniform;
  throw ConfigError("unknown noise family: " + s);
}

// --- binary container ---

namespace {

constexpr char kMagic[8] = {'R', 'T', 'I', 'N', '0', '0', '0', '1'};

void put_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw Error("truncated instance file");
}

void put_i64(std::ostream& os, int64_t v) { put_bytes(os, &v, 8); }
void put_u64(std::ostream& os, uint64_t v) { put_bytes(os, &v, 8); }
void put_f64(std::ostream& os, double v) { put_bytes(os, &v, 8); }
int64_t get_i64(std::istream& is) { int64_t v; get_bytes(is, &v, 8); return v; }
uint64_t get_u64(std::istream& is) { uint64_t v; get_bytes(is, &v, 8); return v; }
double get_f64(std::istream& is) { double v; get_bytes(is, &v, 8); return v; }

void put_vec(std::ostream& os, const Vector& v) {
  put_i64(os, v.size());
  put_bytes(os, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
}

Vector get_vec(std::istream& is) {
  int64_t n = get_i64(is);
  Vector v(n);
  get_bytes(is, v.data(), sizeof(double) * static_cast<size_t>(n));
  return v;
}

void put_mat(std::ostream& os, const Matrix& m) {
  put_i64(os, m.rows());
  put_i64(os, m.cols());
  put_bytes(os, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
}

Matrix get_mat(std::istream& is) {
  int64_t r = get_i64(is);
  int64_t c = get_i64(is);
  Matrix m(r, c);
  get_bytes(is, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
  return m;
}

}  // namespace

void save_instance_binary(const std::string& path, const ProblemInstance& inst) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for write: " + path);
  put_bytes(os, kMagic, 8);
  put_i64(os, inst.d);
  put_i64(os, inst.n);
  put_i64(os, inst.n_v);
  put_i64(os, static_cast<int64_t>(inst.tasks.size()));
  put_u64(os, inst.seed);
  put_i64(os, static_cast<int64_t>(inst.gen.input.family));
  put_f64(os, inst.gen.input.sigma_x);
  put_i64(os, static_cast<int64_t>(inst.gen.prior.family));
  put_f64(os, inst.gen.prior.omega);
  put_i64(os, inst.gen.prior.trace_normalized ? 1 : 0);
  put_vec(os, inst.gen.prior.mean.size() ? inst.gen.prior.mean
                                         : Vector::Zero(inst.d).eval());
  put_i64(os, static_cast<int64_t>(inst.gen.noise.family));
  put_f64(os, inst.gen.noise.sigma);
  for (const Task& t : inst.tasks) {
    put_mat(os, t.X);
    put_vec(os, t.y);
    put_vec(os, t.noise_train);
    put_mat(os, t.X_v);
    put_vec(os, t.y_v);
    put_vec(os, t.noise_val);
    put_i64(os, t.w_star ? 1 : 0);
    if (t.w_star) put_vec(os, *t.w_star);
  }
  if (!os) throw Error("write failed: " + path);
}

ProblemInstance load_instance_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  char magic[8];
  get_bytes(is, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw Error("bad instance file magic");
  ProblemInstance inst;
  inst.d = static_cast<int>(get_i64(is));
  inst.n = static_cast<int>(get_i64(is));
  inst.n_v = static_cast<int>(get_i64(is));
  int64_t T = get_i64(is);
  inst.seed = get_u64(is);
  inst.gen.input.family = static_cast<InputFamily>(get_i64(is));
  inst.gen.input.sigma_x = get_f64(is);
  inst.gen.input.d = inst.d;
  inst.gen.prior.family = static_cast<PriorFamily>(get_i64(is));
  inst.gen.prior.omega = get_f64(is);
  inst.gen.prior.trace_normalized = get_i64(is) != 0;
  inst.gen.prior.mean = get_vec(is);
  inst.gen.noise.family = static_cast<NoiseFamily>(get_i64(is));
  inst.gen.noise.sigma = get_f64(is);
  inst.tasks.reserve(static_cast<size_t>(T));
  for (int64_t t = 0; t < T; ++t) {
    Task task;
    task.X = get_mat(is);
    task.y = get_vec(is);
    task.noise_train = get_vec(is);
    task.X_v = get_mat(is);
    task.y_v = get_vec(is);
    task.noise_val = get_vec(is);
    if (get_i64(is)) task.w_star = get_vec(is);
    inst.tasks.push_back(std::move(task));
  }
  return inst;
}

// --- JSON container ---

namespace {

json mat_to_json(const Matrix& m) {
  json cols = json::array();
  for (int j = 0; j < m.cols(); ++j) {
    json col = json::array();
    for (int i = 0; i < m.rows(); ++i) col.push_back(m(i, j));
    cols.push_back(std::move(col));
  }
  return cols;
}

Matrix mat_from_json(const json& j, int rows) {
  int cols = static_cast<int>(j.size());
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = j.at(c).at(r).get<double>();
  }
  return m;
}

json vec_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vec_from_json(const json& j) {
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

}  // namespace

void save_instance_json(const std::string& path, const ProblemInstance& inst) {
  json j;
  j["d"] = inst.d;
  j["n"] = inst.n;
  j["n_v"] = inst.n_v;
  j["T"] = inst.tasks.size();
  j["seed"] = inst.seed;
  j["input"] = {{"family", input_family_name(inst.gen.input.family)},
                {"sigma_x", inst.gen.input.sigma_x}};
  j["prior"] = {{"family", prior_family_name(inst.gen.prior.family)},
                {"omega", inst.gen.prior.omega},
                {"trace_normalized", inst.gen.prior.trace_normalized},
                {"mean", vec_to_json(inst.gen.prior.mean.size()
                                         ? inst.gen.prior.mean
                                         : Vector::Zero(inst.d).eval())}};
  j["noise"] = {{"family", noise_family_name(inst.gen.noise.family)},
                {"sigma", inst.gen.noise.sigma}};
  json tasks = json::array();
  for (const Task& t : inst.tasks) {
    json jt;
    jt["X"] = mat_to_json(t.X);
    jt["y"] = vec_to_json(t.y);
    jt["noise_train"] = vec_to_json(t.noise_train);
    jt["X_v"] = mat_to_json(t.X_v);
    jt["y_v"] = vec_to_json(t.y_v);
    jt["noise_val"] = vec_to_json(t.noise_val);
    if (t.w_star) jt["w_star"] = vec_to_json(*t.w_star);
    tasks.push_back(std::move(jt));
  }
  j["tasks"] = std::move(tasks);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open for write: " + path);
  os << j.dump(2) << "\n";
}

ProblemInstance load_instance_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path);
  json j = json::parse(is);
  ProblemInstance inst;
  inst.d = j.at("d").get<int>();
  inst.n = j.at("n").get<int>();
  inst.n_v = j.at("n_v").get<int>();
  inst.seed = j.at("seed").get<uint64_t>();
  inst.gen.input.family =
      input_family_from_name(j.at("input").at("family").get<std::string>());
  inst.gen.input.sigma_x = j.at("input").at("sigma_x").get<double>();
  inst.gen.input.d = inst.d;
  inst.gen.prior.family =
      prior_family_from_name(j.at("prior").at("family").get<std::string>());
  inst.gen.prior.omega = j.at("prior").at("omega").get<double>();
  inst.gen.prior.trace_normalized =
      j.at("prior").at("trace_normalized").get<bool>();
  inst.gen.prior.mean = vec_from_json(j.at("prior").at("mean"));
  inst.gen.noise.family =
      noise_family_from_name(j.at("noise").at("family").get<std::string>());
  inst.gen.noise.sigma = j.at("noise").at("sigma").get<double>();
  for (const json& jt : j.at("tasks")) {
    Task t;
    t.X = mat_from_json(jt.at("X"), inst.d);
    t.y = vec_from_json(jt.at("y"));
    t.noise_train = vec_from_json(jt.at("noise_train"));
    t.X_v = mat_from_json(jt.at("X_v"), inst.d);
    t.y_v = vec_from_json(jt.at("y_v"));
    t.noise_val = vec_from_json(jt.at("noise_val"));
    if (jt.contains("w_star")) t.w_star = vec_from_json(jt.at("w_star"));
    inst.tasks.push_back(std::move(t));
  }
  return inst;
}

}  // namespace regtune
