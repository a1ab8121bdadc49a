// Command line front end. Subcommands: gen, solve, tune, bounds, experiment,
// verify. Every run writes manifest.json into the output directory.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regtune/acceptance.hpp"
#include "regtune/bounds.hpp"
#include "regtune/erm.hpp"
#include "regtune/errors.hpp"
#include "regtune/estimators.hpp"
#include "regtune/experiment.hpp"
#include "regtune/reduce.hpp"
#include "regtune/task_gen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regtune;

namespace {

struct Common {
  std::string config;
  uint64_t seed = 1;
  std::string out = "out";
  int workers = 0;
};

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return j;
}

GenTriple gen_from_json(const json& j) {
  GenTriple g;
  g.input.family =
      input_family_from_name(j.value("input_family", "GaussianEntries"));
  g.input.sigma_x = j.value("sigma_x", 1.0);
  g.input.d = j.value("d", 1);
  g.prior.family = prior_family_from_name(j.value("prior_family", "Gaussian"));
  g.prior.omega = j.value("omega", 1.0);
  g.prior.trace_normalized = j.value("trace_normalized", false);
  if (j.contains("prior_mean")) {
    std::vector<double> m = j.at("prior_mean").get<std::vector<double>>();
    if (static_cast<int>(m.size()) != g.input.d) {
      throw ConfigError("prior_mean length must equal d");
    }
    g.prior.mean = Eigen::Map<const Vector>(m.data(), m.size());
  } else {
    g.prior.mean = Vector::Zero(g.input.d);
  }
  g.noise.family = noise_family_from_name(j.value("noise_family", "Gaussian"));
  g.noise.sigma = j.value("noise_sigma", 0.0);
  return g;
}

Family family_from_string(const std::string& s) {
  if (s == "ridge") return Family::Ridge;
  if (s == "recentered_ridge") return Family::RecenteredRidge;
  if (s == "lasso") return Family::Lasso;
  if (s == "elastic_net") return Family::ElasticNet;
  throw ConfigError("unknown family: " + s);
}

SearchSpec search_from_json(const json& j) {
  SearchSpec s;
  s.lambda_min = j.value("lambda_min", 0.0);
  s.lambda_max = j.value("lambda_max", 0.0);
  s.grid_points = j.value("grid_points", 64);
  s.refine_rel_width = j.value("refine_rel_width", 1e-4);
  s.lambda1_min = j.value("lambda1_min", 1e-3);
  s.lambda1_max = j.value("lambda1_max", 0.0);
  if (j.contains("lambda2_grid")) {
    s.lambda2_grid = j.at("lambda2_grid").get<std::vector<double>>();
  }
  return s;
}

LossSpec loss_from_json(const json& j) {
  std::string kind = j.value("loss", "squared");
  if (kind == "squared") return LossSpec::squared();
  if (kind == "clipped_squared") return LossSpec::clipped(j.value("loss_cap", 1.0));
  throw ConfigError("unknown loss: " + kind);
}

void write_manifest(const Common& c, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["seed"] = c.seed;
  m["config"] = c.config;
  m["workers"] = mc::worker_count();
  m["outputs"] = outputs;
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / "manifest.json", std::ios::trunc);
  f << m.dump(2) << "\n";
}

int cmd_gen(const Common& c) {
  json j = load_config(c.config);
  GenTriple g = gen_from_json(j);
  int T = j.value("T", 10), n = j.value("n", 20), n_v = j.value("n_v", 10);
  if (T <= 0 || n <= 0 || n_v <= 0) throw ConfigError("T, n, n_v must be positive");
  ProblemInstance inst = sample_instance(g, T, n, n_v, c.seed);
  fs::create_directories(c.out);
  std::string fmt = j.value("format", "binary");
  std::vector<std::string> outs;
  if (fmt == "binary" || fmt == "both") {
    save_instance_binary((fs::path(c.out) / "instance.bin").string(), inst);
    outs.push_back("instance.bin");
  }
  if (fmt == "json" || fmt == "both") {
    save_instance_json((fs::path(c.out) / "instance.json").string(), inst);
    outs.push_back("instance.json");
  }
  if (outs.empty()) throw ConfigError("format must be binary, json, or both");
  write_manifest(c, "gen", outs);
  std::cout << "wrote " << outs.size() << " file(s) to " << c.out << "\n";
  return 0;
}

ProblemInstance load_instance_any(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return load_instance_json(path);
  }
  return load_instance_binary(path);
}

int cmd_solve(const Common& c) {
  json j = load_config(c.config);
  if (!j.contains("instance")) throw ConfigError("solve needs an instance path");
  ProblemInstance inst = load_instance_any(j.at("instance").get<std::string>());
  EstimatorSpec spec;
  std::string fam = j.value("family", "ridge");
  if (fam == "ridge") {
    spec = EstimatorSpec::ridge(j.value("lambda", 1.0));
  } else if (fam == "recentered_ridge") {
    Vector mu = Vector::Zero(inst.d);
    if (j.contains("mu")) {
      std::vector<double> m = j.at("mu").get<std::vector<double>>();
      if (static_cast<int>(m.size()) != inst.d) throw ConfigError("mu length != d");
      mu = Eigen::Map<const Vector>(m.data(), m.size());
    }
    spec = EstimatorSpec::recentered(j.value("lambda", 1.0), mu);
  } else if (fam == "lasso") {
    spec = EstimatorSpec::lasso(j.value("lambda1", 1.0));
  } else if (fam == "elastic_net") {
    spec = EstimatorSpec::elastic_net(j.value("lambda1", 1.0),
                                      j.value("lambda2", 1.0));
  } else {
    throw ConfigError("unknown family: " + fam);
  }
  json out = json::array();
  for (size_t t = 0; t < inst.tasks.size(); ++t) {
    SolveResult r = solve(inst.tasks[t].X, inst.tasks[t].y, spec);
    json jr;
    jr["task"] = t;
    jr["w_hat"] = std::vector<double>(r.w_hat.data(), r.w_hat.data() + r.w_hat.size());
    jr["active_set"] = r.active_set;
    jr["kkt_residual"] = r.kkt_residual;
    out.push_back(jr);
  }
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / "solutions.json", std::ios::trunc);
  f << out.dump(2) << "\n";
  write_manifest(c, "solve", {"solutions.json"});
  std::cout << "solved " << inst.tasks.size() << " task(s)\n";
  return 0;
}

int cmd_tune(const Common& c) {
  json j = load_config(c.config);
  Family fam = family_from_string(j.value("family", "ridge"));
  SearchSpec search = search_from_json(j);
  LossSpec loss = loss_from_json(j);
  ProblemInstance inst =
      j.contains("instance")
          ? load_instance_any(j.at("instance").get<std::string>())
          : sample_instance(gen_from_json(j), j.value("T", 100),
                            j.value("n", 24), j.value("n_v", 10), c.seed);
  TuneResult tr = tune_erm(inst, fam, search, loss);
  json out;
  out["family"] = j.value("family", "ridge");
  out["lambda_erm"] = fam == Family::Ridge || fam == Family::RecenteredRidge
                          ? tr.lambda_erm.lambda
                          : tr.lambda_erm.lambda1;
  if (fam == Family::ElasticNet) out["lambda2_erm"] = tr.lambda_erm.lambda2;
  out["loss_at_erm"] = tr.loss_at_erm;
  json grid = json::array();
  for (auto& [lam, lv] : tr.grid) grid.push_back({lam, lv});
  out["grid"] = grid;
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / "tune.json", std::ios::trunc);
  f << out.dump(2) << "\n";
  write_manifest(c, "tune", {"tune.json"});
  std::cout << "lambda_erm = " << out["lambda_erm"].dump()
            << ", validation loss " << tr.loss_at_erm << "\n";
  return 0;
}

int cmd_bounds(const Common& c) {
  json j = load_config(c.config);
  GenTriple g = gen_from_json(j);
  Family fam = family_from_string(j.value("family", "ridge"));
  BoundId id = j.contains("bound")
                   ? bound_id_from_name(j.at("bound").get<std::string>())
                   : bound_id_for_family(fam);
  SearchSpec search = search_from_json(j);
  int T = j.value("T", 100), n = j.value("n", 24), n_v = j.value("n_v", 10);
  double delta = j.value("delta", 0.05);
  int mc_reps = j.value("mc_reps", 200);
  BoundInputs bi = measure_bound_inputs(g, fam, search, T, n, n_v, delta,
                                        mc_reps, c.seed,
                                        j.value("pilot_T_cap", 400));
  BoundReport br = eval_bound(id, bi);
  json out;
  out["bound"] = bound_id_name(id);
  out["total"] = br.total;
  json terms;
  for (auto& [name, val] : br.terms) terms[name] = val;
  out["terms"] = terms;
  out["inputs"] = {{"T", bi.T},       {"n", bi.n},
                   {"n_v", bi.n_v},   {"d", bi.d},
                   {"delta", bi.delta}, {"L", bi.L},
                   {"M", bi.M},       {"Lambda_DT", bi.Lambda_DT}};
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / "bounds.json", std::ios::trunc);
  f << out.dump(2) << "\n";
  write_manifest(c, "bounds", {"bounds.json"});
  std::cout << bound_id_name(id) << " total = " << br.total << "\n";
  return 0;
}

int cmd_experiment(const Common& c) {
  json j = load_config(c.config);
  SweepSpec spec;
  spec.axis = axis_from_name(j.value("axis", "T"));
  if (!j.contains("grid")) throw ConfigError("experiment needs a grid");
  spec.grid = j.at("grid").get<std::vector<double>>();
  spec.gen = gen_from_json(j);
  spec.family = family_from_string(j.value("family", "ridge"));
  spec.search = search_from_json(j);
  spec.loss = loss_from_json(j);
  spec.T = j.value("T", 100);
  spec.n = j.value("n", 24);
  spec.n_v = j.value("n_v", 10);
  spec.replicates = j.value("replicates", 50);
  spec.T_oracle = j.value("T_oracle", 20000);
  spec.delta = j.value("delta", 0.05);
  spec.with_bounds = j.value("with_bounds", false);
  spec.bound_mc_reps = j.value("bound_mc_reps", 200);
  spec.seed = c.seed;
  spec.progress = [](size_t done, size_t total) {
    std::cerr << "point " << done << "/" << total << "\n";
  };
  ExperimentResult r = run_sweep(spec);
  fs::create_directories(c.out);
  write_sweep_csv((fs::path(c.out) / "sweep.csv").string(), spec.axis, r);
  write_sweep_json((fs::path(c.out) / "sweep.json").string(), spec.axis, r);
  write_sweep_svg((fs::path(c.out) / "sweep.svg").string(), spec.axis, r);
  write_manifest(c, "experiment", {"sweep.csv", "sweep.json", "sweep.svg"});
  std::cout << "slope = " << r.fit.slope << " (CI [" << r.fit.ci_lo << ", "
            << r.fit.ci_hi << "])\n";
  return 0;
}

int cmd_verify(const Common& c) {
  bool ok = verify_determinism(c.seed, c.out, std::cout);
  write_manifest(c, "verify", {"determinism outputs under run1/ and run2/"});
  std::cout << (ok ? "deterministic: reruns byte-identical\n"
                   : "NOT deterministic: outputs differ\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regularization tuning toolkit"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", c.config, "JSON config path");
    if (need_config) opt->required();
    sub->add_option("--seed", c.seed, "master RNG seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--workers", c.workers, "worker thread count (0 = default)");
  };

  CLI::App* gen = app.add_subcommand("gen", "sample a task collection");
  CLI::App* solve = app.add_subcommand("solve", "solve tasks at fixed hyperparameters");
  CLI::App* tune = app.add_subcommand("tune", "cross-task hyperparameter tuning");
  CLI::App* bounds = app.add_subcommand("bounds", "evaluate an excess-risk bound");
  CLI::App* experiment = app.add_subcommand("experiment", "scaling sweep");
  CLI::App* verify = app.add_subcommand("verify", "rerun pipeline twice, compare bytes");
  for (CLI::App* sub : {gen, solve, tune, bounds, experiment}) {
    add_common(sub, true);
  }
  add_common(verify, false);

  CLI11_PARSE(app, argc, argv);

  if (c.workers > 0) mc::set_worker_count(c.workers);

  try {
    if (gen->parsed()) return cmd_gen(c);
    if (solve->parsed()) return cmd_solve(c);
    if (tune->parsed()) return cmd_tune(c);
    if (bounds->parsed()) return cmd_bounds(c);
    if (experiment->parsed()) return cmd_experiment(c);
    if (verify->parsed()) return cmd_verify(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
