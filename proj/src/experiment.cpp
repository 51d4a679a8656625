#include "mcae/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "mcae/blob_io.hpp"
#include "mcae/heat.hpp"
#include "mcae/navier_stokes.hpp"
#include "mcae/parallel.hpp"

namespace mcae {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<int> draw_without_replacement(std::vector<int> pool, int count,
                                          CounterRng rng) {
  if (count > static_cast<int>(pool.size())) {
    throw ConfigError("not enough candidate observation sites");
  }
  std::vector<int> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(rng.uniform() * pool.size());
    const auto at = std::min(idx, pool.size() - 1);
    out.push_back(pool[at]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<int> choose_observation_sites(const ExperimentConfig& cfg) {
  CounterRng rng(cfg.seeds.obs);
  if (cfg.problem == "heat") {
    return draw_without_replacement(
        HeatModel::interior_nodes(cfg.heat.nx, cfg.heat.ny), cfg.heat.num_obs,
        rng);
  }
  if (cfg.problem == "ns") {
    std::vector<int> pool(cfg.ns.grid * cfg.ns.grid);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = int(i);
    return draw_without_replacement(pool, cfg.ns.num_obs, rng);
  }
  throw ConfigError("choose_observation_sites: problem has no grid");
}

std::unique_ptr<ForwardModel> make_forward_model(
    const ExperimentConfig& cfg, const std::vector<int>& obs_indices) {
  if (cfg.problem == "heat") {
    return std::make_unique<HeatModel>(cfg.heat.nx, cfg.heat.ny, obs_indices,
                                       cfg.heat.source);
  }
  if (cfg.problem == "ns") {
    return std::make_unique<NSModel>(cfg.ns.grid, cfg.ns.nu, cfg.ns.dt,
                                     cfg.ns.steps, obs_indices);
  }
  throw ConfigError("make_forward_model: problem must be heat or ns");
}

Dataset generate_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.problem = cfg.problem;
  ds.delta = cfg.delta;
  ds.seeds = cfg.seeds;
  ds.obs_indices = choose_observation_sites(cfg);

  if (cfg.problem == "heat") {
    GridDesc grid{cfg.heat.nx, cfg.heat.ny, 1.0 / (cfg.heat.nx - 1),
                  1.0 / (cfg.heat.ny - 1), false, 1.0};
    ds.basis = build_heat_kl(grid, cfg.heat.q, {cfg.heat.corr_length, 1.0});
  } else if (cfg.problem == "ns") {
    ds.basis = build_ns_kl(cfg.ns.grid, cfg.ns.q);
  } else {
    throw ConfigError("generate_dataset: problem must be heat or ns");
  }
  ds.kl_hash = kl_basis_hash(ds.basis);

  auto fm = make_forward_model(cfg, ds.obs_indices);
  const int n = fm->param_dim();
  const int m = fm->obs_dim();

  auto draw_block = [&](std::uint64_t seed, int count, Mat& U, Mat& Yc) {
    U = Mat(n, count);
    Yc = Mat(m, count);
    CounterRng rng(seed);
    for (int i = 0; i < count; ++i) {
      CounterRng si = rng.stream(i);
      U.col(i) = sample_field(ds.basis, si);
    }
    parallel_for(count, [&](int i) {
      Yc.col(i) = fm->apply_observed(U.col(i));
    });
  };

  const int n_train = 100;  // the pool; case I picks one column
  draw_block(cfg.seeds.train, n_train, ds.U_train, ds.Yc_train);
  draw_block(cfg.seeds.test, cfg.n_test, ds.U_test, ds.Yc_test);

  CounterRng noise(cfg.seeds.noise);
  ds.Y_train = Mat(m, n_train);
  for (int i = 0; i < n_train; ++i) {
    CounterRng si = noise.stream(0).stream(i);
    ds.Y_train.col(i) = corrupt(ds.Yc_train.col(i), cfg.delta, si);
  }
  ds.Y_test = Mat(m, cfg.n_test);
  for (int i = 0; i < cfg.n_test; ++i) {
    CounterRng si = noise.stream(1).stream(i);
    ds.Y_test.col(i) = corrupt(ds.Yc_test.col(i), cfg.delta, si);
  }
  return ds;
}

TrainData make_train_data(const ExperimentConfig& cfg, const Dataset& ds,
                          int sample_index) {
  TrainData data;
  data.u0 = Vec::Zero(ds.n());
  if (cfg.n_train == 1) {
    if (sample_index < 0 || sample_index >= ds.U_train.cols()) {
      throw ConfigError("make_train_data: sample index out of range");
    }
    data.U = ds.U_train.col(sample_index).replicate(1, cfg.replicate);
    data.Y = ds.Y_train.col(sample_index).replicate(1, cfg.replicate);
  } else {
    data.U = ds.U_train;
    data.Y = ds.Y_train;
  }
  return data;
}

TrainSpec encoder_spec(const ExperimentConfig& cfg) {
  TrainSpec spec;
  spec.approach = approach_from_string(cfg.approach);
  spec.phase = Phase::encoder;
  spec.lambda = cfg.lambda;
  spec.epsilon = approach_randomizes(spec.approach) ? cfg.epsilon : 0.0;
  spec.epochs = cfg.epochs_encoder;
  spec.lr = cfg.lr;
  spec.seed = cfg.seeds.net;
  spec.hidden = cfg.width;
  spec.eval_every = cfg.eval_every;
  spec.plateau_epochs = cfg.plateau_epochs;
  return spec;
}

TrainSpec decoder_spec(const ExperimentConfig& cfg) {
  TrainSpec spec = encoder_spec(cfg);
  spec.phase = Phase::decoder;
  spec.epochs = cfg.epochs_decoder;
  return spec;
}

MapEval evaluate_surrogates(Approach a, const ShallowNet& enc,
                            const ShallowNet& dec, const Dataset& ds,
                            const ForwardModel& fm) {
  const bool pto_first = (a == Approach::npop || a == Approach::mcpop);
  Mat u_pred = pto_first ? net_forward(dec, ds.Y_test)
                         : net_forward(enc, ds.Y_test);
  Mat y_raw = pto_first ? net_forward(enc, ds.U_test)
                        : net_forward(dec, ds.U_test);
  Mat y_pred;
  if (approach_is_full(a)) {
    y_pred = Mat(fm.obs_dim(), y_raw.cols());
    for (Eigen::Index i = 0; i < y_raw.cols(); ++i) {
      y_pred.col(i) = observe(y_raw.col(i), fm.obs_indices());
    }
  } else {
    y_pred = y_raw;
  }

  MapEval out;
  out.inverse_per_sample = metric_rel_per_sample(u_pred, ds.U_test);
  out.forward_per_sample = metric_rel_per_sample(y_pred, ds.Yc_test);
  out.inverse_mean = out.inverse_per_sample.mean();
  out.forward_mean = out.forward_per_sample.mean();
  out.abs_pointwise = metric_abs_pointwise(u_pred, ds.U_test);
  return out;
}

TikEval run_tikhonov_reference(const ExperimentConfig& cfg, const Dataset& ds,
                               const ForwardModel& fm, int max_samples,
                               const TikOptions& opts) {
  const int count = max_samples > 0
                        ? std::min<int>(max_samples, ds.Y_test.cols())
                        : static_cast<int>(ds.Y_test.cols());
  const Vec u0 = Vec::Zero(ds.n());
  Vec per_sample(count);
  Vec iters(count);
  const double t0 = now_seconds();
  parallel_for(count, [&](int i) {
    TikResult r = tikhonov_solve(fm, ds.Y_test.col(i), u0, cfg.lambda, opts);
    per_sample(i) = (r.u - ds.U_test.col(i)).squaredNorm() /
                    ds.U_test.col(i).squaredNorm();
    iters(i) = r.iters;
  });
  TikEval out;
  out.per_sample = per_sample;
  out.mean = per_sample.mean();
  out.seconds_per_sample = (now_seconds() - t0) / count;
  out.mean_iters = iters.mean();
  return out;
}

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

}  // namespace

void save_report(const std::string& dir, const std::string& name,
                 const Report& report) {
  fs::create_directories(dir);
  json j;
  j["kind"] = report.kind;
  j["approach"] = report.approach;
  j["inverse_per_sample"] = vec_to_json(report.inverse_per_sample);
  j["forward_per_sample"] = vec_to_json(report.forward_per_sample);
  j["inverse_mean"] = report.inverse_mean;
  j["forward_mean"] = report.forward_mean;
  j["abs_pointwise"] = vec_to_json(report.abs_pointwise);
  j["train_seconds"] = report.train_seconds;
  j["per_inference_seconds"] = report.per_inference_seconds;
  j["cfl_warnings"] = report.cfl_warnings;
  j["config_echo"] = report.config_echo;
  j["code_version"] = report.code_version;
  {
    std::ofstream os(dir + "/" + name + ".json");
    if (!os) throw IoError("cannot write report " + name);
    os << j.dump(2) << "\n";
  }
  {
    std::ofstream os(dir + "/" + name + ".csv");
    if (!os) throw IoError("cannot write report csv " + name);
    os << "sample,inverse_sq_rel,forward_sq_rel\n";
    const Eigen::Index rows = std::max(report.inverse_per_sample.size(),
                                       report.forward_per_sample.size());
    for (Eigen::Index i = 0; i < rows; ++i) {
      os << i << ",";
      if (i < report.inverse_per_sample.size()) {
        os << report.inverse_per_sample(i);
      }
      os << ",";
      if (i < report.forward_per_sample.size()) {
        os << report.forward_per_sample(i);
      }
      os << "\n";
    }
  }
}

Report load_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open report " + path);
  json j;
  is >> j;
  Report r;
  r.kind = j.at("kind").get<std::string>();
  r.approach = j.at("approach").get<std::string>();
  r.inverse_per_sample = vec_from_json(j.at("inverse_per_sample"));
  r.forward_per_sample = vec_from_json(j.at("forward_per_sample"));
  r.inverse_mean = j.at("inverse_mean").get<double>();
  r.forward_mean = j.at("forward_mean").get<double>();
  r.abs_pointwise = vec_from_json(j.at("abs_pointwise"));
  r.train_seconds = j.at("train_seconds").get<double>();
  r.per_inference_seconds = j.at("per_inference_seconds").get<double>();
  r.cfl_warnings = j.at("cfl_warnings").get<long>();
  r.config_echo = j.at("config_echo").get<std::string>();
  r.code_version = j.at("code_version").get<std::string>();

  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b));
  };
  if (r.inverse_per_sample.size() > 0 &&
      !close(r.inverse_mean, r.inverse_per_sample.mean())) {
    throw IoError("report self-consistency failure: inverse mean");
  }
  if (r.forward_per_sample.size() > 0 &&
      !close(r.forward_mean, r.forward_per_sample.mean())) {
    throw IoError("report self-consistency failure: forward mean");
  }
  return r;
}

int cmd_generate(const ExperimentConfig& cfg, bool quiet) {
  Dataset ds = generate_dataset(cfg);
  const std::string dir = cfg.out + "/dataset";
  save_dataset(dir, ds);
  if (!quiet) {
    std::cout << "dataset written to " << dir << " (n=" << ds.n()
              << ", m=" << ds.m() << ", train=" << ds.U_train.cols()
              << ", test=" << ds.U_test.cols() << ")\n";
  }
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, bool quiet) {
  Dataset ds = load_dataset(cfg.out + "/dataset");
  auto fm = make_forward_model(cfg, ds.obs_indices);
  TrainData data = make_train_data(cfg, ds);

  const double t0 = now_seconds();
  TrainResult result = train_sequential(encoder_spec(cfg), decoder_spec(cfg),
                                        data, *fm, CounterRng(cfg.seeds.net));
  const double seconds = now_seconds() - t0;

  const std::string run_dir = cfg.out + "/" + cfg.approach;
  fs::create_directories(run_dir);
  Checkpoint ckpt;
  ckpt.enc = result.enc;
  ckpt.dec = result.dec;
  ckpt.adam_enc = AdamState::init(result.enc);
  ckpt.adam_dec = AdamState::init(result.dec);
  ckpt.rng_seed = cfg.seeds.net;
  ckpt.epochs_enc = result.enc_history.epochs_run;
  ckpt.epochs_dec = result.dec_history.epochs_run;
  save_checkpoint(run_dir + "/checkpoint.bin", ckpt);

  std::ofstream hist(run_dir + "/history.csv");
  hist << "phase,epoch,loss\n";
  for (std::size_t i = 0; i < result.enc_history.loss.size(); ++i) {
    hist << "encoder," << i + 1 << "," << result.enc_history.loss[i] << "\n";
  }
  for (std::size_t i = 0; i < result.dec_history.loss.size(); ++i) {
    hist << "decoder," << i + 1 << "," << result.dec_history.loss[i] << "\n";
  }

  if (!quiet) {
    std::cout << "trained " << cfg.approach << " in " << seconds << " s ("
              << result.enc_history.epochs_run << "+"
              << result.dec_history.epochs_run << " epochs, stop: "
              << result.enc_history.stop_reason << "/"
              << result.dec_history.stop_reason << ")\n";
  }
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, bool quiet) {
  Dataset ds = load_dataset(cfg.out + "/dataset");
  auto fm = make_forward_model(cfg, ds.obs_indices);
  const std::string run_dir = cfg.out + "/" + cfg.approach;
  Checkpoint ckpt = load_checkpoint(run_dir + "/checkpoint.bin");

  const Approach a = approach_from_string(cfg.approach);
  const double t0 = now_seconds();
  MapEval eval = evaluate_surrogates(a, ckpt.enc, ckpt.dec, ds, *fm);
  const double eval_seconds = now_seconds() - t0;

  Report report;
  report.kind = "eval";
  report.approach = cfg.approach;
  report.inverse_per_sample = eval.inverse_per_sample;
  report.forward_per_sample = eval.forward_per_sample;
  report.inverse_mean = eval.inverse_mean;
  report.forward_mean = eval.forward_mean;
  report.abs_pointwise = eval.abs_pointwise;
  report.per_inference_seconds =
      eval_seconds / (2.0 * static_cast<double>(ds.Y_test.cols()));
  if (auto* ns = dynamic_cast<const NSModel*>(fm.get())) {
    report.cfl_warnings = ns->cfl_violations();
  }
  report.config_echo = config_to_json_text(cfg);
  save_report(run_dir, "report", report);

  if (!quiet) {
    std::cout << cfg.approach << ": inverse E_rel = " << eval.inverse_mean
              << ", forward E_rel = " << eval.forward_mean << " over "
              << ds.Y_test.cols() << " test samples\n";
  }
  return 0;
}

int cmd_tik(const ExperimentConfig& cfg, bool quiet) {
  Dataset ds = load_dataset(cfg.out + "/dataset");
  auto fm = make_forward_model(cfg, ds.obs_indices);
  TikEval tik = run_tikhonov_reference(cfg, ds, *fm);

  Report report;
  report.kind = "tik";
  report.approach = "Tik";
  report.inverse_per_sample = tik.per_sample;
  report.inverse_mean = tik.mean;
  report.per_inference_seconds = tik.seconds_per_sample;
  report.config_echo = config_to_json_text(cfg);
  save_report(cfg.out + "/tik", "report", report);

  if (!quiet) {
    std::cout << "Tik: inverse E_rel = " << tik.mean << " over "
              << ds.Y_test.cols() << " samples (" << tik.seconds_per_sample
              << " s/sample, mean iters " << tik.mean_iters << ")\n";
  }
  return 0;
}

namespace {

LinearProblem random_linear_problem(std::uint64_t seed, int n, int m, int nt,
                                    double lambda, bool full_column_rank) {
  CounterRng rng(seed);
  const int rows = full_column_rank ? std::max(m, n + 1) : m;
  Mat g(rows, n);
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = rng.normal();
  }
  Mat u(n, nt);
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) u(r, c) = rng.normal();
  }
  LinearProblem p;
  p.GB = g;
  p.U = u;
  p.Y = g * u;  // noise-free linear data
  p.u0 = Vec::Zero(n);
  for (Eigen::Index i = 0; i < p.u0.size(); ++i) p.u0(i) = 0.3 * rng.normal();
  p.lambda = lambda;
  return p;
}

}  // namespace

int cmd_oracle(const ExperimentConfig& cfg, bool quiet) {
  if (cfg.problem != "linear") {
    throw ConfigError("cmd_oracle: requires problem = linear");
  }
  bool ok = true;
  auto check = [&](const std::string& name, double value, double bound) {
    const bool pass = value <= bound;
    ok = ok && pass;
    if (!quiet) {
      std::cout << (pass ? "  PASS " : "  FAIL ") << name << ": " << value
                << " (bound " << bound << ")\n";
    }
  };

  const Approach all[] = {Approach::npop,  Approach::nopo,
                          Approach::mcpop, Approach::mcopo,
                          Approach::mcopo_full, Approach::taen,
                          Approach::taen_full};
  for (int seed = 0; seed < 20; ++seed) {
    LinearProblem p =
        random_linear_problem(1000 + seed, 4 + seed % 4, 3 + seed % 3,
                              9 + seed % 4, 0.5 + 0.1 * seed, false);
    p.G_full = p.GB;
    for (Approach a : all) {
      EncDec maps = fit(a, p);
      PhaseGradients g = sequential_loss_gradients(a, p, maps);
      check("stationarity " + approach_name(a) + " seed " +
                std::to_string(seed),
            g.max_relative(), 1e-8);
    }
    LinearProblem q = random_linear_problem(2000 + seed, 4, 6, 12, 1.0, true);
    EncDec npop = fit_npop(q);
    ResidualBundle r = simultaneous_residual(npop.enc, npop.dec, q, 1.0);
    check("simultaneous beta=1 seed " + std::to_string(seed),
          r.max_relative(), 1e-8);
  }
  if (!quiet) {
    std::cout << (ok ? "oracle suite PASS\n" : "oracle suite FAIL\n");
  }
  return ok ? 0 : 2;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& mode,
              bool quiet) {
  Dataset ds = load_dataset(cfg.out + "/dataset");
  auto fm = make_forward_model(cfg, ds.obs_indices);
  fs::create_directories(cfg.out + "/sweep");

  if (mode == "noise") {
    if (cfg.sweep.epsilons.empty()) {
      throw ConfigError("cmd_sweep: sweep.epsilons is empty");
    }
    std::ofstream csv(cfg.out + "/sweep/noise.csv");
    csv << "epsilon,inverse_rel,forward_rel\n";
    for (double eps : cfg.sweep.epsilons) {
      ExperimentConfig c = cfg;
      c.epsilon = eps;
      TrainData data = make_train_data(c, ds);
      TrainResult r =
          train_sequential(encoder_spec(c), decoder_spec(c), data, *fm,
                           CounterRng(c.seeds.net));
      MapEval eval = evaluate_surrogates(approach_from_string(c.approach),
                                         r.enc, r.dec, ds, *fm);
      csv << eps << "," << eval.inverse_mean << "," << eval.forward_mean
          << "\n";
      csv.flush();
      if (!quiet) {
        std::cout << "epsilon " << eps << ": inverse " << eval.inverse_mean
                  << ", forward " << eval.forward_mean << "\n";
      }
    }
    return 0;
  }

  if (mode == "samples") {
    CounterRng pick(cfg.seeds.obs ^ 0x5eedULL);
    std::ofstream csv(cfg.out + "/sweep/samples.csv");
    csv << "sample_index,inverse_rel,forward_rel\n";
    Vec errs(cfg.sweep.num_samples);
    for (int k = 0; k < cfg.sweep.num_samples; ++k) {
      const int idx = static_cast<int>(pick.uniform() * ds.U_train.cols()) %
                      static_cast<int>(ds.U_train.cols());
      TrainData data = make_train_data(cfg, ds, idx);
      TrainResult r =
          train_sequential(encoder_spec(cfg), decoder_spec(cfg), data, *fm,
                           CounterRng(cfg.seeds.net));
      MapEval eval = evaluate_surrogates(approach_from_string(cfg.approach),
                                         r.enc, r.dec, ds, *fm);
      errs(k) = eval.inverse_mean;
      csv << idx << "," << eval.inverse_mean << "," << eval.forward_mean
          << "\n";
      csv.flush();
      if (!quiet) {
        std::cout << "sample " << idx << ": inverse " << eval.inverse_mean
                  << "\n";
      }
    }
    const double mean = errs.mean();
    const double sd = std::sqrt((errs.array() - mean).square().sum() /
                                std::max(1, cfg.sweep.num_samples - 1));
    if (!quiet) {
      std::cout << "single-sample robustness: mean " << mean << ", std " << sd
                << "\n";
    }
    return 0;
  }

  throw ConfigError("cmd_sweep: mode must be 'noise' or 'samples'");
}

int cmd_timing(const ExperimentConfig& cfg, bool quiet) {
  Dataset ds = load_dataset(cfg.out + "/dataset");
  auto fm = make_forward_model(cfg, ds.obs_indices);

  const Vec u = ds.U_test.col(0);
  double t0 = now_seconds();
  const int solver_reps = 5;
  for (int i = 0; i < solver_reps; ++i) (void)fm->apply(u);
  const double solver_time = (now_seconds() - t0) / solver_reps;

  t0 = now_seconds();
  TikResult tik = tikhonov_solve(*fm, ds.Y_test.col(0), Vec::Zero(ds.n()),
                                 cfg.lambda);
  const double tik_time = now_seconds() - t0;

  const Approach a = approach_from_string(cfg.approach);
  const NetShape shape = net_shape(a, ds.n(), ds.m(), fm->state_dim());
  CounterRng rng(cfg.seeds.net);
  ShallowNet enc = ShallowNet::init(shape.enc_in, cfg.width, shape.enc_out,
                                    std::sqrt(0.02), rng);
  const Vec y = ds.Y_test.col(0);
  t0 = now_seconds();
  const int net_reps = 200;
  for (int i = 0; i < net_reps; ++i) (void)net_forward(enc, Mat(y));
  const double net_time = (now_seconds() - t0) / net_reps;

  json j;
  j["forward_solver_seconds"] = solver_time;
  j["tikhonov_seconds"] = tik_time;
  j["tikhonov_iters"] = tik.iters;
  j["surrogate_seconds"] = net_time;
  j["speedup_vs_solver"] = solver_time / net_time;
  j["speedup_vs_tikhonov"] = tik_time / net_time;
  fs::create_directories(cfg.out);
  std::ofstream os(cfg.out + "/timing.json");
  os << j.dump(2) << "\n";

  if (!quiet) {
    std::cout << "solver " << solver_time << " s, tikhonov " << tik_time
              << " s, surrogate " << net_time << " s; ratios "
              << solver_time / net_time << "x / " << tik_time / net_time
              << "x\n";
  }
  return 0;
}

}  // namespace mcae
