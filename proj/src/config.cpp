#include "mcae/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mcae/linear_analysis.hpp"

namespace mcae {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problem != "heat" && problem != "ns" && problem != "linear") {
    throw ConfigError("config: problem must be heat, ns or linear");
  }
  try {
    approach_from_string(approach);
  } catch (const std::exception&) {
    throw ConfigError("config: unknown approach " + approach);
  }
  if (n_train != 1 && n_train != 100) {
    throw ConfigError("config: n_train must be 1 or 100");
  }
  if (n_test < 1) throw ConfigError("config: n_test < 1");
  if (lambda < 0 || delta < 0 || epsilon < 0) {
    throw ConfigError("config: negative noise/regularization level");
  }
  if (width < 1 || epochs_encoder < 0 || epochs_decoder < 0 || lr <= 0) {
    throw ConfigError("config: invalid training settings");
  }
  if (replicate < 1) throw ConfigError("config: replicate < 1");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  reject_unknown(j,
                 {"problem", "approach", "n_train", "replicate", "n_test",
                  "lambda", "delta", "epsilon", "width", "epochs_encoder",
                  "epochs_decoder", "lr", "eval_every", "plateau_epochs",
                  "seeds", "heat", "ns", "sweep", "out"},
                 "top level");

  ExperimentConfig cfg;
  try {
    maybe(j, "problem", cfg.problem);
    maybe(j, "approach", cfg.approach);
    maybe(j, "n_train", cfg.n_train);
    maybe(j, "replicate", cfg.replicate);
    maybe(j, "n_test", cfg.n_test);
    maybe(j, "lambda", cfg.lambda);
    maybe(j, "delta", cfg.delta);
    maybe(j, "epsilon", cfg.epsilon);
    maybe(j, "width", cfg.width);
    maybe(j, "epochs_encoder", cfg.epochs_encoder);
    maybe(j, "epochs_decoder", cfg.epochs_decoder);
    maybe(j, "lr", cfg.lr);
    maybe(j, "eval_every", cfg.eval_every);
    maybe(j, "plateau_epochs", cfg.plateau_epochs);
    maybe(j, "out", cfg.out);

    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      reject_unknown(s, {"net", "train", "test", "noise", "obs"}, "seeds");
      maybe(s, "net", cfg.seeds.net);
      maybe(s, "train", cfg.seeds.train);
      maybe(s, "test", cfg.seeds.test);
      maybe(s, "noise", cfg.seeds.noise);
      maybe(s, "obs", cfg.seeds.obs);
    }
    if (j.contains("heat")) {
      const json& h = j.at("heat");
      reject_unknown(h, {"nx", "ny", "q", "corr_length", "source", "num_obs"},
                     "heat");
      maybe(h, "nx", cfg.heat.nx);
      maybe(h, "ny", cfg.heat.ny);
      maybe(h, "q", cfg.heat.q);
      maybe(h, "corr_length", cfg.heat.corr_length);
      maybe(h, "source", cfg.heat.source);
      maybe(h, "num_obs", cfg.heat.num_obs);
    }
    if (j.contains("ns")) {
      const json& n = j.at("ns");
      reject_unknown(n, {"grid", "steps", "dt", "nu", "q", "num_obs"}, "ns");
      maybe(n, "grid", cfg.ns.grid);
      maybe(n, "steps", cfg.ns.steps);
      maybe(n, "dt", cfg.ns.dt);
      maybe(n, "nu", cfg.ns.nu);
      maybe(n, "q", cfg.ns.q);
      maybe(n, "num_obs", cfg.ns.num_obs);
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      reject_unknown(s, {"epsilons", "num_samples"}, "sweep");
      maybe(s, "epsilons", cfg.sweep.epsilons);
      maybe(s, "num_samples", cfg.sweep.num_samples);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: type error: ") + e.what());
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = cfg.problem;
  j["approach"] = cfg.approach;
  j["n_train"] = cfg.n_train;
  j["replicate"] = cfg.replicate;
  j["n_test"] = cfg.n_test;
  j["lambda"] = cfg.lambda;
  j["delta"] = cfg.delta;
  j["epsilon"] = cfg.epsilon;
  j["width"] = cfg.width;
  j["epochs_encoder"] = cfg.epochs_encoder;
  j["epochs_decoder"] = cfg.epochs_decoder;
  j["lr"] = cfg.lr;
  j["eval_every"] = cfg.eval_every;
  j["plateau_epochs"] = cfg.plateau_epochs;
  j["seeds"] = {{"net", cfg.seeds.net},
                {"train", cfg.seeds.train},
                {"test", cfg.seeds.test},
                {"noise", cfg.seeds.noise},
                {"obs", cfg.seeds.obs}};
  j["heat"] = {{"nx", cfg.heat.nx},
               {"ny", cfg.heat.ny},
               {"q", cfg.heat.q},
               {"corr_length", cfg.heat.corr_length},
               {"source", cfg.heat.source},
               {"num_obs", cfg.heat.num_obs}};
  j["ns"] = {{"grid", cfg.ns.grid},   {"steps", cfg.ns.steps},
             {"dt", cfg.ns.dt},       {"nu", cfg.ns.nu},
             {"q", cfg.ns.q},         {"num_obs", cfg.ns.num_obs}};
  j["sweep"] = {{"epsilons", cfg.sweep.epsilons},
                {"num_samples", cfg.sweep.num_samples}};
  j["out"] = cfg.out;
  return j.dump(2);
}

}  // namespace mcae
