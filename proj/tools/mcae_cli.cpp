// Command-line front end: dataset generation, training, evaluation, the
// Tikhonov reference, the linear oracle suite, noise/sample sweeps and
// timing measurements. Exit codes: 0 success/PASS, 2 acceptance failure,
// 1 usage or runtime error.

#include <iostream>

#include "CLI11.hpp"
#include "mcae/experiment.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  bool quiet = false;
};

mcae::ExperimentConfig resolve_config(const GlobalArgs& args) {
  mcae::ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = mcae::load_config(args.config_path);
  }
  if (!args.out_override.empty()) cfg.out = args.out_override;
  if (const char* env = std::getenv("MCAE_OUT_DIR")) cfg.out = env;
  if (args.has_seed) {
    cfg.seeds.net = args.seed_override;
    cfg.seeds.noise = args.seed_override ^ 0x9e3779b9ULL;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surrogate learning for PDE-constrained inverse problems"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "JSON experiment config");
  app.add_option("--out", args.out_override, "output directory override");
  auto* seed_opt =
      app.add_option("--seed", args.seed_override, "seed override");
  app.add_flag("--quiet", args.quiet, "suppress progress output");

  auto* generate = app.add_subcommand("generate", "create a dataset");
  auto* train = app.add_subcommand("train", "train encoder/decoder");
  auto* eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
  auto* tik = app.add_subcommand("tik", "run the Tikhonov reference");
  auto* oracle =
      app.add_subcommand("oracle", "run the linear closed-form suite");
  auto* sweep = app.add_subcommand("sweep", "noise or sample sweep");
  std::string sweep_mode = "noise";
  sweep->add_option("--mode", sweep_mode, "noise | samples");
  auto* timing = app.add_subcommand("timing", "solver vs surrogate timing");

  CLI11_PARSE(app, argc, argv);
  args.has_seed = seed_opt->count() > 0;

  try {
    const mcae::ExperimentConfig cfg = resolve_config(args);
    if (generate->parsed()) return mcae::cmd_generate(cfg, args.quiet);
    if (train->parsed()) return mcae::cmd_train(cfg, args.quiet);
    if (eval->parsed()) return mcae::cmd_eval(cfg, args.quiet);
    if (tik->parsed()) return mcae::cmd_tik(cfg, args.quiet);
    if (oracle->parsed()) return mcae::cmd_oracle(cfg, args.quiet);
    if (sweep->parsed()) return mcae::cmd_sweep(cfg, sweep_mode, args.quiet);
    if (timing->parsed()) return mcae::cmd_timing(cfg, args.quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
