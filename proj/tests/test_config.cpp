#include "doctest.h"
#include "mcae/config.hpp"

using namespace mcae;

TEST_CASE("config parses and echoes") {
  const std::string text = R"({
    "problem": "heat",
    "approach": "TAEN-Full",
    "n_train": 1,
    "lambda": 30.0,
    "delta": 0.005,
    "epsilon": 0.1,
    "width": 256,
    "heat": {"nx": 16, "ny": 16, "q": 15, "num_obs": 10},
    "seeds": {"net": 100, "train": 18, "test": 28}
  })";
  ExperimentConfig cfg = config_from_json_text(text);
  CHECK(cfg.approach == "TAEN-Full");
  CHECK(cfg.lambda == 30.0);
  CHECK(cfg.heat.q == 15);
  CHECK(cfg.seeds.test == 28);
  // defaults survive
  CHECK(cfg.ns.grid == 16);

  ExperimentConfig echo = config_from_json_text(config_to_json_text(cfg));
  CHECK(echo.approach == cfg.approach);
  CHECK(echo.heat.num_obs == cfg.heat.num_obs);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS((void)config_from_json_text(R"({"problme": "heat"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      (void)config_from_json_text(R"({"heat": {"mesh": 16}})"),
      ConfigError);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS((void)config_from_json_text(R"({"problem": "poisson"})"),
                  ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"approach": "TNET"})"),
                  ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"n_train": 7})"),
                  ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"lambda": -1})"),
                  ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"width": "wide"})"),
                  ConfigError);
}
