#include <gtest/gtest.h>

#include <sstream>

#include "pathcalc/config.hpp"

using namespace pathcalc;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST(Config, Defaults) {
  auto cfg = parse("");
  EXPECT_EQ(cfg.functional, "square:1");
  EXPECT_EQ(cfg.levels, (std::vector<int>{10, 12, 14}));
  EXPECT_FALSE(cfg.seed.has_value());
  cfg.subcommand = "ito-check";
  EXPECT_THROW(cfg.require_seed(), ConfigError);
  EXPECT_NO_THROW(cfg.finalize());
}

TEST(Config, FullFile) {
  auto cfg = parse(R"(
# comment
[generator]
kind = ito_euler
dimension = 2
level = 9
seed = 0x10
x0 = 1, 2
drift = constant:0, sin:1
[functional]
name = qv
index = 1
index2 = 2
[bk]
max_level = 8
cauchy_tol = 1e-4
strict = true
[run]
coordinate = 2
levels = 4,6
ensemble = 12
threads = 2
times = 0.1, 0.2
numeric_fallback = yes
out = somewhere
)");
  EXPECT_EQ(cfg.generator.kind, GeneratorKind::kItoEuler);
  EXPECT_EQ(cfg.generator.dimension, 2);
  EXPECT_EQ(*cfg.seed, 16u);
  EXPECT_EQ(cfg.generator.x0, Vector({{1.0, 2.0}}));
  EXPECT_EQ(cfg.functional, "qv");
  EXPECT_EQ(cfg.functional_params.at("index2"), "2");
  EXPECT_EQ(cfg.bk.max_level, 8);
  EXPECT_TRUE(cfg.bk.strict);
  EXPECT_EQ(cfg.coordinate, 1);
  EXPECT_EQ(cfg.levels, (std::vector<int>{4, 6}));
  EXPECT_EQ(cfg.ensemble, 12u);
  EXPECT_TRUE(cfg.numeric_fallback);
  EXPECT_EQ(cfg.out, "somewhere");
  cfg.finalize();
  EXPECT_EQ(cfg.generator.seed, 16u);
  EXPECT_EQ(cfg.generator.drift.size(), 2u);
  EXPECT_EQ(cfg.generator.vol.size(), 4u);
  EXPECT_EQ(cfg.vol_names[1], "constant:0");

  const auto j = to_json(cfg);
  EXPECT_EQ(j["run"]["coordinate"], 2);
  EXPECT_EQ(j["generator"]["seed"], 16u);
  EXPECT_FALSE(j["run"].contains("threads"));
}

TEST(Config, Errors) {
  for (const char* text : {
           "[nope]\na = 1\n",
           "[generator]\ncolour = red\n",
           "[generator]\nlevel = ten\n",
           "[generator]\nseed = -1\n",
           "[generator]\nkind = heston\n",
           "[bk]\nstrict = maybe\n",
           "[run]\ncoordinate = 0\n",
           "[run]\nlevels = 8,6\n",
           "[run]\nlevels = 0\n",
           "[run]\nensemble = 0\n",
           "key = value\n",
           "[generator\n",
       }) {
    EXPECT_THROW(parse(text), ConfigError) << text;
  }
}

TEST(Config, FinalizeErrors) {
  for (const char* text : {
           "[functional]\nname = nonsense\n",
           "[generator]\ndimension = 1\n[run]\ncoordinate = 2\n",
           "[generator]\nkind = ito_euler\ndimension = 2\ndrift = constant:0\n",
           "[generator]\nkind = ito_euler\ndrift = anticipating\n",
           "[generator]\nlevel = 30\n",
           "[bk]\ncauchy_tol = 0\n",
           "[run]\nupper_quantile = 2\n",
           "[run]\ntimes = 0.5, 0.2\n",
           "[run]\nh = 0\n",
       }) {
    auto cfg = parse(text);
    EXPECT_THROW(cfg.finalize(), ConfigError) << text;
  }
}

TEST(Config, InputSkipsFunctionalDimensionCheck) {
  auto cfg = parse("[functional]\nname = levy_area\n[run]\ninput = p.csv\n");
  EXPECT_NO_THROW(cfg.finalize());
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/cfg.ini"), std::ios_base::failure);
}

TEST(Config, ParseLevels) {
  EXPECT_EQ(parse_levels("6, 8,10"), (std::vector<int>{6, 8, 10}));
  EXPECT_THROW(parse_levels(""), ConfigError);
  EXPECT_THROW(parse_levels("25"), ConfigError);
}
