#include <gtest/gtest.h>

#include <json.hpp>

#include "mapvio/config.hpp"
#include "mapvio/error.hpp"

using namespace mapvio;

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(ExperimentConfig{}.validate()); }

TEST(Config, EmptyObjectGivesDefaults) {
  EXPECT_EQ(serialize_config(parse_config("{}")), serialize_config(ExperimentConfig{}));
}

TEST(Config, RoundTripIsCanonical) {
  ExperimentConfig c;
  c.seed = 42;
  c.metric_a = Vec3(0.1, -0.2, 0.3);
  c.filter.init_mode = InitMode::kPerturbed;
  c.filter.init_model = "model.bin";
  c.filter.ssim.threshold = 0.7;
  c.scenario.environment_change = true;
  c.scenario.change_region[1] = 0.5;
  c.scenario.trajectory.duration = 12.5;
  c.noise.sigma_px = 0.25;
  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.metric_a, c.metric_a);
  EXPECT_EQ(back.filter.init_mode, InitMode::kPerturbed);
  EXPECT_EQ(back.filter.init_model, "model.bin");
  EXPECT_EQ(back.scenario.change_region[1], 0.5);
  EXPECT_EQ(back.noise.sigma_px, 0.25);
}

TEST(Config, SerializedKeysAreSorted) {
  const auto j = nlohmann::json::parse(serialize_config(ExperimentConfig{}));
  std::string prev;
  for (const auto& item : j.items()) {
    EXPECT_LT(prev, item.key());
    prev = item.key();
  }
  EXPECT_TRUE(j.at("filter").contains("ssim"));
}

TEST(Config, PartialOverride) {
  const auto c = parse_config(R"({"seed": 9, "filter": {"map_updates": false, "ssim": {"grid_cols": 4}}})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_FALSE(c.filter.map_updates);
  EXPECT_EQ(c.filter.ssim.grid_cols, 4);
  EXPECT_EQ(c.filter.ssim.grid_rows, SsimOptions{}.grid_rows);
}

TEST(Config, RejectsUnknownKeysWithPath) {
  try {
    parse_config(R"({"filter": {"ssim": {"treshold": 0.5}}})");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("filter.ssim.treshold"), std::string::npos);
  }
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), FormatError);
}

TEST(Config, RejectsBadTypesAndValues) {
  EXPECT_THROW(parse_config("{"), FormatError);
  EXPECT_THROW(parse_config("[]"), FormatError);
  EXPECT_THROW(parse_config(R"({"seed": -1})"), FormatError);
  EXPECT_THROW(parse_config(R"({"seed": "one"})"), FormatError);
  EXPECT_THROW(parse_config(R"({"metric_a": [0, 0]})"), FormatError);
  EXPECT_THROW(parse_config(R"({"metric_a": [0.9, 0.9, 0]})"), FormatError);
  EXPECT_THROW(parse_config(R"({"filter": {"init_mode": "magic"}})"), FormatError);
  EXPECT_THROW(parse_config(R"({"filter": {"chi2_probability": 1.0}})"), FormatError);
  EXPECT_THROW(parse_config(R"({"filter": {"max_clones": 1}})"), FormatError);
  EXPECT_THROW(parse_config(R"({"scenario": {"render_rate": 60}})"), FormatError);
}

TEST(Config, ValidateCatchesRanges) {
  ExperimentConfig c;
  c.scenario.render_latency = -0.1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.filter.sigma_p0 = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.scenario.trajectory.duration = c.scenario.trajectory.stationary_time;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Config, InitModeNames) {
  for (InitMode m : {InitMode::kGroundTruth, InitMode::kLearned, InitMode::kPerturbed}) {
    EXPECT_EQ(init_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(init_mode_from_string("nope"), InvalidArgument);
}

TEST(Config, LoadMissingFileThrows) { EXPECT_THROW(load_config("/nonexistent/config.json"), FormatError); }
