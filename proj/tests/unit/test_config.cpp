#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "occspot/config.hpp"
#include "occspot/error.hpp"

using namespace occspot;
using nlohmann::ordered_json;

namespace {

std::string error_of(const ordered_json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, DefaultHyperparameters) {
  const PipelineConfig c;
  EXPECT_EQ(c.grid.n_cls, 15);
  EXPECT_EQ(c.loss.lambda, 1.0);
  EXPECT_EQ(c.pretrain.lr_peak, 0.003);
  EXPECT_EQ(c.loss.w_fg, 2.0);
  EXPECT_EQ(c.loss.w_bg, 1.0);
  EXPECT_EQ(c.loss.w_empty, 0.01);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RoundTrip) {
  for (const PipelineConfig& c : {PipelineConfig{}, tiny_config()}) {
    const ordered_json j = config_to_json(c);
    const PipelineConfig back = parse_config(j);
    EXPECT_EQ(back, c);
    EXPECT_EQ(config_to_json(back).dump(), j.dump());
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(Config, PartialOverridesDefaults) {
  const auto c = parse_config(ordered_json::parse(R"({"seed": 9, "loss": {"lambda": 0.5}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.loss.lambda, 0.5);
  EXPECT_EQ(c.loss.w_fg, 2.0);
  EXPECT_NE(config_hash(c), config_hash(PipelineConfig{}));
}

TEST(Config, UnknownKeyNamesPath) {
  const auto msg = error_of(ordered_json::parse(R"({"loss": {"lamda": 1}})"));
  EXPECT_NE(msg.find("config.loss.lamda"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;
}

TEST(Config, TypeMismatchNamesPath) {
  const auto msg = error_of(ordered_json::parse(R"({"pretrain": {"epochs": "ten"}})"));
  EXPECT_NE(msg.find("config.pretrain.epochs"), std::string::npos) << msg;
}

TEST(Config, ComponentValidation) {
  EXPECT_FALSE(error_of(ordered_json::parse(R"({"grid": {"cell_size": -1}})")).empty());
  EXPECT_FALSE(error_of(ordered_json::parse(R"({"source_beams": {"alpha_up_deg": 0, "alpha_low_deg": 0}})")).empty());
  EXPECT_FALSE(error_of(ordered_json::parse(R"({"finetune": {"reinit": "everything"}})")).empty());
  EXPECT_FALSE(error_of(ordered_json::parse(R"({"balance": {"foreground": [1, 2], "background": [2, 3]}})")).empty());
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "occspot_cfg.json";
  std::ofstream(path) << config_to_json(tiny_config()).dump(2);
  EXPECT_EQ(load_config(path), tiny_config());
  std::ofstream(path) << "{ broken";
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config(path.string() + ".missing"), ConfigError);
}

TEST(Config, DerivedSettings) {
  const PipelineConfig c;
  const auto d = dataset_config(c, c.source_beams, TargetKind::kOccupancy);
  EXPECT_EQ(d.occupancy.tie_weights, loss_weights(c).w);
  EXPECT_EQ(loss_weights(c).w, default_loss_weights().w);
  const auto t = train_config(c, c.pretrain, true, 3);
  EXPECT_EQ(t.epochs, 30);
  EXPECT_EQ(t.schedule.peak, 0.003);
  EXPECT_TRUE(t.augment);
  EXPECT_EQ(reinit_scope(c), ReinitScope::kHead);
}

TEST(Config, Hash) {
  EXPECT_EQ(fnv_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv_hex("a"), "af63dc4c8601ec8c");
}
