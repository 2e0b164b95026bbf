#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ksq/errors.hpp"
#include "ksq/harness.hpp"

namespace ksq {
namespace {

using nlohmann::json;

ExperimentConfig small_solve() {
  ExperimentConfig c;
  c.length = 40.0;
  c.points = 256;
  c.steps = 16;
  c.horizon = 0.125;
  c.constants = ConstantsCalibration{};
  c.constants->c1 = 4.0;
  c.constants->c2 = 0.3;
  c.constants->energy_c = 2.0;
  return c;
}

TEST(Config, RoundTrip) {
  ExperimentConfig c = small_solve();
  c.model.delta = 0.75;
  c.verify.estimates = {"bilinear_bound"};
  c.sweep.entries = {json{{"model.delta", 1.0}}};
  const json j = c;
  const auto back = j.get<ExperimentConfig>();
  EXPECT_EQ(json(back), j);
}

TEST(Config, UnknownKeyNamesPath) {
  json j = ExperimentConfig{};
  j["model"]["deltta"] = 1.0;
  try {
    (void)j.get<ExperimentConfig>();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.deltta"), std::string::npos);
  }
}

TEST(Config, WrongTypeRejected) {
  json j = ExperimentConfig{};
  j["grid"]["points"] = "many";
  EXPECT_THROW((void)j.get<ExperimentConfig>(), ConfigError);
}

TEST(Config, ValidateNamesField) {
  ExperimentConfig c;
  c.points = 1000;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("grid.points"), std::string::npos);
  }
}

TEST(Config, Overrides) {
  json j = ExperimentConfig{};
  apply_override(j, "model.delta=0.25");
  apply_override(j, "pipeline=roots");
  apply_override(j, "data.phi", json{{"family", "exp_decay"}, {"amp", 1.0}, {"rate", 2.0}});
  const auto c = j.get<ExperimentConfig>();
  EXPECT_EQ(c.model.delta, 0.25);
  EXPECT_EQ(c.pipeline, "roots");
  EXPECT_EQ(c.phi["family"], "exp_decay");
  EXPECT_THROW(apply_override(j, "no_equals_sign"), ConfigError);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "ksq_config_test.json";
  std::ofstream(path) << R"({"pipeline": "roots", "model": {"delta": 2.0}})";
  const auto c = load_config(path);
  EXPECT_EQ(c.pipeline, "roots");
  EXPECT_EQ(c.model.delta, 2.0);
  std::filesystem::remove(path);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, SchemaLineFirst) {
  CsvTable t{"x", "ksq.test/1", {"a", "b"}, {}};
  t.add({1.0, 0.5});
  EXPECT_EQ(t.str(), "# schema: ksq.test/1\na,b\n1,0.5\n");
}

TEST(Harness, SolveIsDeterministic) {
  const auto c = small_solve();
  const auto a = run_experiment(c), b = run_experiment(c);
  EXPECT_EQ(a.digest(), b.digest());
  ASSERT_FALSE(a.tables.empty());
  EXPECT_EQ(a.tables[0].rows.size(), c.steps + 1);
}

TEST(Harness, RootsTable) {
  ExperimentConfig c;
  c.pipeline = "roots";
  c.roots.points = 8;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].schema, "ksq.roots/1");
  EXPECT_EQ(r.tables[0].rows.size(), 8u);
}

TEST(Harness, EmptySweep) {
  ExperimentConfig c;
  c.pipeline = "sweep";
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.tables.empty());
  EXPECT_TRUE(r.summary["entries"].empty());
  EXPECT_FALSE(r.diverged);
}

TEST(Harness, SweepEntriesDefaultToSolve) {
  ExperimentConfig c = small_solve();
  c.pipeline = "sweep";
  c.sweep.entries = {json{{"model.delta", 0.5}}, json{{"pipeline", "roots"}, {"roots.points", 4}}};
  const auto r = run_experiment(c);
  ASSERT_EQ(r.summary["entries"].size(), 2u);
  EXPECT_EQ(r.summary["entries"][0]["pipeline"], "solve");
  EXPECT_EQ(r.summary["entries"][1]["pipeline"], "roots");
  EXPECT_EQ(r.summary["entries"][0]["status"], "ok");
}

TEST(Harness, NestedSweepRejected) {
  ExperimentConfig c;
  c.pipeline = "sweep";
  c.sweep.entries = {json{{"pipeline", "sweep"}}};
  EXPECT_THROW((void)run_experiment(c), ConfigError);
}

TEST(Verify, ZeroAmplitudeSkipsWithNote) {
  ExperimentConfig c;
  c.pipeline = "verify";
  c.length = 40.0;
  c.points = 256;
  c.steps = 16;
  c.verify.samples = 2;
  c.verify.amplitude = 0.0;
  c.verify.estimates = {"whole_line_smoothing"};
  const auto run = verify_estimates(c);
  EXPECT_TRUE(run.reports.empty());
  ASSERT_EQ(run.notes.size(), 2u);
  EXPECT_NE(run.notes[0].find("skipped"), std::string::npos);
}

TEST(Verify, ProductCountAndSummary) {
  ExperimentConfig c;
  c.length = 40.0;
  c.points = 256;
  c.steps = 16;
  c.verify.samples = 3;
  c.verify.estimates = {"boundary_operator_bound", "whole_line_smoothing"};
  const auto run = verify_estimates(c);
  EXPECT_EQ(run.reports.size(), 6u);
  const auto s = summarize_ratios(run.reports, "whole_line_smoothing");
  EXPECT_EQ(s.count, 3u);
  EXPECT_LE(s.min, s.median);
  EXPECT_LE(s.median, s.max);
  EXPECT_GT(s.min, 0.0);
}

TEST(Verify, UnknownEstimateRejected) {
  ExperimentConfig c;
  c.verify.estimates = {"nope"};
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace ksq
