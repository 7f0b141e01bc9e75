#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "robias/error.hpp"
#include "robias/experiment.hpp"
#include "robias/report.hpp"

using namespace robias;

namespace {

ExperimentConfig toy_config(int repeats) {
  ExperimentConfig cfg;
  cfg.name = "toy";
  cfg.data.schema.feature_columns = {std::size_t{0}};
  cfg.hidden_layers = {6};
  cfg.schedule = {{{0.2, 150}}, 0.0};
  cfg.noise.levels = {0.05, 0.1, 0.2, 0.3};
  cfg.noise.samples_per_input = 4;
  cfg.diversify.synth_base = 10;
  cfg.diversify.max_retries = 5;
  cfg.repeats = repeats;
  cfg.seed = 3;
  cfg.workers = 1;
  cfg.approaches = {kAllApproaches.begin(), kAllApproaches.end()};
  return cfg;
}

ExperimentData toy_data() {
  const auto all = make_toy_blobs(30, {Vector::Zero(2), Vector::Constant(2, 2.0)}, 1.2, 8);
  auto split = split_stratified(all, 0.7, 1);
  return make_experiment_data(std::move(split.train), std::move(split.test));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROBIAS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Approach, NamesRoundTrip) {
  for (Approach a : kAllApproaches) EXPECT_EQ(parse_approach(to_string(a)), a);
  EXPECT_THROW(parse_approach("bogus"), ConfigError);
}

TEST(Config, ParsesAndResolvesPaths) {
  const auto cfg = load_config(std::filesystem::path(ROBIAS_CONFIG_DIR) / "iris.json");
  EXPECT_EQ(cfg.hidden_layers, (std::vector<std::size_t>{15, 15}));
  EXPECT_EQ(cfg.repeats, 10);
  EXPECT_TRUE(std::filesystem::exists(cfg.data.path));
  EXPECT_EQ(cfg.noise.levels.size(), 40u);
  EXPECT_NEAR(cfg.noise.levels.back(), 0.40, 1e-12);
  ASSERT_TRUE(cfg.imbalance_fraction.has_value());
  EXPECT_EQ(cfg.rus_plan.method, ResampleMethod::rus_fraction);
  const auto data = load_experiment_data(cfg);
  EXPECT_EQ(data.train.rows(), 120u);
  EXPECT_EQ(data.test.rows(), 30u);
}

TEST(Config, Errors) {
  using nlohmann::json;
  EXPECT_THROW(config_from_json(json::array(), "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"data", {{"label_column", "y"}}}}, "."), ConfigError);
  json doc{{"data", {{"path", "x.csv"}, {"label_column", "y"}, {"feature_columns", {"a"}}}},
           {"experiment", {{"repeats", 0}}}};
  EXPECT_THROW(config_from_json(doc, "."), ConfigError);
  doc["experiment"]["repeats"] = 2;
  doc["network"] = {{"schedule", {{{"learning_rate", 0.1}, {"epochs", 0}}}}};
  EXPECT_THROW(config_from_json(doc, "."), ConfigError);
  doc.erase("network");
  EXPECT_EQ(config_from_json(doc, "/base").data.path, std::filesystem::path("/base/x.csv"));
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(RandomSubset, SizeAndDeterminism) {
  const auto ds = make_toy_blobs(20, {Vector::Zero(2), Vector::Ones(2)}, 1.0, 1);
  const auto a = random_subset(ds, 0.5, 11);
  EXPECT_EQ(a.rows(), 20u);
  EXPECT_EQ(a.features(), random_subset(ds, 0.5, 11).features());
}

TEST(Summarize, SampleStatistics) {
  std::vector<RunRecord> runs(4);
  const double vals[] = {0.1, 0.3, 0.2, 0.0};
  for (int i = 0; i < 4; ++i) {
    runs[i].approach = Approach::ros;
    runs[i].repeat = i;
    runs[i].b_r = vals[i];
    runs[i].accuracy_ok = true;
  }
  runs[3].status = RunStatus::infeasible;
  const auto s = summarize(Approach::ros, runs);
  EXPECT_EQ(s.values.size(), 3u);
  EXPECT_NEAR(s.mean, 0.2, 1e-12);
  EXPECT_NEAR(s.std, 0.1, 1e-12);
  EXPECT_EQ(s.infeasible, 1u);
  EXPECT_DOUBLE_EQ(s.min, 0.1);
  EXPECT_DOUBLE_EQ(s.max, 0.3);
}

TEST(RunExperiment, SingleRepeatOneValuePerApproach) {
  const auto rep = run_experiment(toy_config(1), toy_data());
  ASSERT_EQ(rep.summaries.size(), kAllApproaches.size());
  for (std::size_t i = 0; i < rep.summaries.size(); ++i) {
    const auto& s = rep.summaries[i];
    EXPECT_EQ(s.approach, kAllApproaches[i]);
    EXPECT_EQ(s.values.size() + s.infeasible + s.failed, 1u) << to_string(s.approach);
    EXPECT_EQ(s.failed, 0u) << to_string(s.approach);
    EXPECT_GE(s.std, 0.0);
  }
  ASSERT_TRUE(rep.original_canonical.has_value());
  EXPECT_EQ(*rep.original_canonical, rep.summaries[0].values[0]);
}

TEST(RunExperiment, BitIdenticalAndWorkerIndependent) {
  auto cfg = toy_config(3);
  const auto data = toy_data();
  const auto a = report_to_json(run_experiment(cfg, data)).dump();
  const auto b = report_to_json(run_experiment(cfg, data)).dump();
  cfg.workers = 3;
  const auto c = report_to_json(run_experiment(cfg, data)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(EmitReport, FilesAndRowAccounting) {
  auto cfg = toy_config(3);
  cfg.approaches = {Approach::original};
  const auto rep = run_experiment(cfg, toy_data());
  const auto dir = oracle::temp_dir("report");
  emit_report(rep, dir);
  for (const char* f : {"report.csv", "runs.csv", "report.json", "boxplot.svg", "timing.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(read_csv(dir / "report.csv").size(), 2u);
  EXPECT_EQ(read_csv(dir / "runs.csv").size(), 4u);
  const auto svg = slurp(dir / "boxplot.svg");
  std::size_t groups = 0;
  for (auto pos = svg.find("<g class=\"approach\""); pos != std::string::npos;
       pos = svg.find("<g class=\"approach\"", pos + 1))
    ++groups;
  EXPECT_EQ(groups, 1u);
}

TEST(EmitReport, AggregatesRecomputableFromRuns) {
  const auto rep = run_experiment(toy_config(4), toy_data());
  const auto dir = oracle::temp_dir("recompute");
  emit_report(rep, dir, false);
  EXPECT_FALSE(std::filesystem::exists(dir / "boxplot.svg"));
  const auto runs = read_csv(dir / "runs.csv");
  const auto agg = read_csv(dir / "report.csv");
  for (std::size_t r = 1; r < agg.size(); ++r) {
    std::vector<double> v;
    for (std::size_t i = 1; i < runs.size(); ++i)
      if (runs[i][0] == agg[r][0] && runs[i][2] == "ok") v.push_back(std::stod(runs[i][3]));
    if (v.empty()) continue;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    EXPECT_NEAR(std::stod(agg[r][2]), mean, 1e-9) << agg[r][0];
    EXPECT_NEAR(std::stod(agg[r][3]), sd, 1e-9) << agg[r][0];
  }
}

TEST(EmitReport, UnwritableDirectory) {
  const auto dir = oracle::temp_dir("blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(emit_report(ExperimentReport{}, dir / "file" / "sub"), IoError);
}

TEST(Cli, ExitCodes) {
  const auto dir = oracle::temp_dir("cli");
  EXPECT_EQ(run_cli("experiment --config " + (dir / "missing.json").string()), 2);
  std::ofstream(dir / "bad.json") << R"({"data": {"path": "nope.csv", "label_column": "y", "feature_columns": ["a"]}})";
  EXPECT_EQ(run_cli("probe --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 3);
  EXPECT_EQ(run_cli("experiment --config " + (dir / "bad.json").string() + " --mode sideways"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, BaselineWritesCsv) {
  const auto dir = oracle::temp_dir("cli_base");
  const std::string cfg = std::string(ROBIAS_CONFIG_DIR) + "/iris.json";
  ASSERT_EQ(run_cli("baseline --config " + cfg + " --method smote --out " + dir.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "resampled.csv"));
}
