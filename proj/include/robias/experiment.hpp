#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "robias/baselines.hpp"
#include "robias/dataset.hpp"
#include "robias/diversify.hpp"
#include "robias/mlp.hpp"
#include "robias/probe.hpp"

namespace robias {

enum class Approach { original, rus, ros, smote, adasyn, diversified, synth_only, delete_only };

// Fixed output order.
inline constexpr std::array<Approach, 8> kAllApproaches = {
    Approach::original, Approach::rus,         Approach::ros,        Approach::smote,
    Approach::adasyn,   Approach::diversified, Approach::synth_only, Approach::delete_only};

const char* to_string(Approach a);
Approach parse_approach(const std::string& text);

struct DataSource {
  std::filesystem::path path;                       // whole dataset, or the training file
  std::optional<std::filesystem::path> test_path;   // separate test file; otherwise split
  DatasetSchema schema;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 7;
  bool minmax_scale = false;  // fitted on train, applied to both sides
};

struct ExperimentConfig {
  std::string name = "experiment";
  DataSource data;
  std::vector<std::size_t> hidden_layers{20};
  TrainSchedule schedule{{{0.5, 40}, {0.2, 40}}, 0.0};
  bool scale_epochs = true;  // epochs * min(1, original_rows / new_rows)
  NoiseSpec noise;
  DiversifyConfig diversify;
  bool auto_corr_threshold = true;  // derive the threshold from train/test
  ResamplePlan rus_plan{ResampleMethod::rus_equalize};
  std::size_t k_neighbors = 5;
  double adasyn_balance = 1.0;
  // Baseline legs start from a random subset of this share of the training
  // rows (drawn once per experiment from imbalance_seed).
  std::optional<double> imbalance_fraction;
  std::uint64_t imbalance_seed = 11;
  double accuracy_threshold = 0.9;
  int repeats = 10;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
  std::vector<Approach> approaches{Approach::original, Approach::rus,   Approach::ros,
                                   Approach::smote,    Approach::adasyn, Approach::diversified};

  void validate() const;
};

// Relative paths in the document resolve against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentData {
  Dataset train;
  Dataset test;
  Vector feature_scale;  // max |value| per feature over train
};

ExperimentData load_experiment_data(const ExperimentConfig& cfg);
ExperimentData make_experiment_data(Dataset train, Dataset test);

// Random subset of round(fraction * n) rows (order kept).
Dataset random_subset(const Dataset& ds, double fraction, std::uint64_t seed);

enum class RunStatus { ok, infeasible, failed };
const char* to_string(RunStatus s);

struct RunRecord {
  Approach approach = Approach::original;
  int repeat = 0;
  RunStatus status = RunStatus::ok;
  std::string note;
  double b_r = 0.0;
  double delta_x_max = 0.0;
  std::vector<double> ratios;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  bool accuracy_ok = false;
  int reseeds = 0;
  std::size_t train_rows = 0;
  std::size_t synthetic_rows = 0;
  int epochs = 0;
  std::uint64_t seed = 0;
  std::optional<ValidationReport> validation;
};

struct ApproachSummary {
  Approach approach = Approach::original;
  std::vector<double> values;  // B_R of the ok runs, by repeat
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
  double min = 0.0;
  double max = 0.0;
  std::size_t infeasible = 0;
  std::size_t failed = 0;
  std::size_t accuracy_flags = 0;
};

struct ExperimentReport {
  std::string name;
  std::uint64_t master_seed = 0;
  int repeats = 0;
  std::vector<std::string> class_names;
  double corr_threshold = 0.0;
  bool corr_warning = false;
  std::optional<double> original_canonical;  // repeat 0's original B_R
  std::vector<ApproachSummary> summaries;     // in kAllApproaches order
  std::vector<RunRecord> runs;                // approach-major, then repeat
  std::vector<double> repeat_seconds;         // wall time per repeat; not serialized in report.json
};

ApproachSummary summarize(Approach a, const std::vector<RunRecord>& runs);

// Runs every repeat (concurrently up to cfg.workers) and aggregates.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const ExperimentData& data);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Trains a network for `ds`, retrying once with a fresh seed when train or
// test accuracy does not exceed the threshold.
struct GatedModel {
  Mlp model;
  TrainReport report;
  int reseeds = 0;
  bool accuracy_ok = false;
  int epochs = 0;
};

GatedModel train_gated(const ExperimentConfig& cfg, const Dataset& train_set, const Dataset& test,
                       const TrainSchedule& schedule, std::uint64_t seed);

}  // namespace robias
