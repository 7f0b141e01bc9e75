#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "robias/baselines.hpp"
#include "robias/diversify.hpp"
#include "robias/error.hpp"
#include "robias/experiment.hpp"
#include "robias/report.hpp"
#include "robias/rng.hpp"

namespace fs = std::filesystem;
using namespace robias;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::optional<int> workers;
  std::string mode;
  std::string method = "smote";
  bool no_svg = false;
};

ExperimentConfig configure(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.repeats) cfg.repeats = *o.repeats;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.mode.empty()) {
    try {
      cfg.diversify.mode = parse_diversify_mode(o.mode);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

fs::path prepare_out(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create output directory " + o.out);
  return o.out;
}

// The single-shot subcommands reuse repeat 0's seed stream.
std::uint64_t original_seed(const ExperimentConfig& cfg) {
  return derive_seed(derive_seed(cfg.seed, {0}), {static_cast<std::uint64_t>(Approach::original)});
}

struct Probed {
  ExperimentData data;
  GatedModel gm;
  ProbeReport probe;
};

Probed train_and_probe(const ExperimentConfig& cfg) {
  Probed p{load_experiment_data(cfg), {}, {}};
  const std::uint64_t seed = original_seed(cfg);
  p.gm = train_gated(cfg, p.data.train, p.data.test, cfg.schedule, seed);
  if (!p.gm.accuracy_ok) {
    std::cerr << "warning: network below accuracy threshold (train "
              << p.gm.report.train_accuracy << ", test "
              << p.gm.report.test_accuracy.value_or(0.0) << ")\n";
  }
  p.probe = noise_sweep(p.gm.model, p.data.test, cfg.noise, p.data.feature_scale,
                        derive_seed(seed, {key_of("probe")}));
  return p;
}

void cmd_probe(const Options& o) {
  const auto cfg = configure(o);
  const auto out = prepare_out(o);
  const auto p = train_and_probe(cfg);
  save_mlp(p.gm.model, out / "model.json");
  write_json(out / "probe.json", probe_to_json(p.probe, p.data.test));
  write_counterexamples_csv(p.probe, p.data.test, out / "counterexamples.csv");
  std::cout << "B_R " << p.probe.b_r << "  delta_x_max " << p.probe.delta_x_max << '\n';
}

void cmd_diversify(const Options& o) {
  auto cfg = configure(o);
  const auto out = prepare_out(o);
  const auto p = train_and_probe(cfg);
  if (cfg.auto_corr_threshold) {
    const auto s = suggest_threshold(p.data.train.features(), p.data.test.features());
    cfg.diversify.corr_threshold = std::max(s.threshold, 1e-6);
    if (s.weak_correlation_warning) std::cerr << "warning: " << s.message << '\n';
  }
  const auto div = diversify(p.data.train, p.probe, cfg.diversify, p.data.feature_scale,
                             derive_seed(original_seed(cfg), {key_of("diversify")}));
  write_csv(div.data, out / "diversified.csv", "label", true);
  write_json(out / "diversify.json", diversified_to_json(div));
  write_json(out / "probe.json", probe_to_json(p.probe, p.data.test));
  std::cout << "rows " << div.data.rows() << " (synthetic " << div.data.count_synthetic()
            << ")  corr_diff " << div.validation.corr_diff << "%  "
            << (div.validation.passed ? "passed" : "not passed") << " after "
            << div.validation.attempts << " attempt(s)\n";
}

void cmd_baseline(const Options& o) {
  const auto cfg = configure(o);
  const auto out = prepare_out(o);
  const auto data = load_experiment_data(cfg);
  ResamplePlan plan = cfg.rus_plan;
  // Plain "rus" follows the configured RUS mode.
  if (o.method != "rus") plan.method = parse_resample_method(o.method);
  plan.k_neighbors = cfg.k_neighbors;
  plan.balance = cfg.adasyn_balance;
  const Dataset source = cfg.imbalance_fraction
                             ? random_subset(data.train, *cfg.imbalance_fraction, cfg.imbalance_seed)
                             : data.train;
  const Dataset resampled = resample(source, plan, derive_seed(cfg.seed, {key_of("resample")}));
  write_csv(resampled, out / "resampled.csv", "label", true);
  std::cout << to_string(plan.method) << ": " << source.rows() << " -> " << resampled.rows()
            << " rows\n";
}

void print_summary(const ExperimentReport& rep) {
  for (const auto& s : rep.summaries) {
    std::cout << std::left << std::setw(12) << to_string(s.approach);
    if (s.values.empty()) {
      std::cout << (s.infeasible ? "infeasible" : "no runs") << '\n';
      continue;
    }
    std::cout << "B_R " << s.mean << " +/- " << s.std << "  (n=" << s.values.size();
    if (s.infeasible) std::cout << ", infeasible " << s.infeasible;
    if (s.accuracy_flags) std::cout << ", accuracy flags " << s.accuracy_flags;
    std::cout << ")\n";
  }
}

void cmd_experiment(const Options& o, bool ablate) {
  auto cfg = configure(o);
  if (ablate) {
    cfg.approaches = {Approach::original, Approach::diversified, Approach::synth_only,
                      Approach::delete_only};
  } else if (!o.mode.empty()) {
    // --mode picks which diversification variant stands in for the full pipeline.
    for (auto& a : cfg.approaches) {
      if (a == Approach::diversified) {
        a = cfg.diversify.mode == DiversifyMode::synth_only   ? Approach::synth_only
            : cfg.diversify.mode == DiversifyMode::delete_only ? Approach::delete_only
                                                               : Approach::diversified;
      }
    }
  }
  const auto rep = run_experiment(cfg);
  emit_report(rep, o.out, !o.no_svg);
  print_summary(rep);
}

int exit_code_for(const Error& e) {
  const std::string kind = e.kind();
  if (kind == "config" || kind == "argument") return kExitConfig;
  if (kind == "schema" || kind == "parse" || kind == "label" || kind == "io" ||
      kind == "stratification") {
    return kExitData;
  }
  return EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness bias probing and dataset diversification"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment config")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed");
  };

  auto* probe = app.add_subcommand("probe", "train the original network and probe it");
  add_common(probe);
  auto* div = app.add_subcommand("diversify", "probe, then write a diversified training set");
  add_common(div);
  div->add_option("--mode", o.mode, "full|synth-only|delete-only");
  auto* base = app.add_subcommand("baseline", "write a resampled training set");
  add_common(base);
  base->add_option("--method", o.method, "rus|rus-fraction|ros|smote|adasyn");
  auto* exp = app.add_subcommand("experiment", "run the repeated comparison");
  auto* abl = app.add_subcommand("ablate", "compare full, synth-only and delete-only");
  for (auto* sub : {exp, abl}) {
    add_common(sub);
    sub->add_option("--repeats", o.repeats, "number of repeats");
    sub->add_option("--workers", o.workers, "concurrent repeats (0: all cores)");
    sub->add_flag("--no-svg", o.no_svg, "skip boxplot.svg");
  }
  exp->add_option("--mode", o.mode, "full|synth-only|delete-only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*probe) cmd_probe(o);
    else if (*div) cmd_diversify(o);
    else if (*base) cmd_baseline(o);
    else if (*exp) cmd_experiment(o, false);
    else if (*abl) cmd_experiment(o, true);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return 0;
}
