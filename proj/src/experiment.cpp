#include "robias/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "robias/error.hpp"
#include "robias/rng.hpp"

namespace robias {

using nlohmann::json;

const char* to_string(Approach a) {
  switch (a) {
    case Approach::original: return "original";
    case Approach::rus: return "RUS";
    case Approach::ros: return "ROS";
    case Approach::smote: return "SMOTE";
    case Approach::adasyn: return "ADASYN";
    case Approach::diversified: return "diversified";
    case Approach::synth_only: return "synth_only";
    case Approach::delete_only: return "delete_only";
  }
  return "original";
}

Approach parse_approach(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(t.begin(), t.end(), '-', '_');
  for (Approach a : kAllApproaches) {
    std::string name = to_string(a);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name == t) return a;
  }
  if (t == "full") return Approach::diversified;
  throw ConfigError("unknown approach '" + text + "'");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::infeasible: return "infeasible";
    case RunStatus::failed: return "failed";
  }
  return "ok";
}

void ExperimentConfig::validate() const {
  try {
    schedule.validate();
    noise.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (hidden_layers.empty()) throw ConfigError("network needs at least one hidden layer");
  if (data.schema.feature_columns.empty()) throw ConfigError("no feature columns configured");
  if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  if (imbalance_fraction && !(*imbalance_fraction > 0.0 && *imbalance_fraction <= 1.0)) {
    throw ConfigError("imbalance_fraction must be in (0, 1]");
  }
  if (approaches.empty()) throw ConfigError("no approaches selected");
  if (!(accuracy_threshold >= 0.0 && accuracy_threshold < 1.0)) {
    throw ConfigError("accuracy_threshold must be in [0, 1)");
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  return obj.at(key).get<T>();
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key) || doc.at(key).is_null()) return empty;
  if (!doc.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return doc.at(key);
}

ColumnRef column_ref(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0)) {
    return j.get<std::size_t>();
  }
  throw ConfigError("column references must be names or non-negative indices");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    cfg.name = value_or<std::string>(doc, "name", cfg.name);

    const json& data = section(doc, "data");
    if (!data.contains("path")) throw ConfigError("data.path is required");
    cfg.data.path = resolve(base_dir, data.at("path").get<std::string>());
    if (data.contains("test_path") && !data.at("test_path").is_null()) {
      cfg.data.test_path = resolve(base_dir, data.at("test_path").get<std::string>());
    }
    if (!data.contains("label_column")) throw ConfigError("data.label_column is required");
    cfg.data.schema.label_column = column_ref(data.at("label_column"));
    if (!data.contains("feature_columns") || !data.at("feature_columns").is_array()) {
      throw ConfigError("data.feature_columns must be an array");
    }
    for (const auto& c : data.at("feature_columns")) {
      cfg.data.schema.feature_columns.push_back(column_ref(c));
    }
    cfg.data.schema.class_order =
        value_or<std::vector<std::string>>(data, "classes", cfg.data.schema.class_order);
    cfg.data.train_fraction = value_or(data, "train_fraction", cfg.data.train_fraction);
    cfg.data.split_seed = value_or(data, "split_seed", cfg.data.split_seed);
    cfg.data.minmax_scale = value_or(data, "minmax_scale", cfg.data.minmax_scale);

    const json& net = section(doc, "network");
    cfg.hidden_layers = value_or(net, "hidden_layers", cfg.hidden_layers);
    if (net.contains("schedule")) {
      cfg.schedule.phases.clear();
      for (const auto& p : net.at("schedule")) {
        cfg.schedule.phases.push_back({p.at("learning_rate").get<double>(), p.at("epochs").get<int>()});
      }
    }
    cfg.schedule.validation_fraction =
        value_or(net, "validation_fraction", cfg.schedule.validation_fraction);
    cfg.scale_epochs = value_or(net, "scale_epochs", cfg.scale_epochs);

    const json& noise = section(doc, "noise");
    if (noise.contains("levels")) {
      const auto& lv = noise.at("levels");
      if (lv.is_array()) {
        cfg.noise.levels = lv.get<std::vector<double>>();
      } else {
        const double start = lv.at("start").get<double>();
        const double step = lv.at("step").get<double>();
        const double stop = lv.at("stop").get<double>();
        if (!(step > 0.0)) throw ConfigError("noise.levels.step must be > 0");
        cfg.noise.levels.clear();
        const auto count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (int i = 0; i < count; ++i) cfg.noise.levels.push_back(start + step * i);
      }
    }
    cfg.noise.samples_per_input = value_or(noise, "samples_per_input", cfg.noise.samples_per_input);
    const auto attack = value_or<std::string>(noise, "attack", "both");
    if (attack == "both") {
      cfg.noise.attack = AttackMode::both;
    } else if (attack == "random_sweep" || attack == "random") {
      cfg.noise.attack = AttackMode::random_sweep;
    } else if (attack == "gradient_sign") {
      cfg.noise.attack = AttackMode::gradient_sign;
    } else {
      throw ConfigError("noise.attack must be both, random_sweep or gradient_sign");
    }
    const auto scaling = value_or<std::string>(noise, "scaling", "feature_max");
    if (scaling == "feature_max") {
      cfg.noise.scaling = NoiseScaling::feature_max;
    } else if (scaling == "per_sample") {
      cfg.noise.scaling = NoiseScaling::per_sample;
    } else {
      throw ConfigError("noise.scaling must be feature_max or per_sample");
    }

    const json& div = section(doc, "diversify");
    cfg.diversify.top_k = value_or(div, "top_k", cfg.diversify.top_k);
    cfg.diversify.clusters = value_or(div, "clusters", cfg.diversify.clusters);
    cfg.diversify.removal_fraction = value_or(div, "removal_fraction", cfg.diversify.removal_fraction);
    if (div.contains("corr_threshold") && !div.at("corr_threshold").is_null()) {
      cfg.diversify.corr_threshold = div.at("corr_threshold").get<double>();
      cfg.auto_corr_threshold = false;
    }
    cfg.diversify.synth_base = value_or(div, "synth_base", cfg.diversify.synth_base);
    cfg.diversify.max_retries = value_or(div, "max_retries", cfg.diversify.max_retries);
    cfg.diversify.mode = parse_diversify_mode(value_or<std::string>(div, "mode", "full"));

    const json& base = section(doc, "baselines");
    const json& rus = section(base, "rus");
    const auto rus_mode = value_or<std::string>(rus, "mode", "equalize");
    if (rus_mode == "equalize") {
      cfg.rus_plan.method = ResampleMethod::rus_equalize;
    } else if (rus_mode == "fraction") {
      cfg.rus_plan.method = ResampleMethod::rus_fraction;
    } else {
      throw ConfigError("baselines.rus.mode must be equalize or fraction");
    }
    cfg.rus_plan.fraction = value_or(rus, "fraction", cfg.rus_plan.fraction);
    cfg.k_neighbors = value_or(base, "k_neighbors", cfg.k_neighbors);
    cfg.adasyn_balance = value_or(base, "adasyn_balance", cfg.adasyn_balance);
    if (base.contains("imbalance_fraction") && !base.at("imbalance_fraction").is_null()) {
      cfg.imbalance_fraction = base.at("imbalance_fraction").get<double>();
    }
    cfg.imbalance_seed = value_or(base, "imbalance_seed", cfg.imbalance_seed);

    const json& exp = section(doc, "experiment");
    cfg.repeats = value_or(exp, "repeats", cfg.repeats);
    cfg.seed = value_or(exp, "seed", cfg.seed);
    cfg.workers = value_or(exp, "workers", cfg.workers);
    cfg.accuracy_threshold = value_or(exp, "accuracy_threshold", cfg.accuracy_threshold);
    if (exp.contains("approaches")) {
      cfg.approaches.clear();
      for (const auto& a : exp.at("approaches")) cfg.approaches.push_back(parse_approach(a.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Data

ExperimentData make_experiment_data(Dataset train, Dataset test) {
  ExperimentData d{std::move(train), std::move(test), {}};
  d.feature_scale = feature_max_abs(d.train);
  return d;
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  Dataset train;
  Dataset test;
  if (cfg.data.test_path) {
    DatasetSchema schema = cfg.data.schema;
    train = load_csv(cfg.data.path, schema);
    // Pin the class order so both files index classes identically.
    schema.class_order = train.class_names();
    test = load_csv(*cfg.data.test_path, schema);
  } else {
    auto split = split_stratified(load_csv(cfg.data.path, cfg.data.schema), cfg.data.train_fraction,
                                  cfg.data.split_seed);
    train = std::move(split.train);
    test = std::move(split.test);
  }
  if (cfg.data.minmax_scale) {
    const auto scaler = MinMaxScaler::fit(train);
    train = scaler.apply(train);
    test = scaler.apply(test);
  }
  return make_experiment_data(std::move(train), std::move(test));
}

Dataset random_subset(const Dataset& ds, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(ds.rows());
  std::iota(idx.begin(), idx.end(), 0);
  const auto take = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.rows()))), 1, ds.rows());
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.index(ds.rows() - i)]);
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return ds.select(idx);
}

// ---------------------------------------------------------------------------
// Runs

GatedModel train_gated(const ExperimentConfig& cfg, const Dataset& train_set, const Dataset& test,
                       const TrainSchedule& schedule, std::uint64_t seed) {
  std::vector<std::size_t> sizes{train_set.dims()};
  sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
  sizes.push_back(train_set.num_classes());

  GatedModel out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const MlpSpec spec{sizes, derive_seed(seed, {key_of("init"), static_cast<std::uint64_t>(attempt)})};
    auto result = train(init_mlp(spec), train_set, schedule,
                        derive_seed(seed, {key_of("holdout"), static_cast<std::uint64_t>(attempt)}),
                        &test);
    out.model = std::move(result.model);
    out.report = std::move(result.report);
    out.reseeds = attempt;
    out.epochs = schedule.total_epochs();
    out.accuracy_ok = out.report.train_accuracy > cfg.accuracy_threshold &&
                      out.report.test_accuracy.value_or(0.0) > cfg.accuracy_threshold;
    if (out.accuracy_ok) break;
  }
  return out;
}

namespace {

struct RepeatOutput {
  std::vector<RunRecord> runs;
  double seconds = 0.0;
};

bool is_diversify(Approach a) {
  return a == Approach::diversified || a == Approach::synth_only || a == Approach::delete_only;
}

RunRecord evaluate(const ExperimentConfig& cfg, const ExperimentData& data, const Dataset& train_set,
                   Approach approach, int repeat, std::uint64_t seed) {
  RunRecord rec;
  rec.approach = approach;
  rec.repeat = repeat;
  rec.seed = seed;
  rec.train_rows = train_set.rows();
  rec.synthetic_rows = train_set.count_synthetic();
  TrainSchedule schedule = cfg.schedule;
  if (cfg.scale_epochs && approach != Approach::original) {
    // Only larger training sets shorten the schedule.
    schedule = schedule.scaled(std::min(1.0, static_cast<double>(data.train.rows()) /
                                                 static_cast<double>(train_set.rows())));
  }
  const GatedModel gm = train_gated(cfg, train_set, data.test, schedule, seed);
  rec.train_accuracy = gm.report.train_accuracy;
  rec.test_accuracy = gm.report.test_accuracy.value_or(0.0);
  rec.accuracy_ok = gm.accuracy_ok;
  rec.reseeds = gm.reseeds;
  rec.epochs = gm.epochs;
  const ProbeReport probe = noise_sweep(gm.model, data.test, cfg.noise, data.feature_scale,
                                        derive_seed(seed, {key_of("probe")}));
  rec.b_r = probe.b_r;
  rec.delta_x_max = probe.delta_x_max;
  rec.ratios = probe.ratios;
  return rec;
}

RepeatOutput run_repeat(const ExperimentConfig& cfg, const ExperimentData& data,
                        const std::optional<Dataset>& baseline_source, double corr_threshold,
                        int repeat) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t repeat_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(repeat)});
  auto approach_seed = [&](Approach a) {
    return derive_seed(repeat_seed, {static_cast<std::uint64_t>(a)});
  };

  RepeatOutput out;
  auto failed = [&](Approach a, RunStatus status, const std::string& why) {
    RunRecord rec;
    rec.approach = a;
    rec.repeat = repeat;
    rec.status = status;
    rec.note = why;
    rec.seed = approach_seed(a);
    return rec;
  };

  // The original network is needed by every diversification leg even when
  // it is not itself reported.
  std::optional<GatedModel> original;
  std::optional<ProbeReport> original_probe;
  std::string original_error;
  const bool need_original =
      std::any_of(cfg.approaches.begin(), cfg.approaches.end(),
                  [](Approach a) { return a == Approach::original || is_diversify(a); });
  if (need_original) {
    try {
      original = train_gated(cfg, data.train, data.test, cfg.schedule, approach_seed(Approach::original));
      original_probe = noise_sweep(original->model, data.test, cfg.noise, data.feature_scale,
                                   derive_seed(approach_seed(Approach::original), {key_of("probe")}));
    } catch (const Error& e) {
      original_error = e.what();
    }
  }

  for (Approach a : kAllApproaches) {
    if (std::find(cfg.approaches.begin(), cfg.approaches.end(), a) == cfg.approaches.end()) continue;
    const std::uint64_t seed = approach_seed(a);
    try {
      if (a == Approach::original) {
        if (!original_probe) {
          out.runs.push_back(failed(a, RunStatus::failed, original_error));
          continue;
        }
        RunRecord rec;
        rec.approach = a;
        rec.repeat = repeat;
        rec.seed = seed;
        rec.train_rows = data.train.rows();
        rec.train_accuracy = original->report.train_accuracy;
        rec.test_accuracy = original->report.test_accuracy.value_or(0.0);
        rec.accuracy_ok = original->accuracy_ok;
        rec.reseeds = original->reseeds;
        rec.epochs = original->epochs;
        rec.b_r = original_probe->b_r;
        rec.delta_x_max = original_probe->delta_x_max;
        rec.ratios = original_probe->ratios;
        out.runs.push_back(std::move(rec));
      } else if (is_diversify(a)) {
        if (!original_probe) {
          out.runs.push_back(failed(a, RunStatus::failed, "original network: " + original_error));
          continue;
        }
        DiversifyConfig dcfg = cfg.diversify;
        dcfg.corr_threshold = corr_threshold;
        dcfg.mode = a == Approach::diversified  ? DiversifyMode::full
                    : a == Approach::synth_only ? DiversifyMode::synth_only
                                                : DiversifyMode::delete_only;
        const auto div = diversify(data.train, *original_probe, dcfg, data.feature_scale,
                                   derive_seed(seed, {key_of("diversify")}));
        RunRecord rec = evaluate(cfg, data, div.data, a, repeat, seed);
        rec.validation = div.validation;
        out.runs.push_back(std::move(rec));
      } else {
        const Dataset& source = baseline_source ? *baseline_source : data.train;
        ResamplePlan plan;
        switch (a) {
          case Approach::rus: plan = cfg.rus_plan; break;
          case Approach::ros: plan.method = ResampleMethod::ros; break;
          case Approach::smote: plan.method = ResampleMethod::smote; break;
          default: plan.method = ResampleMethod::adasyn; break;
        }
        plan.k_neighbors = cfg.k_neighbors;
        plan.balance = cfg.adasyn_balance;
        const Dataset resampled = resample(source, plan, derive_seed(seed, {key_of("resample")}));
        out.runs.push_back(evaluate(cfg, data, resampled, a, repeat, seed));
      }
    } catch (const InfeasibleError& e) {
      out.runs.push_back(failed(a, RunStatus::infeasible, e.what()));
    } catch (const NeighborError& e) {
      out.runs.push_back(failed(a, RunStatus::infeasible, e.what()));
    } catch (const Error& e) {
      out.runs.push_back(failed(a, RunStatus::failed, e.what()));
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

ApproachSummary summarize(Approach a, const std::vector<RunRecord>& runs) {
  ApproachSummary s;
  s.approach = a;
  for (const auto& r : runs) {
    if (r.approach != a) continue;
    if (r.status == RunStatus::infeasible) {
      ++s.infeasible;
    } else if (r.status == RunStatus::failed) {
      ++s.failed;
    } else {
      s.values.push_back(r.b_r);
      if (!r.accuracy_ok) ++s.accuracy_flags;
    }
  }
  if (!s.values.empty()) {
    const auto n = static_cast<double>(s.values.size());
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std = s.values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.min = *std::min_element(s.values.begin(), s.values.end());
    s.max = *std::max_element(s.values.begin(), s.values.end());
  }
  return s;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const ExperimentData& data) {
  cfg.validate();
  ExperimentReport rep;
  rep.name = cfg.name;
  rep.master_seed = cfg.seed;
  rep.repeats = cfg.repeats;
  rep.class_names = data.train.class_names();

  rep.corr_threshold = cfg.diversify.corr_threshold;
  if (cfg.auto_corr_threshold) {
    const auto s = suggest_threshold(data.train.features(), data.test.features());
    // A zero suggestion (identical correlations) would reject everything.
    rep.corr_threshold = std::max(s.threshold, 1e-6);
    rep.corr_warning = s.weak_correlation_warning;
  }

  std::optional<Dataset> baseline_source;
  if (cfg.imbalance_fraction) {
    baseline_source = random_subset(data.train, *cfg.imbalance_fraction, cfg.imbalance_seed);
  }

  std::vector<RepeatOutput> outputs(static_cast<std::size_t>(cfg.repeats));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<int>(std::min<unsigned>(
      cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : hw, static_cast<unsigned>(cfg.repeats)));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int r = next++; r < cfg.repeats; r = next++) {
      try {
        outputs[static_cast<std::size_t>(r)] =
            run_repeat(cfg, data, baseline_source, rep.corr_threshold, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (Approach a : kAllApproaches) {
    for (const auto& o : outputs) {
      for (const auto& r : o.runs) {
        if (r.approach == a) rep.runs.push_back(r);
      }
    }
  }
  for (const auto& o : outputs) rep.repeat_seconds.push_back(o.seconds);
  for (Approach a : kAllApproaches) {
    if (std::find(cfg.approaches.begin(), cfg.approaches.end(), a) == cfg.approaches.end()) continue;
    rep.summaries.push_back(summarize(a, rep.runs));
  }
  for (const auto& r : rep.runs) {
    if (r.approach == Approach::original && r.repeat == 0 && r.status == RunStatus::ok) {
      rep.original_canonical = r.b_r;
    }
  }
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, load_experiment_data(cfg));
}

}  // namespace robias
