#include "robias/probe.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "robias/error.hpp"

namespace robias {

std::vector<double> NoiseSpec::default_levels() {
  std::vector<double> levels;
  for (int k = 1; k <= 40; ++k) levels.push_back(k / 100.0);
  return levels;
}

void NoiseSpec::validate() const {
  if (levels.empty()) throw ArgumentError("NoiseSpec: no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] <= 1.0)) {
      throw ArgumentError("NoiseSpec: levels must lie in (0, 1]");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw ArgumentError("NoiseSpec: levels must be strictly increasing");
    }
  }
  if (samples_per_input < 1) throw ArgumentError("NoiseSpec: samples_per_input must be >= 1");
}

Vector apply_noise(const Vector& x, double level, const Vector& scale, Rng& rng) {
  if (!(level >= 0.0)) throw ArgumentError("apply_noise: negative level");
  if (scale.size() != x.size()) throw ArgumentError("apply_noise: scale length mismatch");
  Vector out = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double band = level * scale[j];
    out[j] += rng.uniform(-band, band);
  }
  return out;
}

Vector gradient_sign_attack(const Mlp& model, const Vector& x, int true_class, double level,
                            const Vector& scale) {
  if (!(level >= 0.0)) throw ArgumentError("gradient_sign_attack: negative level");
  if (scale.size() != x.size()) throw ArgumentError("gradient_sign_attack: scale length mismatch");
  const Vector grad = model.input_gradient(x, true_class);
  Vector out = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (grad[j] > 0.0) {
      out[j] += level * scale[j];
    } else if (grad[j] < 0.0) {
      out[j] -= level * scale[j];
    }
  }
  return out;
}

double bias_metric(std::span<const double> ratios) {
  const std::size_t n = ratios.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (double r : ratios) total += r;
  double worst = 0.0;
  for (double r : ratios) {
    const double others = (total - r) / static_cast<double>(n - 1);
    worst = std::max(worst, std::abs(r - others));
  }
  return worst;
}

BiasMetrics compute_bias(std::span<const std::size_t> misclassified,
                         std::span<const std::size_t> correct) {
  if (misclassified.size() != correct.size()) {
    throw ArgumentError("compute_bias: count vectors differ in length");
  }
  BiasMetrics m;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    if (correct[i] == 0) {
      throw BiasError("compute_bias: class " + std::to_string(i) +
                      " has no correctly classified probes; B_R is undefined");
    }
    const auto mis = static_cast<double>(misclassified[i]);
    const auto ok = static_cast<double>(correct[i]);
    m.ratios.push_back(mis / ok);
    m.percentages.push_back(100.0 * mis / (mis + ok));
  }
  m.b_r = bias_metric(m.ratios);
  return m;
}

ProbeReport noise_sweep(const Mlp& model, const Dataset& test, const NoiseSpec& spec,
                        const Vector& feature_scale, std::uint64_t seed) {
  spec.validate();
  if (test.dims() != model.input_dim() || test.num_classes() != model.num_classes()) {
    throw ArgumentError("noise_sweep: dataset shape does not match the model");
  }
  if (spec.scaling == NoiseScaling::feature_max &&
      static_cast<std::size_t>(feature_scale.size()) != test.dims()) {
    throw ArgumentError("noise_sweep: feature scale length mismatch");
  }
  const std::size_t classes = test.num_classes();

  ProbeReport rep;
  rep.probed_inputs.assign(classes, 0);
  std::vector<std::size_t> probed;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    if (model.classify(test.row(i)) == test.label(i)) {
      probed.push_back(i);
      ++rep.probed_inputs[static_cast<std::size_t>(test.label(i))];
    }
  }
  if (probed.empty()) {
    throw ProbeError("noise_sweep: the model classifies no input correctly");
  }

  const bool random = spec.attack != AttackMode::gradient_sign;
  const bool sign = spec.attack != AttackMode::random_sweep;
  const Rng root(seed);
  rep.misclassified.assign(classes, 0);
  rep.correct.assign(classes, 0);
  std::size_t first_bad = spec.levels.size();

  for (std::size_t li = 0; li < spec.levels.size(); ++li) {
    const double level = spec.levels[li];
    LevelStats stats{level, std::vector<std::size_t>(classes, 0),
                     std::vector<std::size_t>(classes, 0)};
    for (std::size_t i : probed) {
      const Vector x = test.row(i);
      const int truth = test.label(i);
      const auto c = static_cast<std::size_t>(truth);
      const Vector scale =
          spec.scaling == NoiseScaling::per_sample ? Vector(x.cwiseAbs()) : feature_scale;
      Rng rng = root.substream({i, li});

      auto record = [&](Vector noisy, bool by_sign) {
        ++stats.probed[c];
        const int predicted = model.classify(noisy);
        if (predicted != truth) {
          ++stats.misclassified[c];
          rep.counterexamples.push_back({i, truth, predicted, level, by_sign, std::move(noisy)});
        }
      };
      if (random) {
        for (int s = 0; s < spec.samples_per_input; ++s) {
          record(apply_noise(x, level, scale, rng), false);
        }
      }
      if (sign) record(gradient_sign_attack(model, x, truth, level, scale), true);
    }
    std::size_t level_mis = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      rep.misclassified[c] += stats.misclassified[c];
      rep.correct[c] += stats.probed[c] - stats.misclassified[c];
      level_mis += stats.misclassified[c];
    }
    if (level_mis > 0 && first_bad == spec.levels.size()) first_bad = li;
    rep.per_level.push_back(std::move(stats));
  }

  if (first_bad == spec.levels.size()) {
    rep.delta_x_max = spec.levels.back();
  } else if (first_bad == 0) {
    rep.delta_x_max = 0.0;
  } else {
    rep.delta_x_max = spec.levels[first_bad - 1];
  }

  const BiasMetrics m = compute_bias(rep.misclassified, rep.correct);
  rep.ratios = m.ratios;
  rep.percentages = m.percentages;
  rep.b_r = m.b_r;
  return rep;
}

nlohmann::json probe_to_json(const ProbeReport& report, const Dataset& probed,
                             bool include_counterexamples) {
  nlohmann::json doc;
  doc["class_names"] = probed.class_names();
  doc["delta_x_max"] = report.delta_x_max;
  doc["ratios"] = report.ratios;
  doc["percentages"] = report.percentages;
  doc["b_r"] = report.b_r;
  doc["probed_inputs"] = report.probed_inputs;
  doc["misclassified_variants"] = report.misclassified;
  doc["correct_variants"] = report.correct;
  doc["counterexample_count"] = report.counterexamples.size();
  auto& levels = doc["per_level"] = nlohmann::json::array();
  for (const auto& s : report.per_level) {
    levels.push_back({{"level", s.level}, {"probed", s.probed}, {"misclassified", s.misclassified}});
  }
  if (include_counterexamples) {
    auto& ces = doc["counterexamples"] = nlohmann::json::array();
    for (const auto& ce : report.counterexamples) {
      ces.push_back({{"input_index", ce.input_index},
                     {"true_class", ce.true_class},
                     {"predicted_class", ce.predicted_class},
                     {"level", ce.level},
                     {"gradient_sign", ce.gradient_sign},
                     {"noisy", std::vector<double>(ce.noisy.data(), ce.noisy.data() + ce.noisy.size())}});
    }
  }
  return doc;
}

void write_counterexamples_csv(const ProbeReport& report, const Dataset& probed,
                               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "input_index,true_class,predicted_class,level,attack";
  for (const auto& name : probed.feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& ce : report.counterexamples) {
    out << ce.input_index << ',' << probed.class_names()[static_cast<std::size_t>(ce.true_class)]
        << ',' << probed.class_names()[static_cast<std::size_t>(ce.predicted_class)] << ','
        << ce.level << ',' << (ce.gradient_sign ? "gradient_sign" : "random");
    for (Eigen::Index j = 0; j < ce.noisy.size(); ++j) out << ',' << ce.noisy[j];
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace robias
