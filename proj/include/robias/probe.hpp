#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "robias/dataset.hpp"
#include "robias/mlp.hpp"
#include "robias/rng.hpp"

namespace robias {

enum class AttackMode { random_sweep, gradient_sign, both };

// How the per-feature noise magnitude s_j is obtained.
enum class NoiseScaling {
  feature_max,  // s_j = max |value| of feature j over the training set
  per_sample,   // s_j = |x_j| of the probed input
};

struct NoiseSpec {
  std::vector<double> levels = default_levels();  // relative fractions, increasing
  int samples_per_input = 20;
  AttackMode attack = AttackMode::both;
  NoiseScaling scaling = NoiseScaling::feature_max;

  // 0.01, 0.02, ..., 0.40
  static std::vector<double> default_levels();
  void validate() const;
};

struct Counterexample {
  std::size_t input_index = 0;  // row in the probed dataset
  int true_class = 0;
  int predicted_class = 0;
  double level = 0.0;
  bool gradient_sign = false;  // produced by the sign attack rather than random noise
  Vector noisy;
};

// Per-class variant counts at one noise level.
struct LevelStats {
  double level = 0.0;
  std::vector<std::size_t> probed;
  std::vector<std::size_t> misclassified;
};

struct BiasMetrics {
  std::vector<double> ratios;       // R_i = misclassified_i / correct_i
  std::vector<double> percentages;  // mu_i = 100 * misclassified_i / probed_i
  double b_r = 0.0;
};

struct ProbeReport {
  double delta_x_max = 0.0;
  std::vector<double> ratios;
  std::vector<double> percentages;
  double b_r = 0.0;
  std::vector<std::size_t> probed_inputs;  // clean-correct inputs per class
  std::vector<std::size_t> misclassified;  // noisy variants per class, all levels
  std::vector<std::size_t> correct;
  std::vector<Counterexample> counterexamples;
  std::vector<LevelStats> per_level;
};

// x + eta with eta_j uniform in [-level * s_j, level * s_j].
Vector apply_noise(const Vector& x, double level, const Vector& scale, Rng& rng);

// x + level * s (.) sign(grad_x loss); coordinates with zero gradient stay put.
Vector gradient_sign_attack(const Mlp& model, const Vector& x, int true_class, double level,
                            const Vector& scale);

// max_i |R_i - mean_{j != i} R_j|; zero for a single class.
double bias_metric(std::span<const double> ratios);

BiasMetrics compute_bias(std::span<const std::size_t> misclassified,
                         std::span<const std::size_t> correct);

// Probes every input the clean model classifies correctly at each noise level
// and derives the tolerance, per-class ratios and B_R. `feature_scale` holds
// s_j for NoiseScaling::feature_max and is ignored for per_sample.
// Each (input, level) pair draws from its own sub-stream of `seed`.
ProbeReport noise_sweep(const Mlp& model, const Dataset& test, const NoiseSpec& spec,
                        const Vector& feature_scale, std::uint64_t seed);

nlohmann::json probe_to_json(const ProbeReport& report, const Dataset& probed,
                             bool include_counterexamples = false);
void write_counterexamples_csv(const ProbeReport& report, const Dataset& probed,
                               const std::filesystem::path& path);

}  // namespace robias
