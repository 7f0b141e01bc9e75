#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "robias/bounds.hpp"
#include "robias/dataset.hpp"
#include "robias/kmeans.hpp"
#include "robias/probe.hpp"
#include "robias/rng.hpp"

namespace robias {

enum class DiversifyMode { full, synth_only, delete_only };

const char* to_string(DiversifyMode mode);
DiversifyMode parse_diversify_mode(const std::string& text);

struct DiversifyConfig {
  std::size_t top_k = 2;              // features refined by dominant-cluster bounds
  std::size_t clusters = 2;           // 1-D clusters for compactness scoring
  double removal_fraction = 0.5;      // share of each class removed as redundant
  double corr_threshold = 10.0;       // accepted correlation difference, percent
  std::size_t synth_base = 0;         // 0: size of the smallest class in the input
  int max_retries = 100;
  DiversifyMode mode = DiversifyMode::full;
  KmeansOptions kmeans;

  void validate(std::size_t dims) const;
};

struct ValidationReport {
  double corr_diff = 0.0;  // percent; +inf when fewer than two synthetic rows
  int attempts = 0;
  bool passed = false;
  std::string diagnostic;
};

struct DiversifiedDataset {
  Dataset data;
  ValidationReport validation;
  ClassBounds bounds;  // final bounds used for sampling
  std::vector<BoundsEvent> events;
  std::vector<TighteningRule> rules;
  std::vector<std::size_t> top_features;
  std::vector<std::size_t> synth_counts;      // chi per class
  std::vector<std::size_t> counts_before_removal;
  std::vector<std::size_t> counts_after_removal;
};

// chi_i = round(base * mu_i / min positive mu); classes with mu_i = 0 get
// base; all zeros when no class has a positive mu.
std::vector<std::size_t> synth_counts(std::span<const double> mu, std::size_t base);

// count rows, each coordinate uniform over its IntervalSet (members chosen
// with probability proportional to length; uniformly when all are points).
Matrix sample_synthetic(std::span<const IntervalSet> bounds, std::size_t count, Rng& rng);

// Clusters the rows into max(1, round(m * (1 - x))) groups and keeps the row
// nearest each centroid (ties to the lowest index). Returns ascending indices.
std::vector<std::size_t> minimize_redundancy(const Matrix& rows, double removal_fraction,
                                             std::uint64_t seed, const KmeansOptions& options = {});

// max over off-diagonal pairs, unflagged in both inputs, of
// |rho_a - rho_ref| / max(|rho_ref|, 0.1) * 100. Zero when no pair qualifies.
double corr_diff(const Matrix& candidate, const Matrix& reference);

ValidationReport validate_synthetic(const Matrix& synth, const Matrix& original, double threshold);

struct ThresholdSuggestion {
  double threshold = 0.0;
  // Set when the train/test correlations already disagree so much that
  // correlation is a poor realism check for this data.
  bool weak_correlation_warning = false;
  std::string message;
};

ThresholdSuggestion suggest_threshold(const Matrix& train, const Matrix& test);

// Bounds -> tightening -> top-k refinement -> chi allocation -> sampling with
// correlation validation (regenerated up to max_retries) -> redundancy removal.
// `feature_scale` converts the relative tolerance to feature units.
DiversifiedDataset diversify(const Dataset& train, const ProbeReport& probe,
                             const DiversifyConfig& cfg, const Vector& feature_scale,
                             std::uint64_t seed);

nlohmann::json validation_to_json(const ValidationReport& report);
nlohmann::json diversified_to_json(const DiversifiedDataset& result);

}  // namespace robias
