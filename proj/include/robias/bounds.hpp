#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "robias/dataset.hpp"
#include "robias/interval.hpp"
#include "robias/kmeans.hpp"

namespace robias {

// Valid synthetic-input domain: one IntervalSet per (class, feature).
class ClassBounds {
 public:
  ClassBounds() = default;
  ClassBounds(std::size_t classes, std::size_t dims);

  std::size_t classes() const { return sets_.size(); }
  std::size_t dims() const { return sets_.empty() ? 0 : sets_.front().size(); }

  const IntervalSet& at(std::size_t cls, std::size_t feature) const { return sets_[cls][feature]; }
  IntervalSet& at(std::size_t cls, std::size_t feature) { return sets_[cls][feature]; }
  const std::vector<IntervalSet>& of_class(std::size_t cls) const { return sets_[cls]; }

  // Every coordinate of x lies in the class's set for that feature.
  bool contains(std::size_t cls, const Vector& x) const;

 private:
  std::vector<std::vector<IntervalSet>> sets_;
};

// Something a bound-shaping stage did to one (class, feature) cell.
struct BoundsEvent {
  std::string stage;  // "tighten" or "final"
  std::size_t class_index = 0;
  std::size_t feature = 0;
  std::string action;  // "partial", "complete", "cluster", "reverted"
  std::string detail;
};

// A pairwise tightening rule that fired on a feature.
struct TighteningRule {
  std::size_t feature = 0;
  std::size_t first = 0;   // lower class index of the pair
  std::size_t second = 0;
  bool complete = false;   // containment rather than partial overlap
};

struct BoundsStageResult {
  ClassBounds bounds;
  std::vector<BoundsEvent> events;
  std::vector<TighteningRule> rules;  // tighten_overlaps only
};

// Per class and feature: the class's [min, max] widened by delta_x_max * s_f.
ClassBounds global_extremum(const ClassPartition& part, double delta_x_max, const Vector& scales);

// Removes pairwise overlaps feature by feature. For each class pair (i < j):
//   partial overlap lo_a < lo_b < hi_a < hi_b: a -> [lo_a, lo_b], b -> [hi_a, hi_b]
//   containment lo_a < lo_b <= hi_b < hi_a:    a -> [lo_a, lo_b] u [hi_b, hi_a]
// where a/b is whichever of the pair sits left/outside. Each rule is evaluated
// on the incoming single intervals and a class's result is the intersection
// of all constraints placed on it. A cell that would become empty (or lose
// all of its length) keeps its incoming interval and is logged.
BoundsStageResult tighten_overlaps(const ClassBounds& bounds);

// 1-D clustering summary of one class's values on one feature.
struct DominantCluster {
  double centroid = 0.0;
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;  // farthest member's distance from the centroid
  std::size_t members = 0;
};

DominantCluster dominant_cluster(const Vector& values, std::size_t clusters, std::uint64_t seed,
                                 const KmeansOptions& options = {});

// compactness(f) = max over classes of the dominant cluster's spread.
std::vector<double> feature_compactness(const ClassPartition& part, std::size_t clusters,
                                        std::uint64_t seed, const KmeansOptions& options = {});

// The k features with the smallest compactness (ties to lower index), in
// ascending compactness order.
std::vector<std::size_t> top_k_features(const ClassPartition& part, std::size_t k,
                                        std::size_t clusters, std::uint64_t seed,
                                        const KmeansOptions& options = {});

// Intersects each top feature's bounds with the [min, max] of the class's
// dominant cluster on that feature. Empty results revert and are logged.
BoundsStageResult final_bounds(const ClassBounds& bounds, std::span<const std::size_t> top,
                               const ClassPartition& part, std::size_t clusters,
                               std::uint64_t seed, const KmeansOptions& options = {});

nlohmann::json bounds_to_json(const ClassBounds& bounds, const Dataset& schema_source);
nlohmann::json events_to_json(std::span<const BoundsEvent> events);

}  // namespace robias
