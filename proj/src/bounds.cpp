#include "robias/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "robias/error.hpp"
#include "robias/rng.hpp"

namespace robias {

ClassBounds::ClassBounds(std::size_t classes, std::size_t dims)
    : sets_(classes, std::vector<IntervalSet>(dims)) {}

bool ClassBounds::contains(std::size_t cls, const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dims()) return false;
  for (std::size_t f = 0; f < dims(); ++f) {
    if (!sets_[cls][f].contains(x[static_cast<Eigen::Index>(f)])) return false;
  }
  return true;
}

ClassBounds global_extremum(const ClassPartition& part, double delta_x_max, const Vector& scales) {
  if (!(delta_x_max >= 0.0)) throw ArgumentError("global_extremum: negative tolerance");
  if (part.classes.empty()) throw ArgumentError("global_extremum: no classes");
  const std::size_t d = part.classes.front().dims();
  if (static_cast<std::size_t>(scales.size()) != d) {
    throw ArgumentError("global_extremum: scale length mismatch");
  }
  ClassBounds out(part.classes.size(), d);
  for (std::size_t c = 0; c < part.classes.size(); ++c) {
    const auto& cls = part.classes[c];
    if (cls.empty()) {
      throw ArgumentError("global_extremum: class " + std::to_string(c) + " has no rows");
    }
    for (std::size_t f = 0; f < d; ++f) {
      const auto col = cls.features().col(static_cast<Eigen::Index>(f));
      const Interval extremum(col.minCoeff(), col.maxCoeff());
      out.at(c, f) = relax_interval(extremum, delta_x_max * scales[static_cast<Eigen::Index>(f)]);
    }
  }
  return out;
}

BoundsStageResult tighten_overlaps(const ClassBounds& bounds) {
  BoundsStageResult res{bounds, {}, {}};
  const std::size_t classes = bounds.classes();
  for (std::size_t f = 0; f < bounds.dims(); ++f) {
    std::vector<Interval> base(classes);
    std::vector<IntervalSet> constrained(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      const auto& set = bounds.at(c, f);
      if (set.size() != 1) {
        throw ArgumentError("tighten_overlaps: expects one interval per class and feature");
      }
      base[c] = set.parts().front();
      constrained[c] = set;
    }

    auto constrain = [&](std::size_t c, IntervalSet with, const char* action) {
      constrained[c] = constrained[c].intersect(with);
      res.events.push_back({"tighten", c, f, action, with.to_string()});
    };

    for (std::size_t i = 0; i < classes; ++i) {
      for (std::size_t j = i + 1; j < classes; ++j) {
        const Interval& a = base[i];
        const Interval& b = base[j];
        if (a.lo < b.lo && b.lo < a.hi && a.hi < b.hi) {
          constrain(i, Interval(a.lo, b.lo), "partial");
          constrain(j, Interval(a.hi, b.hi), "partial");
          res.rules.push_back({f, i, j, false});
        } else if (b.lo < a.lo && a.lo < b.hi && b.hi < a.hi) {
          constrain(j, Interval(b.lo, a.lo), "partial");
          constrain(i, Interval(b.hi, a.hi), "partial");
          res.rules.push_back({f, i, j, false});
        } else if (a.lo < b.lo && b.hi < a.hi) {
          constrain(i, IntervalSet{Interval(a.lo, b.lo), Interval(b.hi, a.hi)}, "complete");
          res.rules.push_back({f, i, j, true});
        } else if (b.lo < a.lo && a.hi < b.hi) {
          constrain(j, IntervalSet{Interval(b.lo, a.lo), Interval(a.hi, b.hi)}, "complete");
          res.rules.push_back({f, i, j, true});
        }
      }
    }

    for (std::size_t c = 0; c < classes; ++c) {
      const bool collapsed = constrained[c].empty() ||
                             (constrained[c].total_length() == 0.0 && base[c].length() > 0.0);
      if (collapsed) {
        res.events.push_back({"tighten", c, f, "reverted",
                              "tightening left " + constrained[c].to_string()});
        constrained[c] = IntervalSet(base[c]);
      }
      res.bounds.at(c, f) = constrained[c];
    }
  }
  return res;
}

DominantCluster dominant_cluster(const Vector& values, std::size_t clusters, std::uint64_t seed,
                                 const KmeansOptions& options) {
  if (values.size() == 0) throw ArgumentError("dominant_cluster: no values");
  const std::size_t k = std::min<std::size_t>(std::max<std::size_t>(clusters, 1),
                                              static_cast<std::size_t>(values.size()));
  const Matrix pts = values;
  const KmeansResult km = kmeans(pts, k, seed, options);
  const auto sizes = km.cluster_sizes();
  const std::size_t dom = static_cast<std::size_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  DominantCluster out;
  out.centroid = km.centroids(static_cast<Eigen::Index>(dom), 0);
  out.members = sizes[dom];
  bool first = true;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (km.assignments[static_cast<std::size_t>(i)] != dom) continue;
    const double v = values[i];
    out.min = first ? v : std::min(out.min, v);
    out.max = first ? v : std::max(out.max, v);
    out.spread = std::max(out.spread, std::abs(v - out.centroid));
    first = false;
  }
  return out;
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::size_t feature, std::size_t cls) {
  return derive_seed(seed, {feature, cls});
}

}  // namespace

std::vector<double> feature_compactness(const ClassPartition& part, std::size_t clusters,
                                        std::uint64_t seed, const KmeansOptions& options) {
  if (part.classes.empty()) throw ArgumentError("feature_compactness: no classes");
  const std::size_t d = part.classes.front().dims();
  std::vector<double> score(d, 0.0);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t c = 0; c < part.classes.size(); ++c) {
      const auto& cls = part.classes[c];
      if (cls.empty()) continue;
      const Vector values = cls.features().col(static_cast<Eigen::Index>(f));
      score[f] = std::max(score[f],
                          dominant_cluster(values, clusters, cell_seed(seed, f, c), options).spread);
    }
  }
  return score;
}

std::vector<std::size_t> top_k_features(const ClassPartition& part, std::size_t k,
                                        std::size_t clusters, std::uint64_t seed,
                                        const KmeansOptions& options) {
  const auto score = feature_compactness(part, clusters, seed, options);
  if (k < 1 || k > score.size()) {
    throw ArgumentError("top_k_features: k must be in [1, " + std::to_string(score.size()) + "]");
  }
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  order.resize(k);
  return order;
}

BoundsStageResult final_bounds(const ClassBounds& bounds, std::span<const std::size_t> top,
                               const ClassPartition& part, std::size_t clusters,
                               std::uint64_t seed, const KmeansOptions& options) {
  BoundsStageResult res{bounds, {}, {}};
  for (std::size_t f : top) {
    if (f >= bounds.dims()) throw ArgumentError("final_bounds: feature index out of range");
    for (std::size_t c = 0; c < bounds.classes(); ++c) {
      const auto& cls = part.classes[c];
      if (cls.empty()) continue;
      const Vector values = cls.features().col(static_cast<Eigen::Index>(f));
      const auto dom = dominant_cluster(values, clusters, cell_seed(seed, f, c), options);
      const IntervalSet narrowed = bounds.at(c, f).intersect(Interval(dom.min, dom.max));
      if (narrowed.empty()) {
        res.events.push_back({"final", c, f, "reverted",
                              "dominant cluster [" + std::to_string(dom.min) + ", " +
                                  std::to_string(dom.max) + "] misses the bounds"});
        continue;
      }
      if (!(narrowed == bounds.at(c, f))) {
        res.events.push_back({"final", c, f, "cluster", narrowed.to_string()});
      }
      res.bounds.at(c, f) = narrowed;
    }
  }
  return res;
}

nlohmann::json bounds_to_json(const ClassBounds& bounds, const Dataset& schema_source) {
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t c = 0; c < bounds.classes(); ++c) {
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t f = 0; f < bounds.dims(); ++f) {
      nlohmann::json parts = nlohmann::json::array();
      for (const auto& p : bounds.at(c, f).parts()) parts.push_back({p.lo, p.hi});
      features.push_back({{"feature", schema_source.feature_names()[f]}, {"intervals", parts}});
    }
    doc.push_back({{"class", schema_source.class_names()[c]}, {"features", features}});
  }
  return doc;
}

nlohmann::json events_to_json(std::span<const BoundsEvent> events) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& e : events) {
    doc.push_back({{"stage", e.stage},
                   {"class", e.class_index},
                   {"feature", e.feature},
                   {"action", e.action},
                   {"detail", e.detail}});
  }
  return doc;
}

}  // namespace robias
