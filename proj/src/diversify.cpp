#include "robias/diversify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "robias/correlation.hpp"
#include "robias/error.hpp"

namespace robias {

const char* to_string(DiversifyMode mode) {
  switch (mode) {
    case DiversifyMode::full: return "full";
    case DiversifyMode::synth_only: return "synth-only";
    case DiversifyMode::delete_only: return "delete-only";
  }
  return "full";
}

DiversifyMode parse_diversify_mode(const std::string& text) {
  if (text == "full") return DiversifyMode::full;
  if (text == "synth-only" || text == "synth_only") return DiversifyMode::synth_only;
  if (text == "delete-only" || text == "delete_only") return DiversifyMode::delete_only;
  throw ArgumentError("unknown diversify mode '" + text + "'");
}

void DiversifyConfig::validate(std::size_t dims) const {
  if (top_k < 1 || top_k > dims) {
    throw ArgumentError("diversify: top_k must be in [1, " + std::to_string(dims) + "]");
  }
  if (clusters < 1) throw ArgumentError("diversify: clusters must be >= 1");
  if (!(removal_fraction >= 0.0 && removal_fraction < 1.0)) {
    throw ArgumentError("diversify: removal_fraction must be in [0, 1)");
  }
  if (!(corr_threshold > 0.0)) throw ArgumentError("diversify: corr_threshold must be > 0");
  if (max_retries < 1) throw ArgumentError("diversify: max_retries must be >= 1");
}

std::vector<std::size_t> synth_counts(std::span<const double> mu, std::size_t base) {
  double min_positive = std::numeric_limits<double>::infinity();
  for (double m : mu) {
    if (m < 0.0) throw ArgumentError("synth_counts: negative percentage");
    if (m > 0.0) min_positive = std::min(min_positive, m);
  }
  std::vector<std::size_t> chi(mu.size(), 0);
  if (!std::isfinite(min_positive)) return chi;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    chi[i] = mu[i] > 0.0
                 ? static_cast<std::size_t>(std::llround(static_cast<double>(base) * mu[i] / min_positive))
                 : base;
  }
  return chi;
}

Matrix sample_synthetic(std::span<const IntervalSet> bounds, std::size_t count, Rng& rng) {
  for (std::size_t f = 0; f < bounds.size(); ++f) {
    if (bounds[f].empty()) {
      throw GenerationError("sample_synthetic: feature " + std::to_string(f) + " has empty bounds");
    }
  }
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(bounds.size()));
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t f = 0; f < bounds.size(); ++f) {
      const auto& parts = bounds[f].parts();
      const double total = bounds[f].total_length();
      std::size_t pick = 0;
      if (parts.size() > 1) {
        if (total > 0.0) {
          double u = rng.uniform01() * total;
          while (pick + 1 < parts.size() && u >= parts[pick].length()) {
            u -= parts[pick].length();
            ++pick;
          }
        } else {
          pick = static_cast<std::size_t>(rng.index(parts.size()));
        }
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
          rng.uniform(parts[pick].lo, parts[pick].hi);
    }
  }
  return out;
}

std::vector<std::size_t> minimize_redundancy(const Matrix& rows, double removal_fraction,
                                             std::uint64_t seed, const KmeansOptions& options) {
  if (!(removal_fraction >= 0.0 && removal_fraction < 1.0)) {
    throw ArgumentError("minimize_redundancy: removal fraction must be in [0, 1)");
  }
  const auto m = static_cast<std::size_t>(rows.rows());
  if (m == 0) throw ArgumentError("minimize_redundancy: no rows");
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(m) * (1.0 - removal_fraction))));
  if (k >= m) {
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  const KmeansResult km = kmeans(rows, k, seed, options);
  std::vector<std::size_t> keep(k, m);
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = km.assignments[i];
    const double dist =
        (rows.row(static_cast<Eigen::Index>(i)) - km.centroids.row(static_cast<Eigen::Index>(c)))
            .squaredNorm();
    if (dist < best[c]) {
      best[c] = dist;
      keep[c] = i;
    }
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

double corr_diff(const Matrix& candidate, const Matrix& reference) {
  if (candidate.cols() != reference.cols()) throw ArgumentError("corr_diff: column mismatch");
  const CorrMatrix a = pearson_corr(candidate);
  const CorrMatrix b = pearson_corr(reference);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < candidate.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < candidate.cols(); ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (a.zero_variance[ui] || a.zero_variance[uj] || b.zero_variance[ui] || b.zero_variance[uj]) {
        continue;
      }
      const double ref = b.coefficients(i, j);
      const double diff = std::abs(a.coefficients(i, j) - ref) / std::max(std::abs(ref), 0.1) * 100.0;
      worst = std::max(worst, diff);
    }
  }
  return worst;
}

ValidationReport validate_synthetic(const Matrix& synth, const Matrix& original, double threshold) {
  ValidationReport rep;
  rep.attempts = 1;
  if (synth.rows() < 2) {
    rep.corr_diff = std::numeric_limits<double>::infinity();
    rep.passed = false;
    rep.diagnostic = "fewer than two synthetic rows; correlation is undefined";
    return rep;
  }
  rep.corr_diff = corr_diff(synth, original);
  rep.passed = rep.corr_diff <= threshold;
  return rep;
}

ThresholdSuggestion suggest_threshold(const Matrix& train, const Matrix& test) {
  ThresholdSuggestion s;
  s.threshold = corr_diff(test, train);
  if (s.threshold > 100.0) {
    s.weak_correlation_warning = true;
    s.message =
        "train/test feature correlations differ by more than 100%; the features may simply be "
        "independent or need pre-processing, so correlation is a weak realism check here";
  }
  return s;
}

DiversifiedDataset diversify(const Dataset& train, const ProbeReport& probe,
                             const DiversifyConfig& cfg, const Vector& feature_scale,
                             std::uint64_t seed) {
  cfg.validate(train.dims());
  if (probe.percentages.size() != train.num_classes()) {
    throw ArgumentError("diversify: probe report has a different class count");
  }
  const Rng root(seed);
  const ClassPartition part = segment_by_class(train);
  const std::size_t classes = train.num_classes();

  DiversifiedDataset out;
  const ClassBounds relaxed = global_extremum(part, probe.delta_x_max, feature_scale);
  BoundsStageResult tightened = tighten_overlaps(relaxed);
  out.top_features = top_k_features(part, cfg.top_k, cfg.clusters,
                                    root.substream({key_of("clusters")}).seed(), cfg.kmeans);
  BoundsStageResult refined = final_bounds(tightened.bounds, out.top_features, part, cfg.clusters,
                                           root.substream({key_of("clusters")}).seed(), cfg.kmeans);
  out.bounds = refined.bounds;
  out.events = std::move(tightened.events);
  out.events.insert(out.events.end(), refined.events.begin(), refined.events.end());
  out.rules = std::move(tightened.rules);

  std::size_t base = cfg.synth_base;
  if (base == 0) {
    const auto counts = train.class_counts();
    base = *std::min_element(counts.begin(), counts.end());
  }
  out.synth_counts = cfg.mode == DiversifyMode::delete_only
                         ? std::vector<std::size_t>(classes, 0)
                         : synth_counts(probe.percentages, base);
  const std::size_t total_synth =
      std::accumulate(out.synth_counts.begin(), out.synth_counts.end(), std::size_t{0});

  Dataset combined = train;
  if (total_synth == 0) {
    out.validation.passed = true;
    out.validation.attempts = 0;
    out.validation.diagnostic = "no synthetic rows requested";
  } else {
    Matrix best_rows;
    std::vector<int> labels;
    for (std::size_t c = 0; c < classes; ++c) {
      labels.insert(labels.end(), out.synth_counts[c], static_cast<int>(c));
    }
    ValidationReport best;
    best.corr_diff = std::numeric_limits<double>::infinity();
    int attempt = 0;
    for (; attempt < cfg.max_retries; ++attempt) {
      Matrix rows(static_cast<Eigen::Index>(total_synth), static_cast<Eigen::Index>(train.dims()));
      Eigen::Index at = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        if (out.synth_counts[c] == 0) continue;
        Rng rng = root.substream({key_of("synth"), static_cast<std::uint64_t>(attempt), c});
        const auto n = static_cast<Eigen::Index>(out.synth_counts[c]);
        rows.middleRows(at, n) = sample_synthetic(out.bounds.of_class(c), out.synth_counts[c], rng);
        at += n;
      }
      ValidationReport v = validate_synthetic(rows, train.features(), cfg.corr_threshold);
      const bool degenerate = rows.rows() < 2;
      if (attempt == 0 || v.corr_diff < best.corr_diff) {
        best = v;
        best_rows = std::move(rows);
      }
      if (v.passed || degenerate) {
        ++attempt;
        break;
      }
    }
    best.attempts = attempt;
    if (!best.passed && best.diagnostic.empty()) {
      best.diagnostic = "correlation threshold not met after " + std::to_string(attempt) +
                        " attempts; best attempt kept";
    }
    out.validation = best;
    Dataset synthetic(std::move(best_rows), std::move(labels), train.class_names(),
                      train.feature_names(),
                      std::vector<Provenance>(total_synth, Provenance::synthetic));
    combined = train.concat(synthetic);
  }
  out.counts_before_removal = combined.class_counts();

  if (cfg.mode == DiversifyMode::synth_only) {
    out.data = std::move(combined);
  } else {
    const ClassPartition groups = segment_by_class(combined);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < classes; ++c) {
      const auto& rows = groups.source_rows[c];
      if (rows.empty()) continue;
      const auto kept = minimize_redundancy(groups.classes[c].features(), cfg.removal_fraction,
                                            root.substream({key_of("redundancy"), c}).seed(),
                                            cfg.kmeans);
      for (std::size_t k : kept) keep.push_back(rows[k]);
    }
    std::sort(keep.begin(), keep.end());
    out.data = combined.select(keep);
  }
  out.counts_after_removal = out.data.class_counts();
  return out;
}

nlohmann::json validation_to_json(const ValidationReport& report) {
  nlohmann::json doc;
  doc["corr_diff"] = std::isfinite(report.corr_diff) ? nlohmann::json(report.corr_diff)
                                                     : nlohmann::json(nullptr);
  doc["attempts"] = report.attempts;
  doc["passed"] = report.passed;
  doc["diagnostic"] = report.diagnostic;
  return doc;
}

nlohmann::json diversified_to_json(const DiversifiedDataset& result) {
  nlohmann::json doc;
  doc["validation"] = validation_to_json(result.validation);
  doc["bounds"] = bounds_to_json(result.bounds, result.data);
  doc["events"] = events_to_json(result.events);
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : result.rules) {
    rules.push_back({{"feature", r.feature},
                     {"classes", {r.first, r.second}},
                     {"rule", r.complete ? "complete" : "partial"}});
  }
  doc["tightening_rules"] = rules;
  doc["tightening_order"] = "class pairs by ascending index";
  doc["top_features"] = result.top_features;
  doc["synth_counts"] = result.synth_counts;
  doc["counts_before_removal"] = result.counts_before_removal;
  doc["counts_after_removal"] = result.counts_after_removal;
  return doc;
}

}  // namespace robias
