#include "robias/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robias/error.hpp"
#include "robias/rng.hpp"

namespace robias {

const char* to_string(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::rus_equalize: return "rus-equalize";
    case ResampleMethod::rus_fraction: return "rus-fraction";
    case ResampleMethod::ros: return "ros";
    case ResampleMethod::smote: return "smote";
    case ResampleMethod::adasyn: return "adasyn";
  }
  return "ros";
}

ResampleMethod parse_resample_method(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), '_', '-');
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "rus-equalize" || t == "rus") return ResampleMethod::rus_equalize;
  if (t == "rus-fraction") return ResampleMethod::rus_fraction;
  if (t == "ros") return ResampleMethod::ros;
  if (t == "smote") return ResampleMethod::smote;
  if (t == "adasyn") return ResampleMethod::adasyn;
  throw ArgumentError("unknown resampling method '" + text + "'");
}

std::vector<std::size_t> nearest_neighbors(const Matrix& pool, const Vector& query, std::size_t k,
                                           std::optional<std::size_t> exclude) {
  std::vector<std::pair<double, std::size_t>> dist;
  for (Eigen::Index i = 0; i < pool.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (exclude && *exclude == idx) continue;
    dist.emplace_back((pool.row(i).transpose() - query).squaredNorm(), idx);
  }
  const std::size_t take = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
  return out;
}

namespace {

std::size_t majority_count(const Dataset& ds) {
  const auto counts = ds.class_counts();
  return *std::max_element(counts.begin(), counts.end());
}

void require_two_classes(const Dataset& ds, const char* who) {
  const auto counts = ds.class_counts();
  const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) throw ArgumentError(std::string(who) + ": needs at least two classes");
}

Dataset append_rows(const Dataset& ds, Matrix rows, std::vector<int> labels) {
  const auto n = labels.size();
  Dataset extra(std::move(rows), std::move(labels), ds.class_names(), ds.feature_names(),
                std::vector<Provenance>(n, Provenance::synthetic));
  return ds.concat(extra);
}

// Interpolates `needed[i]` new rows from each class row i toward random
// same-class neighbours.
void interpolate(const Matrix& class_rows, const std::vector<std::vector<std::size_t>>& neighbors,
                 const std::vector<std::size_t>& needed, Rng& rng,
                 std::optional<double> fixed_lambda, Matrix& out, Eigen::Index& at) {
  for (std::size_t i = 0; i < needed.size(); ++i) {
    for (std::size_t s = 0; s < needed[i]; ++s) {
      const std::size_t nn = neighbors[i][rng.index(neighbors[i].size())];
      const double lambda = fixed_lambda ? *fixed_lambda : rng.uniform01();
      const auto x = class_rows.row(static_cast<Eigen::Index>(i));
      out.row(at++) = x + lambda * (class_rows.row(static_cast<Eigen::Index>(nn)) - x);
    }
  }
}

std::vector<std::vector<std::size_t>> same_class_neighbors(const Matrix& rows, std::size_t k) {
  std::vector<std::vector<std::size_t>> nn;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    nn.push_back(nearest_neighbors(rows, rows.row(i).transpose(), k, static_cast<std::size_t>(i)));
  }
  return nn;
}

}  // namespace

Dataset rus(const Dataset& ds, const ResamplePlan& plan, std::uint64_t seed) {
  const auto part = segment_by_class(ds);
  std::size_t minority = ds.rows();
  for (const auto& rows : part.source_rows) {
    if (!rows.empty()) minority = std::min(minority, rows.size());
  }
  if (plan.method == ResampleMethod::rus_equalize) {
    require_two_classes(ds, "rus");
  } else if (plan.method == ResampleMethod::rus_fraction) {
    if (!(plan.fraction >= 0.0 && plan.fraction < 1.0)) {
      throw ArgumentError("rus: fraction must be in [0, 1)");
    }
  } else {
    throw ArgumentError("rus: plan is not an undersampling method");
  }

  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < part.source_rows.size(); ++c) {
    auto rows = part.source_rows[c];
    if (rows.empty()) continue;
    std::size_t target = minority;
    if (plan.method == ResampleMethod::rus_fraction) {
      const auto drop = static_cast<std::size_t>(
          std::llround(plan.fraction * static_cast<double>(rows.size())));
      target = rows.size() - std::min(drop, rows.size() - 1);
    }
    Rng class_rng = rng.substream({c});
    for (std::size_t i = 0; i < target; ++i) {
      std::swap(rows[i], rows[i + class_rng.index(rows.size() - i)]);
    }
    keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(target));
  }
  std::sort(keep.begin(), keep.end());
  return ds.select(keep);
}

Dataset ros(const Dataset& ds, std::uint64_t seed) {
  require_two_classes(ds, "ros");
  const auto part = segment_by_class(ds);
  const std::size_t target = majority_count(ds);
  Rng rng(seed);
  std::vector<std::size_t> picks;
  for (std::size_t c = 0; c < part.source_rows.size(); ++c) {
    const auto& rows = part.source_rows[c];
    if (rows.empty()) continue;
    Rng class_rng = rng.substream({c});
    for (std::size_t s = rows.size(); s < target; ++s) {
      picks.push_back(rows[class_rng.index(rows.size())]);
    }
  }
  Dataset replicas = ds.select(picks);
  return append_rows(ds, replicas.features(), replicas.labels());
}

Dataset smote(const Dataset& ds, std::size_t k, std::uint64_t seed,
              std::optional<double> fixed_lambda) {
  require_two_classes(ds, "smote");
  if (k < 1) throw ArgumentError("smote: k must be >= 1");
  const auto part = segment_by_class(ds);
  const std::size_t target = majority_count(ds);
  Rng rng(seed);

  std::size_t total = 0;
  for (const auto& rows : part.source_rows) {
    if (!rows.empty() && rows.size() < target) {
      if (rows.size() <= k) {
        throw NeighborError("smote: a class has " + std::to_string(rows.size()) +
                            " rows, which is not more than k=" + std::to_string(k) +
                            "; lower k_neighbors");
      }
      total += target - rows.size();
    }
  }
  Matrix out(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(ds.dims()));
  std::vector<int> labels;
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < part.classes.size(); ++c) {
    const auto& cls = part.classes[c];
    if (cls.empty() || cls.rows() >= target) continue;
    const auto neighbors = same_class_neighbors(cls.features(), k);
    // Each new row starts from a uniformly drawn class row.
    Rng class_rng = rng.substream({c});
    std::vector<std::size_t> needed(cls.rows(), 0);
    for (std::size_t s = cls.rows(); s < target; ++s) ++needed[class_rng.index(cls.rows())];
    interpolate(cls.features(), neighbors, needed, class_rng, fixed_lambda, out, at);
    labels.insert(labels.end(), target - cls.rows(), static_cast<int>(c));
  }
  return append_rows(ds, std::move(out), std::move(labels));
}

Dataset adasyn(const Dataset& ds, std::size_t k, std::uint64_t seed, double balance) {
  require_two_classes(ds, "adasyn");
  if (k < 1) throw ArgumentError("adasyn: k must be >= 1");
  if (!(balance > 0.0 && balance <= 1.0)) throw ArgumentError("adasyn: balance must be in (0, 1]");
  const auto part = segment_by_class(ds);
  const std::size_t target = majority_count(ds);
  Rng rng(seed);

  struct Plan {
    std::size_t cls;
    std::vector<std::size_t> needed;
  };
  std::vector<Plan> plans;
  std::size_t total = 0;
  for (std::size_t c = 0; c < part.classes.size(); ++c) {
    const auto& cls = part.classes[c];
    if (cls.empty() || cls.rows() >= target) continue;
    if (cls.rows() <= k) {
      throw NeighborError("adasyn: a class has " + std::to_string(cls.rows()) +
                          " rows, which is not more than k=" + std::to_string(k) +
                          "; lower k_neighbors");
    }
    const auto g = static_cast<std::size_t>(
        std::llround(static_cast<double>(target - cls.rows()) * balance));
    std::vector<double> hardness(cls.rows(), 0.0);
    for (std::size_t i = 0; i < cls.rows(); ++i) {
      const std::size_t src = part.source_rows[c][i];
      const auto nn = nearest_neighbors(ds.features(), ds.row(src), k, src);
      const auto foreign = std::count_if(nn.begin(), nn.end(), [&](std::size_t j) {
        return ds.label(j) != static_cast<int>(c);
      });
      hardness[i] = static_cast<double>(foreign) / static_cast<double>(k);
    }
    const double sum = std::accumulate(hardness.begin(), hardness.end(), 0.0);
    if (sum == 0.0) {
      throw InfeasibleError("adasyn: no row of class '" + ds.class_names()[c] +
                            "' has a neighbour from another class; ADASYN is not suited for this "
                            "dataset");
    }
    // Largest-remainder rounding so the class reaches exactly g new rows.
    std::vector<std::size_t> needed(cls.rows(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < cls.rows(); ++i) {
      const double share = hardness[i] / sum * static_cast<double>(g);
      needed[i] = static_cast<std::size_t>(std::floor(share));
      assigned += needed[i];
      remainders.emplace_back(-(share - std::floor(share)), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t r = 0; assigned < g; ++r, ++assigned) ++needed[remainders[r].second];
    total += g;
    plans.push_back({c, std::move(needed)});
  }

  Matrix out(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(ds.dims()));
  std::vector<int> labels;
  Eigen::Index at = 0;
  for (const auto& plan : plans) {
    const auto& cls = part.classes[plan.cls];
    const auto neighbors = same_class_neighbors(cls.features(), k);
    Rng class_rng = rng.substream({plan.cls});
    interpolate(cls.features(), neighbors, plan.needed, class_rng, std::nullopt, out, at);
    const auto added = std::accumulate(plan.needed.begin(), plan.needed.end(), std::size_t{0});
    labels.insert(labels.end(), added, static_cast<int>(plan.cls));
  }
  return append_rows(ds, std::move(out), std::move(labels));
}

Dataset resample(const Dataset& ds, const ResamplePlan& plan, std::uint64_t seed) {
  switch (plan.method) {
    case ResampleMethod::rus_equalize:
    case ResampleMethod::rus_fraction: return rus(ds, plan, seed);
    case ResampleMethod::ros: return ros(ds, seed);
    case ResampleMethod::smote: return smote(ds, plan.k_neighbors, seed);
    case ResampleMethod::adasyn: return adasyn(ds, plan.k_neighbors, seed, plan.balance);
  }
  throw ArgumentError("resample: unknown method");
}

}  // namespace robias
