#include "robias/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "robias/error.hpp"
#include "robias/rng.hpp"

namespace robias {

std::vector<std::size_t> KmeansResult::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(centroids.rows()), 0);
  for (std::size_t a : assignments) ++sizes[a];
  return sizes;
}

double squared_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return (a - b).squaredNorm();
}

namespace {

double row_sq_dist(const Matrix& pts, Eigen::Index i, const Matrix& cents, Eigen::Index c) {
  return (pts.row(i) - cents.row(c)).squaredNorm();
}

// Returns true if any assignment changed.
bool assign_nearest(const Matrix& pts, const Matrix& cents, std::vector<std::size_t>& assign) {
  bool changed = false;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (Eigen::Index c = 0; c < cents.rows(); ++c) {
      const double dist = row_sq_dist(pts, i, cents, c);
      if (dist < best) {
        best = dist;
        best_c = static_cast<std::size_t>(c);
      }
    }
    auto& slot = assign[static_cast<std::size_t>(i)];
    if (slot != best_c) {
      slot = best_c;
      changed = true;
    }
  }
  return changed;
}

void repair_empty(const Matrix& pts, Matrix& cents, std::vector<std::size_t>& assign) {
  const auto k = static_cast<std::size_t>(cents.rows());
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assign) ++sizes[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    double far = -1.0;
    std::size_t donor = 0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      const std::size_t a = assign[static_cast<std::size_t>(i)];
      if (sizes[a] < 2) continue;
      const double dist = row_sq_dist(pts, i, cents, static_cast<Eigen::Index>(a));
      if (dist > far) {
        far = dist;
        donor = static_cast<std::size_t>(i);
      }
    }
    // k <= n guarantees some cluster holds at least two points.
    --sizes[assign[donor]];
    assign[donor] = c;
    sizes[c] = 1;
    cents.row(static_cast<Eigen::Index>(c)) = pts.row(static_cast<Eigen::Index>(donor));
  }
}

double update_centroids(const Matrix& pts, Matrix& cents, const std::vector<std::size_t>& assign) {
  Matrix sums = Matrix::Zero(cents.rows(), cents.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(cents.rows()), 0);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const std::size_t a = assign[static_cast<std::size_t>(i)];
    sums.row(static_cast<Eigen::Index>(a)) += pts.row(i);
    ++counts[a];
  }
  double max_shift = 0.0;
  for (Eigen::Index c = 0; c < cents.rows(); ++c) {
    const auto n = counts[static_cast<std::size_t>(c)];
    if (n == 0) continue;
    const Eigen::RowVectorXd next = sums.row(c) / static_cast<double>(n);
    max_shift = std::max(max_shift, (next - cents.row(c)).norm());
    cents.row(c) = next;
  }
  return max_shift;
}

double inertia_of(const Matrix& pts, const Matrix& cents, const std::vector<std::size_t>& assign) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    total += row_sq_dist(pts, i, cents, static_cast<Eigen::Index>(assign[static_cast<std::size_t>(i)]));
  }
  return total;
}

void check_args(const Matrix& points, std::size_t k, int max_iter, double tol) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1) throw ArgumentError("kmeans: k must be >= 1");
  if (k > n) {
    throw ArgumentError("kmeans: k=" + std::to_string(k) + " exceeds point count " +
                        std::to_string(n));
  }
  if (max_iter < 1) throw ArgumentError("kmeans: max_iter must be >= 1");
  if (!(tol >= 0.0)) throw ArgumentError("kmeans: tol must be >= 0");
}

}  // namespace

KmeansResult kmeans_once(const Matrix& points, std::size_t k, std::uint64_t seed,
                         int max_iter, double tol) {
  check_args(points, k, max_iter, tol);
  const auto n = static_cast<std::size_t>(points.rows());

  // Partial Fisher-Yates picks k distinct rows.
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.index(n - i)]);
  }
  KmeansResult res;
  res.centroids.resize(static_cast<Eigen::Index>(k), points.cols());
  for (std::size_t c = 0; c < k; ++c) {
    res.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(order[c]));
  }
  res.assignments.assign(n, std::numeric_limits<std::size_t>::max());

  for (int it = 0; it < max_iter; ++it) {
    const bool changed = assign_nearest(points, res.centroids, res.assignments);
    repair_empty(points, res.centroids, res.assignments);
    const double shift = update_centroids(points, res.centroids, res.assignments);
    res.inertia_trace.push_back(inertia_of(points, res.centroids, res.assignments));
    res.iterations = it + 1;
    if (!changed || shift < tol) break;
  }
  res.inertia = res.inertia_trace.back();
  return res;
}

KmeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KmeansOptions& options) {
  check_args(points, k, options.max_iter, options.tol);
  if (options.restarts < 1) throw ArgumentError("kmeans: restarts must be >= 1");
  KmeansResult best;
  for (int r = 0; r < options.restarts; ++r) {
    KmeansResult run = kmeans_once(points, k, derive_seed(seed, {static_cast<std::uint64_t>(r)}),
                                   options.max_iter, options.tol);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace robias
