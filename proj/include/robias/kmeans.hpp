#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "robias/dataset.hpp"

namespace robias {

struct KmeansOptions {
  int max_iter = 100;
  double tol = 1e-9;  // stop once no centroid moves farther than this
  int restarts = 10;  // best inertia over this many seeded initializations
};

struct KmeansResult {
  Matrix centroids;                      // k x d
  std::vector<std::size_t> assignments;  // per point, cluster index
  double inertia = 0.0;                  // sum of squared distances
  std::vector<double> inertia_trace;     // per Lloyd iteration of the kept run
  int iterations = 0;

  std::vector<std::size_t> cluster_sizes() const;
};

// Lloyd's algorithm with squared Euclidean distance. Initial centroids are k
// distinct rows picked with the seeded stream; an emptied cluster takes the
// point farthest from its centroid among clusters that can spare one. Ties in
// assignment go to the lowest cluster index.
KmeansResult kmeans_once(const Matrix& points, std::size_t k, std::uint64_t seed,
                         int max_iter = 100, double tol = 1e-9);

// Best (lowest inertia) of options.restarts runs of kmeans_once, each on its
// own sub-stream of `seed`. Ties keep the earliest restart.
KmeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KmeansOptions& options = {});

double squared_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

}  // namespace robias
