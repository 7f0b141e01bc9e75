#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robias/dataset.hpp"

namespace robias {

enum class ResampleMethod { rus_equalize, rus_fraction, ros, smote, adasyn };

const char* to_string(ResampleMethod m);
ResampleMethod parse_resample_method(const std::string& text);

struct ResamplePlan {
  ResampleMethod method = ResampleMethod::ros;
  double fraction = 0.25;       // rus_fraction: share removed from every class
  std::size_t k_neighbors = 5;  // smote / adasyn
  double balance = 1.0;         // adasyn: 1 equalizes minority and majority counts
};

// Random undersampling. Equalize mode trims every class to the smallest
// class count; fraction mode drops round(fraction * count) rows per class.
Dataset rus(const Dataset& ds, const ResamplePlan& plan, std::uint64_t seed);

// Random oversampling with replacement up to the largest class count. Added
// rows are exact copies flagged synthetic.
Dataset ros(const Dataset& ds, std::uint64_t seed);

// SMOTE: new minority rows x + lambda * (x_nn - x) with x_nn among the k
// nearest same-class neighbours. `fixed_lambda` pins lambda (tests only).
Dataset smote(const Dataset& ds, std::size_t k, std::uint64_t seed,
              std::optional<double> fixed_lambda = std::nullopt);

// ADASYN: like SMOTE, but each minority row's share of the new rows is
// proportional to the fraction of other-class rows among its k nearest
// neighbours in the whole dataset. Throws InfeasibleError when a class that
// needs rows has no row with a foreign neighbour.
Dataset adasyn(const Dataset& ds, std::size_t k, std::uint64_t seed, double balance = 1.0);

Dataset resample(const Dataset& ds, const ResamplePlan& plan, std::uint64_t seed);

// Indices of the k nearest rows of `pool` to `query` (Euclidean, ties to the
// lower index), skipping `exclude`.
std::vector<std::size_t> nearest_neighbors(const Matrix& pool, const Vector& query, std::size_t k,
                                           std::optional<std::size_t> exclude = std::nullopt);

}  // namespace robias
