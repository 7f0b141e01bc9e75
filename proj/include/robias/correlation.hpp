#pragma once

#include <vector>

#include "robias/dataset.hpp"

namespace robias {

struct CorrMatrix {
  Matrix coefficients;              // d x d, symmetric, entries in [-1, 1]
  std::vector<bool> zero_variance;  // constant columns; their coefficients are 0
};

// Pearson correlation between the columns of `points` (n >= 2 rows).
// A column whose values are all identical is flagged and gets coefficient 0
// against every column, itself included.
CorrMatrix pearson_corr(const Matrix& points);

}  // namespace robias
