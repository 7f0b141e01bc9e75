#include "robias/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "robias/error.hpp"

namespace robias {

CorrMatrix pearson_corr(const Matrix& points) {
  if (points.rows() < 2) throw ArgumentError("pearson_corr: need at least 2 rows");
  const Eigen::Index d = points.cols();
  CorrMatrix out;
  out.zero_variance.assign(static_cast<std::size_t>(d), false);
  for (Eigen::Index j = 0; j < d; ++j) {
    out.zero_variance[static_cast<std::size_t>(j)] =
        points.col(j).maxCoeff() == points.col(j).minCoeff();
  }

  // Two-pass: center first, then accumulate cross products.
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Matrix centered = points.rowwise() - mean;
  const Matrix cross = centered.transpose() * centered;

  out.coefficients = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    if (out.zero_variance[static_cast<std::size_t>(a)]) continue;
    out.coefficients(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < d; ++b) {
      if (out.zero_variance[static_cast<std::size_t>(b)]) continue;
      const double denom = std::sqrt(cross(a, a) * cross(b, b));
      const double r = denom > 0.0 ? std::clamp(cross(a, b) / denom, -1.0, 1.0) : 0.0;
      out.coefficients(a, b) = r;
      out.coefficients(b, a) = r;
    }
  }
  return out;
}

}  // namespace robias
