#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace robias {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Provenance : std::uint8_t { original, synthetic };

const char* to_string(Provenance p);

// Feature matrix plus class labels and column metadata. Immutable once built.
//
// Construction checks that row counts agree, every label is below the class
// count and every feature is finite. Subsets produced by `select` may lack
// some classes; datasets produced by `load_csv` are guaranteed to contain
// every class at least once (see `has_all_classes`).
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix features, std::vector<int> labels,
          std::vector<std::string> class_names,
          std::vector<std::string> feature_names,
          std::vector<Provenance> provenance = {});

  std::size_t rows() const { return labels_.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t num_classes() const { return class_names_.size(); }
  bool empty() const { return labels_.empty(); }

  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }

  Vector row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)).transpose(); }
  int label(std::size_t i) const { return labels_[i]; }

  std::vector<std::size_t> class_counts() const;
  std::size_t count_synthetic() const;
  bool has_all_classes() const;

  // Rows in the given order; metadata carried over.
  Dataset select(std::span<const std::size_t> indices) const;
  // Rows of `other` appended after this dataset's rows. Metadata must match.
  Dataset concat(const Dataset& other) const;
  // Same rows with features replaced (shape must match).
  Dataset with_features(Matrix features) const;

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::vector<std::string> feature_names_;
  std::vector<Provenance> provenance_;
};

// Column reference by header name or zero-based position.
using ColumnRef = std::variant<std::string, std::size_t>;

struct DatasetSchema {
  ColumnRef label_column;
  std::vector<ColumnRef> feature_columns;
  // Class index i is the label string class_order[i]. Empty means classes are
  // numbered in order of first appearance.
  std::vector<std::string> class_order;
};

// Comma-separated, header row first, '.' decimal separator.
Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema);

// Writes features, the label (as class name) and optionally a `provenance`
// column. Values are written in shortest round-trip form.
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column = "label",
               bool with_provenance = false);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Per-class split; each class contributes round(count * train_fraction) rows
// to train, clamped so both sides keep at least one row. Row order within each
// side follows the input order.
TrainTestSplit split_stratified(const Dataset& ds, double train_fraction,
                                std::uint64_t seed);

struct ClassPartition {
  std::vector<Dataset> classes;                       // one per class index
  std::vector<std::vector<std::size_t>> source_rows;  // indices into the input
};

ClassPartition segment_by_class(const Dataset& ds);

// per_class points for each center, uniform in the L-infinity box
// center +/- spread. Class i is named "c<i>", feature j "x<j>".
Dataset make_toy_blobs(std::size_t per_class, const std::vector<Vector>& centers,
                       double spread, std::uint64_t seed);

// Max |value| per feature column.
Vector feature_max_abs(const Dataset& ds);

// Min-max scaling fitted on one dataset and applied to any dataset with the
// same columns. Constant columns are only shifted by their minimum.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Dataset& ds);
  Dataset apply(const Dataset& ds) const;

  const Vector& min() const { return min_; }
  const Vector& range() const { return range_; }

 private:
  Vector min_;
  Vector range_;
};

}  // namespace robias
