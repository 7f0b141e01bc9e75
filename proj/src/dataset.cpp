#include "robias/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "robias/error.hpp"
#include "robias/rng.hpp"

namespace robias {

const char* to_string(Provenance p) {
  return p == Provenance::original ? "original" : "synthetic";
}

Dataset::Dataset(Matrix features, std::vector<int> labels,
                 std::vector<std::string> class_names,
                 std::vector<std::string> feature_names,
                 std::vector<Provenance> provenance)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)),
      feature_names_(std::move(feature_names)),
      provenance_(std::move(provenance)) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw ArgumentError("dataset: " + std::to_string(features_.rows()) +
                        " feature rows but " + std::to_string(labels_.size()) +
                        " labels");
  }
  if (feature_names_.empty()) {
    for (Eigen::Index j = 0; j < features_.cols(); ++j) {
      feature_names_.push_back("x" + std::to_string(j));
    }
  }
  if (feature_names_.size() != dims()) {
    throw ArgumentError("dataset: feature name count does not match columns");
  }
  if (class_names_.empty()) {
    throw ArgumentError("dataset: at least one class is required");
  }
  if (provenance_.empty()) {
    provenance_.assign(labels_.size(), Provenance::original);
  }
  if (provenance_.size() != labels_.size()) {
    throw ArgumentError("dataset: provenance length does not match rows");
  }
  const int classes = static_cast<int>(class_names_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= classes) {
      throw ArgumentError("dataset: label " + std::to_string(labels_[i]) +
                          " at row " + std::to_string(i) + " out of range");
    }
  }
  if (!features_.allFinite()) {
    throw ArgumentError("dataset: non-finite feature value");
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (int l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

std::size_t Dataset::count_synthetic() const {
  return static_cast<std::size_t>(
      std::count(provenance_.begin(), provenance_.end(), Provenance::synthetic));
}

bool Dataset::has_all_classes() const {
  const auto counts = class_counts();
  return std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Matrix f(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<int> l;
  std::vector<Provenance> p;
  l.reserve(indices.size());
  p.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= rows()) throw ArgumentError("dataset: select index out of range");
    f.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(i));
    l.push_back(labels_[i]);
    p.push_back(provenance_[i]);
  }
  return Dataset(std::move(f), std::move(l), class_names_, feature_names_, std::move(p));
}

Dataset Dataset::concat(const Dataset& other) const {
  if (other.dims() != dims() || other.class_names_ != class_names_) {
    throw ArgumentError("dataset: concat of incompatible datasets");
  }
  Matrix f(features_.rows() + other.features_.rows(), features_.cols());
  f.topRows(features_.rows()) = features_;
  f.bottomRows(other.features_.rows()) = other.features_;
  std::vector<int> l = labels_;
  l.insert(l.end(), other.labels_.begin(), other.labels_.end());
  std::vector<Provenance> p = provenance_;
  p.insert(p.end(), other.provenance_.begin(), other.provenance_.end());
  return Dataset(std::move(f), std::move(l), class_names_, feature_names_, std::move(p));
}

Dataset Dataset::with_features(Matrix features) const {
  if (features.rows() != features_.rows() || features.cols() != features_.cols()) {
    throw ArgumentError("dataset: with_features shape mismatch");
  }
  return Dataset(std::move(features), labels_, class_names_, feature_names_, provenance_);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string column_label(const ColumnRef& ref) {
  if (const auto* name = std::get_if<std::string>(&ref)) return "'" + *name + "'";
  return "#" + std::to_string(std::get<std::size_t>(ref));
}

std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header) {
  if (const auto* name = std::get_if<std::string>(&ref)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw SchemaError("missing column " + column_label(ref));
    return static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t idx = std::get<std::size_t>(ref);
  if (idx >= header.size()) throw SchemaError("missing column " + column_label(ref));
  return idx;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  if (schema.feature_columns.empty()) {
    throw SchemaError("schema lists no feature columns");
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Strip a UTF-8 byte-order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  const std::size_t label_col = resolve_column(schema.label_column, header);
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (const auto& ref : schema.feature_columns) {
    const std::size_t c = resolve_column(ref, header);
    if (c == label_col) {
      throw SchemaError("label column " + column_label(schema.label_column) +
                        " is also listed as a feature");
    }
    feature_cols.push_back(c);
    feature_names.push_back(header[c]);
  }

  std::unordered_map<std::string, int> class_index;
  std::vector<std::string> class_names = schema.class_order;
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    class_index.emplace(class_names[i], static_cast<int>(i));
  }
  const bool fixed_mapping = !schema.class_order.empty();

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;  // 1-based data row number in diagnostics
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::string cell = trim(cells[feature_cols[k]]);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw ParseError(path.string() + ": row " + std::to_string(row) + ", column '" +
                         feature_names[k] + "': not a finite number: '" + cell + "'");
      }
      values.push_back(v);
    }
    const std::string label = trim(cells[label_col]);
    auto it = class_index.find(label);
    if (it == class_index.end()) {
      if (fixed_mapping) {
        throw LabelError(path.string() + ": row " + std::to_string(row) +
                         ": class label '" + label + "' not in class mapping");
      }
      it = class_index.emplace(label, static_cast<int>(class_names.size())).first;
      class_names.push_back(label);
    }
    labels.push_back(it->second);
  }
  if (labels.empty()) throw SchemaError(path.string() + ": no data rows");

  Matrix f = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(labels.size()),
                                static_cast<Eigen::Index>(feature_cols.size()));
  Dataset ds(std::move(f), std::move(labels), std::move(class_names), std::move(feature_names));
  if (!ds.has_all_classes()) {
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) {
        throw LabelError(path.string() + ": class '" + ds.class_names()[c] +
                         "' from the mapping has no rows");
      }
    }
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column, bool with_provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& name : ds.feature_names()) out << quote_if_needed(name) << ',';
  out << quote_if_needed(label_column);
  if (with_provenance) out << ",provenance";
  out << '\n';
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.dims(); ++j) {
      out << format_double(ds.features()(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j)))
          << ',';
    }
    out << quote_if_needed(ds.class_names()[static_cast<std::size_t>(ds.label(i))]);
    if (with_provenance) out << ',' << to_string(ds.provenance()[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

TrainTestSplit split_stratified(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("split_stratified: train_fraction must be in (0, 1)");
  }
  const auto part = segment_by_class(ds);
  Rng rng(seed);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t c = 0; c < part.source_rows.size(); ++c) {
    auto rows = part.source_rows[c];
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      throw StratificationError("split_stratified: class '" + ds.class_names()[c] +
                                "' has a single row");
    }
    Rng class_rng = rng.substream({c});
    for (std::size_t i = rows.size() - 1; i > 0; --i) {
      std::swap(rows[i], rows[class_rng.index(i + 1)]);
    }
    auto n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(rows.size()) * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {ds.select(train_rows), ds.select(test_rows)};
}

ClassPartition segment_by_class(const Dataset& ds) {
  ClassPartition part;
  part.source_rows.resize(ds.num_classes());
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    part.source_rows[static_cast<std::size_t>(ds.label(i))].push_back(i);
  }
  part.classes.reserve(ds.num_classes());
  for (const auto& rows : part.source_rows) part.classes.push_back(ds.select(rows));
  return part;
}

Dataset make_toy_blobs(std::size_t per_class, const std::vector<Vector>& centers,
                       double spread, std::uint64_t seed) {
  if (centers.empty()) throw ArgumentError("make_toy_blobs: no centers");
  if (per_class < 1) throw ArgumentError("make_toy_blobs: per_class must be >= 1");
  if (spread < 0.0) throw ArgumentError("make_toy_blobs: negative spread");
  const auto d = centers.front().size();
  for (const auto& c : centers) {
    if (c.size() != d) throw ArgumentError("make_toy_blobs: centers differ in dimension");
  }
  Rng rng(seed);
  Matrix f(static_cast<Eigen::Index>(per_class * centers.size()), d);
  std::vector<int> labels;
  std::vector<std::string> names;
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    names.push_back("c" + std::to_string(c));
    for (std::size_t k = 0; k < per_class; ++k, ++r) {
      for (Eigen::Index j = 0; j < d; ++j) {
        f(r, j) = rng.uniform(centers[c][j] - spread, centers[c][j] + spread);
      }
      labels.push_back(static_cast<int>(c));
    }
  }
  return Dataset(std::move(f), std::move(labels), std::move(names), {});
}

Vector feature_max_abs(const Dataset& ds) {
  if (ds.empty()) return Vector::Zero(static_cast<Eigen::Index>(ds.dims()));
  return ds.features().cwiseAbs().colwise().maxCoeff().transpose();
}

MinMaxScaler MinMaxScaler::fit(const Dataset& ds) {
  if (ds.empty()) throw ArgumentError("MinMaxScaler: empty dataset");
  MinMaxScaler s;
  s.min_ = ds.features().colwise().minCoeff().transpose();
  s.range_ = ds.features().colwise().maxCoeff().transpose() - s.min_;
  return s;
}

Dataset MinMaxScaler::apply(const Dataset& ds) const {
  if (static_cast<Eigen::Index>(ds.dims()) != min_.size()) {
    throw ArgumentError("MinMaxScaler: column count mismatch");
  }
  Matrix f = ds.features();
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const double r = range_[j] > 0.0 ? range_[j] : 1.0;
    f.col(j) = ((f.col(j).array() - min_[j]) / r).matrix();
  }
  return ds.with_features(std::move(f));
}

}  // namespace robias
