#include "fairsvdd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fairsvdd/errors.hpp"
#include "fairsvdd/rng.hpp"
#include "text_util.hpp"

namespace fairsvdd {

namespace {

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + cell.size();
}

int parse_binary(const std::string& cell, bool& ok) {
  double value = 0.0;
  ok = parse_double(cell, value) && (value == 0.0 || value == 1.0);
  return static_cast<int>(value);
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1) throw DataError("dataset '" + name + "' is empty");
  if (psv.size() != features.rows())
    throw DataError("psv length does not match instance count");
  if (!features.allFinite()) throw DataError("features contain non-finite values");
  for (Eigen::Index i = 0; i < psv.size(); ++i) {
    if (psv[i] != 0 && psv[i] != 1)
      throw DataError("psv contains a value outside {0,1} at row " + std::to_string(i + 1));
  }
  if (labels) {
    if (labels->size() != features.rows())
      throw DataError("label length does not match instance count");
    for (Eigen::Index i = 0; i < labels->size(); ++i) {
      if ((*labels)[i] != 0 && (*labels)[i] != 1)
        throw DataError("label outside {0,1} at row " + std::to_string(i + 1));
    }
  }
  if (!feature_names.empty() &&
      static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw DataError("feature name count does not match dimension");
}

std::pair<Eigen::Index, Eigen::Index> Dataset::group_sizes() const {
  Eigen::Index n1 = psv.sum();
  return {psv.size() - n1, n1};
}

Dataset load_csv(const std::string& path, const std::string& psv_column,
                 const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' has no header row");
  const auto header = detail::split_csv_line(detail::strip_cr(line));

  int psv_idx = -1, label_idx = -1;
  std::vector<int> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == psv_column) {
      psv_idx = static_cast<int>(c);
    } else if (label_column && header[c] == *label_column) {
      label_idx = static_cast<int>(c);
    } else {
      feature_cols.push_back(static_cast<int>(c));
      feature_names.push_back(header[c]);
    }
  }
  if (psv_idx < 0) throw DataError("'" + path + "' has no column '" + psv_column + "'");
  if (label_column && label_idx < 0)
    throw DataError("'" + path + "' has no column '" + *label_column + "'");
  if (feature_cols.empty()) throw DataError("'" + path + "' has no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<int> psv_values, label_values;
  long row_idx = 0;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    ++row_idx;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row_idx) + " of '" + path + "' has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));

    bool ok = false;
    psv_values.push_back(parse_binary(cells[psv_idx], ok));
    if (!ok)
      throw DataError("non-binary value '" + cells[psv_idx] + "' in column '" + psv_column +
                      "', row " + std::to_string(row_idx));
    if (label_idx >= 0) {
      label_values.push_back(parse_binary(cells[label_idx], ok));
      if (!ok)
        throw DataError("non-binary value '" + cells[label_idx] + "' in column '" +
                        *label_column + "', row " + std::to_string(row_idx));
    }

    std::vector<double> row(feature_cols.size());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      double value = 0.0;
      if (!parse_double(cells[feature_cols[j]], value) || !std::isfinite(value))
        throw DataError("non-numeric value '" + cells[feature_cols[j]] + "' in column '" +
                        feature_names[j] + "', row " + std::to_string(row_idx));
      row[j] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("'" + path + "' has no data rows");

  Dataset dataset;
  dataset.features.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      dataset.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  dataset.psv = Eigen::Map<Eigen::VectorXi>(psv_values.data(),
                                            static_cast<Eigen::Index>(psv_values.size()));
  if (label_idx >= 0)
    dataset.labels = Eigen::Map<Eigen::VectorXi>(label_values.data(),
                                                 static_cast<Eigen::Index>(label_values.size()));
  dataset.feature_names = feature_names;
  dataset.psv_name = psv_column;
  if (label_column) dataset.label_name = *label_column;
  const std::size_t slash = path.find_last_of("/\\");
  dataset.name = slash == std::string::npos ? path : path.substr(slash + 1);
  dataset.validate();
  return dataset;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");

  for (Eigen::Index j = 0; j < dataset.n_dims(); ++j) {
    const std::string name = static_cast<std::size_t>(j) < dataset.feature_names.size()
                                 ? dataset.feature_names[j]
                                 : "f" + std::to_string(j);
    out << name << ',';
  }
  out << dataset.psv_name;
  if (dataset.labels) out << ',' << dataset.label_name;
  out << '\n';

  for (Eigen::Index i = 0; i < dataset.n_instances(); ++i) {
    for (Eigen::Index j = 0; j < dataset.n_dims(); ++j)
      out << detail::format_double(dataset.features(i, j)) << ',';
    out << dataset.psv[i];
    if (dataset.labels) out << ',' << (*dataset.labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

Scaler Scaler::fit(const Dataset& train) {
  train.validate();
  const Eigen::Index n = train.n_instances();
  Scaler scaler;
  scaler.mean = train.features.colwise().mean();
  Eigen::VectorXd var = (train.features.rowwise() - scaler.mean.transpose())
                            .array()
                            .square()
                            .colwise()
                            .sum() /
                        static_cast<double>(n);
  scaler.scale.resize(var.size());
  for (Eigen::Index j = 0; j < var.size(); ++j)
    scaler.scale[j] = var[j] > 0.0 ? 1.0 / std::sqrt(var[j]) : 0.0;
  return scaler;
}

Dataset Scaler::transform(const Dataset& dataset) const {
  if (dataset.features.cols() != mean.size())
    throw DataError("scaler dimension does not match dataset");
  Dataset out = dataset;
  out.features = (dataset.features.rowwise() - mean.transpose()).array().rowwise() *
                 scale.transpose().array();
  return out;
}

std::pair<std::vector<Dataset>, Scaler> standardize(const Dataset& train,
                                                    const std::vector<Dataset>& others) {
  const Scaler scaler = Scaler::fit(train);
  std::vector<Dataset> scaled;
  scaled.reserve(others.size() + 1);
  scaled.push_back(scaler.transform(train));
  for (const auto& other : others) scaled.push_back(scaler.transform(other));
  return {std::move(scaled), scaler};
}

Dataset take_rows(const Dataset& dataset, const std::vector<Eigen::Index>& rows) {
  Dataset out = dataset;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.n_dims());
  out.psv.resize(static_cast<Eigen::Index>(rows.size()));
  if (dataset.labels) out.labels->resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = dataset.features.row(rows[i]);
    out.psv[static_cast<Eigen::Index>(i)] = dataset.psv[rows[i]];
    if (dataset.labels) (*out.labels)[static_cast<Eigen::Index>(i)] = (*dataset.labels)[rows[i]];
  }
  return out;
}

Dataset balance_by_psv(const Dataset& dataset, std::uint64_t seed) {
  dataset.validate();
  const auto [n0, n1] = dataset.group_sizes();
  if (n0 == 0 || n1 == 0) throw DataError("balance_by_psv needs both psv groups present");
  if (n0 == n1) return dataset;

  const int keep_value = n0 < n1 ? 0 : 1;  // 'small' group is kept whole
  const Eigen::Index target = std::min(n0, n1);

  std::vector<Eigen::Index> small, large;
  for (Eigen::Index i = 0; i < dataset.n_instances(); ++i)
    (dataset.psv[i] == keep_value ? small : large).push_back(i);

  Rng rng(seed);
  rng.shuffle(large);
  large.resize(static_cast<std::size_t>(target));

  std::vector<Eigen::Index> rows = small;
  rows.insert(rows.end(), large.begin(), large.end());
  std::sort(rows.begin(), rows.end());  // keep original row order
  return take_rows(dataset, rows);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double fraction,
                                          std::uint64_t seed) {
  dataset.validate();
  if (fraction < 0.0 || fraction > 1.0) throw ConfigError("split fraction must be in [0,1]");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dataset.n_instances()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  Rng rng(seed);
  rng.shuffle(order);
  const auto cut = static_cast<std::size_t>(
      std::lround(fraction * static_cast<double>(dataset.n_instances())));
  std::vector<Eigen::Index> first(order.begin(), order.begin() + cut);
  std::vector<Eigen::Index> second(order.begin() + cut, order.end());
  return {take_rows(dataset, first), take_rows(dataset, second)};
}

}  // namespace fairsvdd
