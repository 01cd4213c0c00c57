#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fairsvdd {

// Tabular dataset: features plus a binary protected-status column and optional
// normal(0)/abnormal(1) labels. Row i of `features` is one instance.
struct Dataset {
  Eigen::MatrixXd features;                // n x d
  Eigen::VectorXi psv;                     // n, values in {0, 1}
  std::optional<Eigen::VectorXi> labels;   // n, values in {0, 1}
  std::vector<std::string> feature_names;  // size d
  std::string psv_name = "psv";
  std::string label_name = "label";
  std::string name;

  Eigen::Index n_instances() const { return features.rows(); }
  Eigen::Index n_dims() const { return features.cols(); }

  // Enforces the type invariants: n >= 1, finite features, binary psv/labels,
  // consistent shapes. Throws DataError.
  void validate() const;

  // Instance counts per protected-status value.
  std::pair<Eigen::Index, Eigen::Index> group_sizes() const;
};

// Reads a headered comma-separated file. All columns other than `psv_column`
// and `label_column` become features, in header order, and must parse as
// finite reals. Row indices in error messages are 1-based data rows (the
// header is row 0).
Dataset load_csv(const std::string& path, const std::string& psv_column,
                 const std::optional<std::string>& label_column = std::nullopt);

// Writes the dataset in the load_csv format. Reals are printed with 17
// significant digits so a round-trip reproduces every double bit-exactly.
void save_csv(const Dataset& dataset, const std::string& path);

// Per-column affine map fit on a training set: y = (x - mean) * scale with
// scale = 1/stddev (population convention) and scale = 0 for constant columns,
// which maps them to zero everywhere.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Scaler fit(const Dataset& train);
  Dataset transform(const Dataset& dataset) const;
};

// Standardizes `train` to zero mean / unit variance per column and applies the
// train-fitted map to every dataset in `others`.
std::pair<std::vector<Dataset>, Scaler> standardize(const Dataset& train,
                                                    const std::vector<Dataset>& others);

// Uniform subsample (without replacement) of the over-represented group so
// both protected-status groups end up with min(|group0|, |group1|) instances.
// Already-balanced input is returned unchanged.
Dataset balance_by_psv(const Dataset& dataset, std::uint64_t seed);

// Deterministic shuffle-and-partition: first part gets round(fraction * n) rows.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double fraction,
                                          std::uint64_t seed);

// Row subset in the given order.
Dataset take_rows(const Dataset& dataset, const std::vector<Eigen::Index>& rows);

}  // namespace fairsvdd
