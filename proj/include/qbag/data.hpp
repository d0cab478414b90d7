#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qbag/error.hpp"
#include "qbag/matrix.hpp"
#include "qbag/rng.hpp"

namespace qbag {

enum class Task { Classification, Regression };

// Per-sample targets: either contiguous class codes 0..C-1 or real values.
class LabelVector {
 public:
  LabelVector() = default;

  static LabelVector classes(std::vector<int> codes, int num_classes);
  static LabelVector numeric(std::vector<double> values);

  bool is_class() const { return std::holds_alternative<std::vector<int>>(values_); }
  std::size_t size() const;

  // Throws UnsupportedTask when the variant does not match.
  const std::vector<int>& class_codes() const;
  std::vector<int>& class_codes();
  const std::vector<double>& numeric_values() const;
  std::vector<double>& numeric_values();

  int num_classes() const { return num_classes_; }

  LabelVector subset(std::span<const std::uint32_t> indices) const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::variant<std::vector<int>, std::vector<double>> values_;
  int num_classes_ = 0;  // 0 for numeric labels
};

struct Dataset {
  std::string name;
  Matrix features;
  LabelVector labels;
  std::vector<std::string> feature_names;
  // Original label values in sorted order; class code i maps back to
  // class_values[i].  Empty for numeric and synthetic datasets.
  std::vector<long long> class_values;

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  Dataset subset(std::span<const std::uint32_t> indices) const;
};

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> std_dev;  // constant features stored as 1.0
};

struct NoiseReport {
  double rate = 0.0;
  std::vector<std::size_t> flipped_indices;  // sorted ascending
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::uint32_t> train_indices;  // rows of the source dataset, ascending
  std::vector<std::uint32_t> test_indices;
};

// Reads a UTF-8 comma-separated file with one header row.  Every non-label
// cell must parse as a finite number.  Classification labels are integers,
// re-encoded to contiguous codes 0..C-1 preserving their sorted original
// order.  Throws MissingFile, MissingColumn, NonNumericCell, EmptyDataset.
Dataset load_csv(const std::string& path, const std::string& label_column, Task task);

// Splits into disjoint train/test covering all rows, |test| =
// ceil(test_fraction * N).  Stratified mode keeps per-class test counts
// within one sample of class proportions.  Both partitions must end up
// non-empty.  Row order within each partition follows the original.
SplitResult train_test_split(const Dataset& ds, double test_fraction, bool stratified,
                             Rng& rng);

// Per-feature mean and population standard deviation of the given (train)
// dataset; zero-variance features get std 1 so they scale to exactly 0.
ScalerParams fit_scaler(const Dataset& train);
Dataset apply_scaler(const ScalerParams& params, const Dataset& ds);
Dataset apply_scaler_inverse(const ScalerParams& params, const Dataset& ds);

// Flips exactly floor(rate * N) distinct uniformly chosen labels to a
// uniformly chosen *different* class.  Classification only.
std::pair<Dataset, NoiseReport> inject_label_noise(const Dataset& ds, double rate,
                                                   Rng& rng);

// Additive Gaussian noise on regression targets (optional extra; the
// benchmark pipeline leaves regression targets untouched by default).
Dataset inject_target_noise(const Dataset& ds, double sigma, Rng& rng);

// k Gaussian blobs with well-separated deterministic centers (pairwise
// distance >= 10); class label = generating blob index.
Dataset synthesize_blobs(std::size_t n_per_cluster, std::size_t dim, std::size_t k,
                         double spread, Rng& rng);

}  // namespace qbag
