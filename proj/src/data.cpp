#include "qbag/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace qbag {

LabelVector LabelVector::classes(std::vector<int> codes, int num_classes) {
  LabelVector lv;
  lv.values_ = std::move(codes);
  lv.num_classes_ = num_classes;
  return lv;
}

LabelVector LabelVector::numeric(std::vector<double> values) {
  LabelVector lv;
  lv.values_ = std::move(values);
  return lv;
}

std::size_t LabelVector::size() const {
  return is_class() ? std::get<std::vector<int>>(values_).size()
                    : std::get<std::vector<double>>(values_).size();
}

const std::vector<int>& LabelVector::class_codes() const {
  if (!is_class()) throw Error(ErrorCode::UnsupportedTask, "labels are numeric, not classes");
  return std::get<std::vector<int>>(values_);
}

std::vector<int>& LabelVector::class_codes() {
  if (!is_class()) throw Error(ErrorCode::UnsupportedTask, "labels are numeric, not classes");
  return std::get<std::vector<int>>(values_);
}

const std::vector<double>& LabelVector::numeric_values() const {
  if (is_class()) throw Error(ErrorCode::UnsupportedTask, "labels are classes, not numeric");
  return std::get<std::vector<double>>(values_);
}

std::vector<double>& LabelVector::numeric_values() {
  if (is_class()) throw Error(ErrorCode::UnsupportedTask, "labels are classes, not numeric");
  return std::get<std::vector<double>>(values_);
}

LabelVector LabelVector::subset(std::span<const std::uint32_t> indices) const {
  if (is_class()) {
    const auto& codes = std::get<std::vector<int>>(values_);
    std::vector<int> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) out[i] = codes[indices[i]];
    return classes(std::move(out), num_classes_);
  }
  const auto& vals = std::get<std::vector<double>>(values_);
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = vals[indices[i]];
  return numeric(std::move(out));
}

Dataset Dataset::subset(std::span<const std::uint32_t> indices) const {
  Dataset out;
  out.name = name;
  out.features = features.select_rows(indices);
  out.labels = labels.subset(indices);
  out.feature_names = feature_names;
  out.class_values = class_values;
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const std::string_view cell = comma == std::string::npos
                                      ? std::string_view(line).substr(start)
                                      : std::string_view(line).substr(start, comma - start);
    cells.emplace_back(trim(cell));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& path) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << path << ": cell at data row " << row + 1 << ", column " << col + 1 << " ('"
        << cell << "') is not a finite number";
    throw Error(ErrorCode::NonNumericCell, msg.str());
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, Task task) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, path + " is empty");
  const std::vector<std::string> header = split_line(line);

  std::size_t label_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) {
      label_col = i;
      break;
    }
  }
  if (label_col == header.size()) {
    throw Error(ErrorCode::MissingColumn,
                path + " has no column named '" + label_column + "'");
  }

  std::vector<double> feature_values;
  std::vector<double> raw_labels;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << path << ": data row " << data_row + 1 << " has " << cells.size()
          << " cells, expected " << header.size();
      throw Error(ErrorCode::NonNumericCell, msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], data_row, c, path);
      if (c == label_col) {
        raw_labels.push_back(v);
      } else {
        feature_values.push_back(v);
      }
    }
    ++data_row;
  }
  if (data_row == 0) throw Error(ErrorCode::EmptyDataset, path + " has no data rows");

  Dataset ds;
  const std::size_t stem_begin = path.find_last_of("/\\") + 1;
  const std::size_t stem_end = path.rfind('.');
  ds.name = path.substr(stem_begin,
                        stem_end == std::string::npos || stem_end < stem_begin
                            ? std::string::npos
                            : stem_end - stem_begin);
  ds.features = Matrix(data_row, header.size() - 1);
  std::copy(feature_values.begin(), feature_values.end(), ds.features.values().begin());
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != label_col) ds.feature_names.push_back(header[i]);
  }

  if (task == Task::Regression) {
    ds.labels = LabelVector::numeric(std::move(raw_labels));
    return ds;
  }

  // Classification: labels must be integers; re-encode to 0..C-1 keeping
  // the sorted order of the original values.
  std::vector<long long> originals(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    const double v = raw_labels[i];
    if (v != std::floor(v)) {
      std::ostringstream msg;
      msg << path << ": label at data row " << i + 1 << " (" << v
          << ") is not an integer class";
      throw Error(ErrorCode::NonNumericCell, msg.str());
    }
    originals[i] = static_cast<long long>(v);
  }
  std::vector<long long> sorted = originals;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<long long, int> code_of;
  for (std::size_t i = 0; i < sorted.size(); ++i) code_of[sorted[i]] = static_cast<int>(i);
  std::vector<int> codes(originals.size());
  for (std::size_t i = 0; i < originals.size(); ++i) codes[i] = code_of[originals[i]];
  ds.labels = LabelVector::classes(std::move(codes), static_cast<int>(sorted.size()));
  ds.class_values = std::move(sorted);
  return ds;
}

SplitResult train_test_split(const Dataset& ds, double test_fraction, bool stratified,
                             Rng& rng) {
  const std::size_t n = ds.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 rows to split");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test_fraction must be in (0, 1)");
  }
  const std::size_t n_test = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw Error(ErrorCode::InvalidArgument, "split leaves an empty partition");
  }

  std::vector<std::uint32_t> test_indices;
  test_indices.reserve(n_test);

  auto shuffle = [&rng](std::vector<std::uint32_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_below(rng, i);
      std::swap(v[i - 1], v[j]);
    }
  };

  if (stratified && ds.labels.is_class()) {
    const auto& codes = ds.labels.class_codes();
    const int c = ds.labels.num_classes();
    std::vector<std::vector<std::uint32_t>> per_class(c);
    for (std::size_t i = 0; i < n; ++i) per_class[codes[i]].push_back(static_cast<std::uint32_t>(i));

    // Largest-remainder apportionment of the test quota across classes.
    std::vector<std::size_t> take(c, 0);
    std::size_t assigned = 0;
    std::vector<std::pair<double, int>> remainders;
    for (int cls = 0; cls < c; ++cls) {
      const double quota = test_fraction * static_cast<double>(per_class[cls].size());
      take[cls] = static_cast<std::size_t>(std::floor(quota));
      assigned += take[cls];
      remainders.emplace_back(quota - std::floor(quota), cls);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::size_t extra = n_test > assigned ? n_test - assigned : 0;
    for (const auto& [rem, cls] : remainders) {
      if (extra == 0) break;
      if (take[cls] < per_class[cls].size()) {
        ++take[cls];
        --extra;
      }
    }
    for (int cls = 0; cls < c && extra > 0; ++cls) {
      while (extra > 0 && take[cls] < per_class[cls].size()) {
        ++take[cls];
        --extra;
      }
    }
    for (int cls = 0; cls < c; ++cls) {
      shuffle(per_class[cls]);
      test_indices.insert(test_indices.end(), per_class[cls].begin(),
                          per_class[cls].begin() + take[cls]);
    }
  } else {
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    shuffle(all);
    test_indices.assign(all.begin(), all.begin() + n_test);
  }

  std::sort(test_indices.begin(), test_indices.end());
  std::vector<char> in_test(n, 0);
  for (std::uint32_t i : test_indices) in_test[i] = 1;
  std::vector<std::uint32_t> train_indices;
  train_indices.reserve(n - test_indices.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_test[i]) train_indices.push_back(static_cast<std::uint32_t>(i));
  }

  return {ds.subset(train_indices), ds.subset(test_indices), std::move(train_indices),
          std::move(test_indices)};
}

ScalerParams fit_scaler(const Dataset& train) {
  const std::size_t n = train.size();
  const std::size_t d = train.dim();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit scaler on empty dataset");
  ScalerParams p;
  p.mean.assign(d, 0.0);
  p.std_dev.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = train.features.row(i);
    for (std::size_t j = 0; j < d; ++j) p.mean[j] += row[j];
  }
  for (std::size_t j = 0; j < d; ++j) p.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = train.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = row[j] - p.mean[j];
      p.std_dev[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    p.std_dev[j] = std::sqrt(p.std_dev[j] / static_cast<double>(n));
    if (p.std_dev[j] == 0.0) p.std_dev[j] = 1.0;
  }
  return p;
}

namespace {

Dataset transform(const ScalerParams& params, const Dataset& ds, bool inverse) {
  if (params.mean.size() != ds.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "scaler dimension does not match dataset");
  }
  Dataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double* row = out.features.row(i);
    for (std::size_t j = 0; j < out.dim(); ++j) {
      row[j] = inverse ? row[j] * params.std_dev[j] + params.mean[j]
                       : (row[j] - params.mean[j]) / params.std_dev[j];
    }
  }
  return out;
}

}  // namespace

Dataset apply_scaler(const ScalerParams& params, const Dataset& ds) {
  return transform(params, ds, false);
}

Dataset apply_scaler_inverse(const ScalerParams& params, const Dataset& ds) {
  return transform(params, ds, true);
}

std::pair<Dataset, NoiseReport> inject_label_noise(const Dataset& ds, double rate,
                                                   Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise rate must be in [0, 1)");
  }
  if (!ds.labels.is_class()) {
    throw Error(ErrorCode::UnsupportedTask, "label noise requires classification labels");
  }
  const std::size_t n = ds.size();
  const std::size_t flips = static_cast<std::size_t>(rate * static_cast<double>(n));
  NoiseReport report;
  report.rate = rate;
  Dataset out = ds;
  if (flips == 0) return {std::move(out), std::move(report)};

  const int c = ds.labels.num_classes();
  if (c < 2) {
    throw Error(ErrorCode::InvalidArgument, "label noise needs at least 2 classes");
  }

  // Partial Fisher-Yates gives `flips` distinct indices without replacement.
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t j = i + uniform_below(rng, n - i);
    std::swap(pool[i], pool[j]);
  }
  report.flipped_indices.assign(pool.begin(), pool.begin() + flips);
  std::sort(report.flipped_indices.begin(), report.flipped_indices.end());

  auto& codes = out.labels.class_codes();
  for (std::size_t idx : report.flipped_indices) {
    const int old = codes[idx];
    const int alt = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(c - 1)));
    codes[idx] = alt < old ? alt : alt + 1;
  }
  return {std::move(out), std::move(report)};
}

Dataset inject_target_noise(const Dataset& ds, double sigma, Rng& rng) {
  if (ds.labels.is_class()) {
    throw Error(ErrorCode::UnsupportedTask, "target noise requires regression labels");
  }
  if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  Dataset out = ds;
  if (sigma == 0.0) return out;
  for (double& y : out.labels.numeric_values()) y += sigma * gaussian(rng);
  return out;
}

Dataset synthesize_blobs(std::size_t n_per_cluster, std::size_t dim, std::size_t k,
                         double spread, Rng& rng) {
  if (n_per_cluster == 0 || dim == 0 || k == 0) {
    throw Error(ErrorCode::InvalidArgument, "blob sizes must be positive");
  }
  Dataset ds;
  ds.name = "blobs";
  ds.features = Matrix(n_per_cluster * k, dim);
  std::vector<int> labels(n_per_cluster * k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> center(dim, 0.0);
    center[j % dim] = 10.0 * (1.0 + static_cast<double>(j / dim));
    for (std::size_t i = 0; i < n_per_cluster; ++i) {
      const std::size_t row = j * n_per_cluster + i;
      double* dst = ds.features.row(row);
      for (std::size_t m = 0; m < dim; ++m) dst[m] = center[m] + spread * gaussian(rng);
      labels[row] = static_cast<int>(j);
    }
  }
  ds.labels = LabelVector::classes(std::move(labels), static_cast<int>(k));
  for (std::size_t m = 0; m < dim; ++m) ds.feature_names.push_back("x" + std::to_string(m));
  return ds;
}

}  // namespace qbag
