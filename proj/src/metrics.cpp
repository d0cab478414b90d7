#include "qbag/metrics.hpp"

#include <cmath>

#include "qbag/error.hpp"

namespace qbag {

double accuracy(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and truth sizes differ");
  }
  if (predicted.empty()) throw Error(ErrorCode::InvalidArgument, "accuracy of nothing");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == actual[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double mse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and truth sizes differ");
  }
  if (predicted.empty()) throw Error(ErrorCode::InvalidArgument, "mse of nothing");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double diff = predicted[i] - actual[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(predicted.size());
}

RepeatSummary summarize_repeats(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "summary of nothing");
  RepeatSummary s;
  s.n_repeats = values.size();
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double sq = 0.0;
  for (double v : values) {
    const double diff = v - s.mean;
    sq += diff * diff;
  }
  s.std_dev = std::sqrt(sq / n);
  s.raw = std::move(values);
  return s;
}

}  // namespace qbag
