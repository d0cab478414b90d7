#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "qbag/error.hpp"

namespace qbag {

// One aggregated prediction plus the raw per-learner outputs.  For
// regression, variance is the population variance of the learner outputs;
// for classification it is the vote-disagreement rate (1 - modal vote
// fraction).
struct EnsemblePrediction {
  std::variant<int, double> value;
  std::variant<std::vector<int>, std::vector<double>> per_learner;
  double variance = 0.0;

  int class_value() const { return std::get<int>(value); }
  double numeric_value() const { return std::get<double>(value); }
};

// Majority vote; ties resolve to the smallest class code.
inline EnsemblePrediction aggregate_class_votes(std::vector<int> votes) {
  if (votes.empty()) throw Error(ErrorCode::InvalidArgument, "no votes to aggregate");
  int max_code = 0;
  for (int v : votes) max_code = v > max_code ? v : max_code;
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_code) + 1, 0);
  for (int v : votes) ++counts[v];
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  EnsemblePrediction p;
  p.value = static_cast<int>(best);
  p.variance = 1.0 - static_cast<double>(counts[best]) / static_cast<double>(votes.size());
  p.per_learner = std::move(votes);
  return p;
}

// Mean prediction and population variance of the learner outputs.
inline EnsemblePrediction aggregate_values(std::vector<double> outputs) {
  if (outputs.empty()) throw Error(ErrorCode::InvalidArgument, "no outputs to aggregate");
  const double n = static_cast<double>(outputs.size());
  double mean = 0.0;
  for (double v : outputs) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : outputs) var += (v - mean) * (v - mean);
  var /= n;
  EnsemblePrediction p;
  p.value = mean;
  p.variance = var;
  p.per_learner = std::move(outputs);
  return p;
}

}  // namespace qbag
