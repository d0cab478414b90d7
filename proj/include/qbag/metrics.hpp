#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qbag {

// Fraction of positions where predicted == actual.
double accuracy(std::span<const int> predicted, std::span<const int> actual);

// Mean squared error.
double mse(std::span<const double> predicted, std::span<const double> actual);

struct RepeatSummary {
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation
  std::size_t n_repeats = 0;
  std::vector<double> raw;
};

RepeatSummary summarize_repeats(std::vector<double> values);

}  // namespace qbag
