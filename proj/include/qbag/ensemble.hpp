#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbag/aggregate.hpp"
#include "qbag/clustering.hpp"
#include "qbag/data.hpp"

namespace qbag {

struct QbbConfig {
  std::size_t learner_count = 8;     // B
  double bootstrap_fraction = 0.5;   // each learner trains on ceil(fraction*N) draws
  QMeansConfig qmeans;
  Task task = Task::Classification;
  std::uint64_t seed = 0;  // master seed; learner i uses the derived stream (seed, i)
};

struct QbbModel {
  std::vector<ClusterModel> learners;
  Task task = Task::Classification;
  QbbConfig config;
};

// Seed of the stream learner i consumes (bootstrap draw, then seeding and
// any shot sampling); exposed so a single learner fitted outside the
// ensemble can reproduce member i exactly.
std::uint64_t learner_stream_seed(const QbbConfig& config, std::size_t learner_index);

// Trains learner_count labeled q-means models, each on its own bootstrap
// sample drawn with qram_bootstrap from a per-learner derived stream.
// Results do not depend on training order.  Throws when the bootstrap
// sample would be smaller than k, or when the label type does not match
// the task.
QbbModel fit_qbb(const Dataset& train, const QbbConfig& config);

// Aggregates the learners' outputs for one point: majority vote with ties
// to the smallest code (classification) or mean with population variance
// (regression).  rng is consumed only in shot mode.
EnsemblePrediction predict_one(const QbbModel& model, std::span<const double> x,
                               Rng* rng = nullptr);
std::vector<EnsemblePrediction> predict_batch(const QbbModel& model, const Matrix& x,
                                              Rng* rng = nullptr);

// Mean over test points (and repeats) of the per-prediction variance, for
// each ensemble size in b_values.  Repeat r of size B uses the derived
// stream (master_seed, B index, r).
std::vector<std::pair<std::size_t, double>> ensemble_variance_profile(
    const Dataset& train, const Dataset& test, const QbbConfig& base,
    std::span<const std::size_t> b_values, std::size_t repeats, std::uint64_t master_seed);

// Versioned text serialization (JSON; doubles round-trip exactly via
// shortest-representation decimals).
std::string qbb_to_text(const QbbModel& model);
QbbModel qbb_from_text(const std::string& text);
void save_qbb(const QbbModel& model, const std::string& path);
QbbModel load_qbb(const std::string& path);

}  // namespace qbag
