#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbag/clustering.hpp"
#include "qbag/data.hpp"

namespace qbag {

enum class Learner {
  QMeansBagging,
  KMeansBagging,
  DtBagging,
  SingleQMeans,
  SingleKMeans,
};

std::string learner_name(Learner learner);
Learner learner_from_name(const std::string& name);

struct ExperimentConfig {
  std::string dataset_path;
  std::string label_column = "auto";  // "auto" accepts a "label" or "target" column
  Task task = Task::Classification;
  Learner learner = Learner::QMeansBagging;
  std::vector<std::size_t> b_values = {8};
  std::vector<double> delta_values = {0.2};
  std::size_t k = 10;
  double noise_rate = 0.05;  // training labels only; ignored for regression
  std::size_t repeats = 5;
  double test_fraction = 0.2;
  DistanceMode distance = DistanceMode::fidelity_exact();  // q-means learners only
  double bootstrap_fraction = 0.5;
  std::uint64_t master_seed = 42;
  std::string output_dir = "out";
};

struct ResultRow {
  std::string dataset;
  std::string learner;
  std::size_t b = 0;
  double delta = 0.0;
  std::size_t repeat_index = 0;
  std::uint64_t seed = 0;  // the cell's derived seed
  double train_metric = 0.0;
  double test_metric = 0.0;
  std::string metric_kind;  // "accuracy" or "mse"
  double mean_ensemble_variance = 0.0;
  double wall_time_ms = 0.0;
};

// Counters from the per-cell pipeline checks.  A contaminated test label
// or a scaler that cannot be reproduced from the train partition throws;
// Lloyd monotonicity is counted so callers can assert euclidean_fits ==
// monotonic_fits over a whole run.
struct AuditStats {
  std::size_t cells = 0;
  std::size_t euclidean_fits = 0;
  std::size_t monotonic_fits = 0;

  AuditStats& operator+=(const AuditStats& other);
};

// Runs the (delta, B, repeat) grid.  Every cell gets a fresh stratified
// split, a scaler fitted on its train partition, label noise injected into
// train labels only, and a learner seeded from the derived stream
// (master_seed, delta index, B index, repeat).  Cells run in parallel up
// to QBAG_THREADS (default: hardware concurrency); row order and content
// do not depend on scheduling.
std::vector<ResultRow> run_experiment_on(const Dataset& data, const ExperimentConfig& config,
                                         AuditStats* audit = nullptr);

// Same, loading config.dataset_path first.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      AuditStats* audit = nullptr);

// Orders by dataset, learner, delta, B, repeat.
void sort_rows(std::vector<ResultRow>& rows);

// Header plus one line per row, floats at 6 decimals, LF endings.
std::string rows_to_csv(const std::vector<ResultRow>& rows, bool include_wall_time = true);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> rows_from_csv_text(const std::string& text);
std::vector<ResultRow> read_csv(const std::string& path);

struct Table2Cell {
  std::string dataset;
  std::string learner;
  std::size_t b = 0;
  double mean_test_metric = 0.0;
  double std_test_metric = 0.0;  // population std over the delta x repeat cells
  std::size_t cell_count = 0;
};

struct Table2Result {
  std::vector<ResultRow> rows;       // every (learner, delta, B, repeat) cell
  std::vector<Table2Cell> summary;   // averaged over delta and repeats
  AuditStats audit;
};

// The three-learner comparison (dt_bagging, kmeans_bagging, qmeans_bagging),
// all in Euclidean mode; learner index L runs the grid under the derived
// master seed (config.master_seed, L).  config.learner and config.distance
// are ignored.
Table2Result run_table2(const Dataset& data, const ExperimentConfig& config);

// Deterministic CSV renderings; neither includes wall time.
std::string table2_cells_csv(const Table2Result& result);
std::string table2_summary_csv(const Table2Result& result);
// Aligned console table, one row per learner and one column per B.
std::string table2_text(const Table2Result& result);

// Mean and ±std of test_metric versus B, one series per delta value.  All
// rows must share one dataset, learner, and metric kind.
std::string plot_svg(const std::vector<ResultRow>& rows);
void emit_plot(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace qbag
