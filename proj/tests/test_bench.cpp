#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "qbag/bench.hpp"
#include "qbag/cli.hpp"
#include "qbag/data.hpp"
#include "qbag/rng.hpp"
#include "test_util.hpp"

using namespace qbag;
using qbag::testutil::TempDir;
using qbag::testutil::data_path;
using qbag::testutil::regression_blobs;

namespace {

Dataset tiny_blobs(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Dataset ds = synthesize_blobs(20, 2, 3, 0.2, rng);
  return ds;
}

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.task = Task::Classification;
  config.learner = Learner::QMeansBagging;
  config.b_values = {2, 4};
  config.delta_values = {0.5, 1.0};
  config.k = 3;
  config.noise_rate = 0.05;
  config.repeats = 2;
  config.test_fraction = 0.2;
  config.distance = DistanceMode::euclidean();
  config.bootstrap_fraction = 0.6;
  config.master_seed = 900;
  return config;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("learner names round-trip") {
  for (Learner l : {Learner::QMeansBagging, Learner::KMeansBagging, Learner::DtBagging,
                    Learner::SingleQMeans, Learner::SingleKMeans}) {
    CHECK(learner_from_name(learner_name(l)) == l);
  }
  CHECK(learner_name(Learner::QMeansBagging) == "qmeans_bagging");
  CHECK(learner_name(Learner::DtBagging) == "dt_bagging");
  CHECK_THROWS_AS(learner_from_name("gradient_boosting"), Error);
}

TEST_CASE("a grid run emits one sorted row per cell with derived seeds") {
  const Dataset data = tiny_blobs(901);
  const ExperimentConfig config = tiny_config();
  AuditStats audit;
  const std::vector<ResultRow> rows = run_experiment_on(data, config, &audit);

  REQUIRE(rows.size() == 8);
  CHECK(audit.cells == 8);
  CHECK(audit.euclidean_fits > 0);
  CHECK(audit.euclidean_fits == audit.monotonic_fits);

  std::vector<ResultRow> sorted = rows;
  sort_rows(sorted);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].b == sorted[i].b);
    CHECK(rows[i].delta == sorted[i].delta);
    CHECK(rows[i].repeat_index == sorted[i].repeat_index);
  }

  for (const ResultRow& row : rows) {
    CHECK(row.dataset == data.name);
    CHECK(row.learner == "qmeans_bagging");
    CHECK(row.metric_kind == "accuracy");
    CHECK(row.train_metric >= 0.0);
    CHECK(row.train_metric <= 1.0);
    CHECK(row.test_metric >= 0.0);
    CHECK(row.test_metric <= 1.0);
    CHECK(row.mean_ensemble_variance >= 0.0);
    CHECK(row.wall_time_ms >= 0.0);
  }

  CHECK(rows[0].delta == 0.5);
  CHECK(rows[0].b == 2);
  CHECK(rows[0].repeat_index == 0);
  CHECK(rows[0].seed == derive_seed(config.master_seed, {0, 0, 0}));
  CHECK(rows.back().delta == 1.0);
  CHECK(rows.back().b == 4);
  CHECK(rows.back().repeat_index == 1);
  CHECK(rows.back().seed == derive_seed(config.master_seed, {1, 1, 1}));
}

TEST_CASE("a full-shaped tree grid yields one row per cell") {
  const Dataset data = tiny_blobs(902);
  ExperimentConfig config = tiny_config();
  config.learner = Learner::DtBagging;
  config.b_values = {1, 2, 3, 4, 5, 6, 7, 8};
  config.delta_values = {0.1, 0.2, 0.3, 0.4};
  config.repeats = 5;
  const std::vector<ResultRow> rows = run_experiment_on(data, config);
  CHECK(rows.size() == 160);
  CHECK(rows_to_csv(rows).find('\n') != std::string::npos);
  CHECK(count_occurrences(rows_to_csv(rows), "\n") == 161);
}

TEST_CASE("grid runs are deterministic apart from wall time") {
  const Dataset data = tiny_blobs(903);
  const ExperimentConfig config = tiny_config();
  const std::vector<ResultRow> a = run_experiment_on(data, config);
  const std::vector<ResultRow> b = run_experiment_on(data, config);
  CHECK(rows_to_csv(a, false) == rows_to_csv(b, false));
}

TEST_CASE("csv round-trips and re-emits byte-identically") {
  const Dataset data = tiny_blobs(904);
  const std::vector<ResultRow> rows = run_experiment_on(data, tiny_config());

  TempDir tmp;
  const std::string path = tmp.file("rows.csv");
  emit_csv(rows, path);
  const std::vector<ResultRow> back = read_csv(path);
  REQUIRE(back.size() == rows.size());
  CHECK(rows_to_csv(back) == rows_to_csv(rows));

  const std::string no_wall = rows_to_csv(rows, false);
  const std::vector<ResultRow> lean = rows_from_csv_text(no_wall);
  CHECK(rows_to_csv(lean, false) == no_wall);
  for (const ResultRow& row : lean) CHECK(row.wall_time_ms == 0.0);

  CHECK(rows_to_csv({}) ==
        "dataset,learner,B,delta,repeat_index,seed,train_metric,test_metric,"
        "metric_kind,mean_ensemble_variance,wall_time_ms\n");
}

TEST_CASE("csv parsing rejects malformed input") {
  CHECK_THROWS_AS(rows_from_csv_text("not,a,known,header\n"), Error);
  const std::string header =
      "dataset,learner,B,delta,repeat_index,seed,train_metric,test_metric,"
      "metric_kind,mean_ensemble_variance\n";
  CHECK_THROWS_AS(rows_from_csv_text(header + "blobs,dt_bagging,4\n"), Error);
  CHECK_THROWS_AS(rows_from_csv_text(header +
                                     "blobs,dt_bagging,4,0.5,0,9,xx,0.9,accuracy,0.1\n"),
                  Error);
  CHECK(rows_from_csv_text(header).empty());
}

TEST_CASE("single-learner runs match a one-member bagging run exactly") {
  const Dataset data = tiny_blobs(905);

  ExperimentConfig single = tiny_config();
  single.learner = Learner::SingleKMeans;
  single.b_values = {1};
  single.delta_values = {0.8};
  single.noise_rate = 0.0;
  single.repeats = 2;

  ExperimentConfig bagged = single;
  bagged.learner = Learner::KMeansBagging;
  bagged.bootstrap_fraction = 1.0;

  const std::vector<ResultRow> s = run_experiment_on(data, single);
  const std::vector<ResultRow> g = run_experiment_on(data, bagged);
  REQUIRE(s.size() == g.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].train_metric == g[i].train_metric);
    CHECK(s[i].test_metric == g[i].test_metric);
    CHECK(s[i].mean_ensemble_variance == 0.0);
    CHECK(g[i].mean_ensemble_variance == 0.0);
  }
}

TEST_CASE("regression grids score with mse and ignore the noise rate") {
  Rng rng = make_rng(906);
  const Dataset data = regression_blobs(20, 2, 3, 0.2, rng);

  ExperimentConfig config = tiny_config();
  config.task = Task::Regression;
  config.learner = Learner::QMeansBagging;
  config.noise_rate = 0.3;
  config.b_values = {2};
  config.delta_values = {1.0};
  config.repeats = 2;

  const std::vector<ResultRow> rows = run_experiment_on(data, config);
  REQUIRE(rows.size() == 2);
  for (const ResultRow& row : rows) {
    CHECK(row.metric_kind == "mse");
    CHECK(row.test_metric >= 0.0);
    CHECK(row.test_metric < 1.0);
  }

  config.learner = Learner::DtBagging;
  const std::vector<ResultRow> tree_rows = run_experiment_on(data, config);
  CHECK(tree_rows[0].metric_kind == "mse");
}

TEST_CASE("config validation rejects empty grids and bad rates") {
  const Dataset data = tiny_blobs(907);
  ExperimentConfig config = tiny_config();
  config.b_values.clear();
  CHECK_THROWS_AS(run_experiment_on(data, config), Error);

  config = tiny_config();
  config.delta_values = {0.0};
  CHECK_THROWS_AS(run_experiment_on(data, config), Error);

  config = tiny_config();
  config.noise_rate = 1.0;
  CHECK_THROWS_AS(run_experiment_on(data, config), Error);

  config = tiny_config();
  config.test_fraction = 0.0;
  CHECK_THROWS_AS(run_experiment_on(data, config), Error);

  config = tiny_config();
  config.task = Task::Regression;
  try {
    run_experiment_on(data, config);
    FAIL("expected a task mismatch error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedTask);
  }
}

TEST_CASE("the three-learner comparison is complete and byte-stable") {
  const Dataset data = tiny_blobs(908);
  ExperimentConfig config = tiny_config();
  config.repeats = 1;

  const Table2Result first = run_table2(data, config);
  REQUIRE(first.rows.size() == 12);
  REQUIRE(first.summary.size() == 6);
  CHECK(first.audit.cells == 12);
  CHECK(first.audit.euclidean_fits == first.audit.monotonic_fits);

  std::vector<std::string> learners;
  for (const Table2Cell& cell : first.summary) {
    if (learners.empty() || learners.back() != cell.learner) {
      learners.push_back(cell.learner);
    }
    CHECK(cell.cell_count == 2);
    CHECK(cell.dataset == data.name);
  }
  CHECK(learners ==
        std::vector<std::string>{"dt_bagging", "kmeans_bagging", "qmeans_bagging"});

  const Table2Result second = run_table2(data, config);
  CHECK(table2_cells_csv(second) == table2_cells_csv(first));
  CHECK(table2_summary_csv(second) == table2_summary_csv(first));
  CHECK(table2_cells_csv(first).find("wall_time") == std::string::npos);

  const std::string text = table2_text(first);
  CHECK(text.find("dt_bagging") != std::string::npos);
  CHECK(text.find("qmeans_bagging") != std::string::npos);
  CHECK(text.find("B=2") != std::string::npos);
}

TEST_CASE("plots draw one series per delta and are deterministic") {
  const Dataset data = tiny_blobs(909);
  ExperimentConfig config = tiny_config();
  config.learner = Learner::DtBagging;
  config.delta_values = {0.1, 0.2, 0.3, 0.4};
  config.b_values = {2, 4, 8};
  config.repeats = 2;
  const std::vector<ResultRow> rows = run_experiment_on(data, config);

  const std::string svg = plot_svg(rows);
  CHECK(count_occurrences(svg, "<polyline") == 4);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("delta=0.10") != std::string::npos);
  CHECK(plot_svg(rows) == svg);

  std::vector<ResultRow> one_cell(rows.begin(), rows.begin() + 1);
  CHECK(plot_svg(one_cell).find("<polyline") != std::string::npos);

  CHECK_THROWS_AS(plot_svg({}), Error);

  std::vector<ResultRow> mixed = rows;
  mixed[0].learner = "qmeans_bagging";
  CHECK_THROWS_AS(plot_svg(mixed), Error);

  TempDir tmp;
  const std::string path = tmp.file("plot.svg");
  emit_plot(rows, path);
  CHECK(std::filesystem::exists(path));
}

TEST_CASE("cli exit codes: usage, runtime failures, success") {
  TempDir tmp;

  CHECK(cli_main({"bogus"}) == 2);
  CHECK(cli_main({}) == 2);
  CHECK(cli_main({"--help"}) == 0);
  CHECK(cli_main({"run"}) == 2);

  CHECK(cli_main({"run", "--dataset", tmp.file("absent.csv"), "--out", tmp.dir()}) == 1);

  const std::vector<std::string> run_args = {
      "run",       "--dataset", data_path("iris.csv"),
      "--learner", "dt_bagging", "--B", "2",
      "--delta",   "0.5",       "--repeats", "1",
      "--k",       "3",         "--out",     tmp.dir()};
  CHECK(cli_main(run_args) == 0);
  const std::string results = tmp.dir() + "/results.csv";
  REQUIRE(std::filesystem::exists(results));
  const std::vector<ResultRow> rows = read_csv(results);
  CHECK(rows.size() == 1);
  CHECK(rows[0].dataset == "iris");

  CHECK(cli_main({"plot", "--rows", results, "--out", tmp.file("iris.svg")}) == 0);
  CHECK(std::filesystem::exists(tmp.file("iris.svg")));

  const std::vector<std::string> table_args = {
      "table2", "--dataset", data_path("iris.csv"), "--B", "2,4", "--delta",
      "0.5",    "--repeats", "1",                   "--k", "3",   "--out",
      tmp.dir()};
  CHECK(cli_main(table_args) == 0);
  CHECK(std::filesystem::exists(tmp.dir() + "/table2_cells.csv"));
  CHECK(std::filesystem::exists(tmp.dir() + "/table2_summary.csv"));
}
