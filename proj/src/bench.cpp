#include "qbag/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "qbag/baselines.hpp"
#include "qbag/ensemble.hpp"
#include "qbag/error.hpp"
#include "qbag/metrics.hpp"

namespace qbag {

namespace {

constexpr std::uint64_t kStreamSplit = 0xA1;
constexpr std::uint64_t kStreamNoise = 0xA2;
constexpr std::uint64_t kStreamFit = 0xA3;
constexpr std::uint64_t kStreamPredict = 0xA4;
constexpr std::uint64_t kStreamTable2 = 0xB2;

const char* kCsvHeader =
    "dataset,learner,B,delta,repeat_index,seed,train_metric,test_metric,"
    "metric_kind,mean_ensemble_variance";

std::size_t max_threads() {
  if (const char* env = std::getenv("QBAG_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

template <typename Fn>
void parallel_cells(std::size_t count, const Fn& fn) {
  const std::size_t workers = std::min(max_threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void validate(const ExperimentConfig& config, const Dataset& data) {
  if (config.b_values.empty() || config.delta_values.empty()) {
    throw Error(ErrorCode::InvalidArgument, "B and delta lists must be nonempty");
  }
  for (std::size_t b : config.b_values) {
    if (b < 1) throw Error(ErrorCode::InvalidArgument, "B values must be >= 1");
  }
  for (double d : config.delta_values) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::InvalidArgument, "delta values must be finite and > 0");
    }
  }
  if (config.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  if (config.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (!(config.noise_rate >= 0.0 && config.noise_rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise rate must be in [0, 1)");
  }
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test_fraction must be in (0, 1)");
  }
  if (!(config.bootstrap_fraction > 0.0 && config.bootstrap_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap_fraction must be in (0, 1]");
  }
  const bool wants_class = config.task == Task::Classification;
  if (wants_class != data.labels.is_class()) {
    throw Error(ErrorCode::UnsupportedTask,
                "task does not match the dataset's label type");
  }
}

void check_test_labels(const Dataset& source, const Dataset& test,
                       std::span<const std::uint32_t> test_indices) {
  bool ok = test.size() == test_indices.size();
  if (ok && source.labels.is_class()) {
    const auto& src = source.labels.class_codes();
    const auto& got = test.labels.class_codes();
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i] != src[test_indices[i]]) {
        ok = false;
        break;
      }
    }
  } else if (ok) {
    const auto& src = source.labels.numeric_values();
    const auto& got = test.labels.numeric_values();
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i] != src[test_indices[i]]) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument,
                "pipeline audit: test labels do not match the source dataset");
  }
}

void check_scaler(const Dataset& source, std::span<const std::uint32_t> train_indices,
                  const ScalerParams& used) {
  const ScalerParams again = fit_scaler(source.subset(train_indices));
  if (again.mean != used.mean || again.std_dev != used.std_dev) {
    throw Error(ErrorCode::InvalidArgument,
                "pipeline audit: scaler does not reproduce from the train partition");
  }
}

struct CellOutput {
  ResultRow row;
  AuditStats audit;
};

void audit_lloyd(const QbbModel& model, AuditStats& audit) {
  for (const ClusterModel& m : model.learners) {
    if (m.mode.kind != DistanceMode::Kind::Euclidean) continue;
    ++audit.euclidean_fits;
    bool monotonic = true;
    for (std::size_t i = 0; i + 1 < m.inertia_history.size(); ++i) {
      if (m.inertia_history[i + 1] > m.inertia_history[i]) {
        monotonic = false;
        break;
      }
    }
    if (monotonic) ++audit.monotonic_fits;
  }
}

double mean_variance(const std::vector<EnsemblePrediction>& preds) {
  double sum = 0.0;
  for (const EnsemblePrediction& p : preds) sum += p.variance;
  return sum / static_cast<double>(preds.size());
}

double score(const std::vector<EnsemblePrediction>& preds, const LabelVector& truth,
             Task task) {
  if (task == Task::Classification) {
    std::vector<int> predicted;
    predicted.reserve(preds.size());
    for (const EnsemblePrediction& p : preds) predicted.push_back(p.class_value());
    return accuracy(predicted, truth.class_codes());
  }
  std::vector<double> predicted;
  predicted.reserve(preds.size());
  for (const EnsemblePrediction& p : preds) predicted.push_back(p.numeric_value());
  return mse(predicted, truth.numeric_values());
}

CellOutput run_cell(const Dataset& data, const ExperimentConfig& config, std::size_t di,
                    std::size_t bi, std::size_t rep) {
  const std::uint64_t cell_seed = derive_seed(config.master_seed, {di, bi, rep});
  const double delta = config.delta_values[di];
  const std::size_t b = config.b_values[bi];
  const bool classification = config.task == Task::Classification;
  const auto started = std::chrono::steady_clock::now();

  Rng split_rng = make_rng(cell_seed, {kStreamSplit});
  const SplitResult split =
      train_test_split(data, config.test_fraction, classification, split_rng);

  const ScalerParams scaler = fit_scaler(split.train);
  Dataset train = apply_scaler(scaler, split.train);
  const Dataset test = apply_scaler(scaler, split.test);

  if (classification && config.noise_rate > 0.0) {
    Rng noise_rng = make_rng(cell_seed, {kStreamNoise});
    train = inject_label_noise(train, config.noise_rate, noise_rng).first;
  }

  check_test_labels(data, split.test, split.test_indices);
  check_scaler(data, split.train_indices, scaler);

  CellOutput out;
  out.audit.cells = 1;

  const std::uint64_t fit_seed = derive_seed(cell_seed, {kStreamFit});
  Rng pred_rng = make_rng(cell_seed, {kStreamPredict});
  std::vector<EnsemblePrediction> train_preds;
  std::vector<EnsemblePrediction> test_preds;

  if (config.learner == Learner::DtBagging) {
    TreeConfig tree_config;
    tree_config.seed = fit_seed;
    const BaggedTrees model =
        fit_bagged_trees(train, b, config.bootstrap_fraction, tree_config);
    train_preds = predict_bagged_batch(model, train.features);
    test_preds = predict_bagged_batch(model, test.features);
  } else {
    const bool single = config.learner == Learner::SingleQMeans ||
                        config.learner == Learner::SingleKMeans;
    const bool quantum = config.learner == Learner::QMeansBagging ||
                         config.learner == Learner::SingleQMeans;
    QbbConfig qbb;
    qbb.learner_count = single ? 1 : b;
    qbb.bootstrap_fraction = single ? 1.0 : config.bootstrap_fraction;
    qbb.task = config.task;
    qbb.seed = fit_seed;
    qbb.qmeans.k = config.k;
    qbb.qmeans.delta = delta;
    qbb.qmeans.mode = quantum ? config.distance : DistanceMode::euclidean();
    const QbbModel model = fit_qbb(train, qbb);
    audit_lloyd(model, out.audit);
    train_preds = predict_batch(model, train.features, &pred_rng);
    test_preds = predict_batch(model, test.features, &pred_rng);
  }

  const auto finished = std::chrono::steady_clock::now();

  ResultRow& row = out.row;
  row.dataset = data.name;
  row.learner = learner_name(config.learner);
  row.b = b;
  row.delta = delta;
  row.repeat_index = rep;
  row.seed = cell_seed;
  row.train_metric = score(train_preds, train.labels, config.task);
  row.test_metric = score(test_preds, test.labels, config.task);
  row.metric_kind = classification ? "accuracy" : "mse";
  row.mean_ensemble_variance = mean_variance(test_preds);
  row.wall_time_ms =
      std::chrono::duration<double, std::milli>(finished - started).count();
  return out;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double_field(const std::string& s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::NonNumericCell, std::string("bad ") + what + ": '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64_field(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::NonNumericCell, std::string("bad ") + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

std::string learner_name(Learner learner) {
  switch (learner) {
    case Learner::QMeansBagging: return "qmeans_bagging";
    case Learner::KMeansBagging: return "kmeans_bagging";
    case Learner::DtBagging: return "dt_bagging";
    case Learner::SingleQMeans: return "single_qmeans";
    case Learner::SingleKMeans: return "single_kmeans";
  }
  throw Error(ErrorCode::InvalidArgument, "unknown learner");
}

Learner learner_from_name(const std::string& name) {
  if (name == "qmeans_bagging") return Learner::QMeansBagging;
  if (name == "kmeans_bagging") return Learner::KMeansBagging;
  if (name == "dt_bagging") return Learner::DtBagging;
  if (name == "single_qmeans") return Learner::SingleQMeans;
  if (name == "single_kmeans") return Learner::SingleKMeans;
  throw Error(ErrorCode::InvalidArgument, "unknown learner '" + name + "'");
}

AuditStats& AuditStats::operator+=(const AuditStats& other) {
  cells += other.cells;
  euclidean_fits += other.euclidean_fits;
  monotonic_fits += other.monotonic_fits;
  return *this;
}

std::vector<ResultRow> run_experiment_on(const Dataset& data, const ExperimentConfig& config,
                                         AuditStats* audit) {
  validate(config, data);
  const std::size_t nb = config.b_values.size();
  const std::size_t nr = config.repeats;
  const std::size_t total = config.delta_values.size() * nb * nr;

  std::vector<ResultRow> rows(total);
  std::vector<AuditStats> audits(total);
  parallel_cells(total, [&](std::size_t idx) {
    const std::size_t di = idx / (nb * nr);
    const std::size_t bi = (idx / nr) % nb;
    const std::size_t rep = idx % nr;
    try {
      CellOutput out = run_cell(data, config, di, bi, rep);
      rows[idx] = std::move(out.row);
      audits[idx] = out.audit;
    } catch (const Error& e) {
      throw Error(e.code(), "cell (delta=" + fmt6(config.delta_values[di]) +
                                ", B=" + std::to_string(config.b_values[bi]) +
                                ", repeat=" + std::to_string(rep) + "): " + e.what());
    }
  });

  if (audit) {
    for (const AuditStats& a : audits) *audit += a;
  }
  sort_rows(rows);
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, AuditStats* audit) {
  std::string column = config.label_column;
  if (column == "auto") column = config.task == Task::Classification ? "label" : "target";
  const Dataset data = load_csv(config.dataset_path, column, config.task);
  return run_experiment_on(data, config, audit);
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.dataset != b.dataset) return a.dataset < b.dataset;
    if (a.learner != b.learner) return a.learner < b.learner;
    if (a.delta != b.delta) return a.delta < b.delta;
    if (a.b != b.b) return a.b < b.b;
    if (a.repeat_index != b.repeat_index) return a.repeat_index < b.repeat_index;
    return a.seed < b.seed;
  });
}

std::string rows_to_csv(const std::vector<ResultRow>& rows, bool include_wall_time) {
  std::string out = kCsvHeader;
  if (include_wall_time) out += ",wall_time_ms";
  out += "\n";
  for (const ResultRow& r : rows) {
    out += r.dataset;
    out += ',';
    out += r.learner;
    out += ',';
    out += std::to_string(r.b);
    out += ',';
    out += fmt6(r.delta);
    out += ',';
    out += std::to_string(r.repeat_index);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt6(r.train_metric);
    out += ',';
    out += fmt6(r.test_metric);
    out += ',';
    out += r.metric_kind;
    out += ',';
    out += fmt6(r.mean_ensemble_variance);
    if (include_wall_time) {
      out += ',';
      out += fmt6(r.wall_time_ms);
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path);
  out << rows_to_csv(rows, true);
  if (!out) throw Error(ErrorCode::MissingFile, "write failed for " + path);
}

std::vector<ResultRow> rows_from_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::EmptyDataset, "results text is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string bare = kCsvHeader;
  const std::string full = bare + ",wall_time_ms";
  bool has_wall_time = false;
  if (line == full) {
    has_wall_time = true;
  } else if (line != bare) {
    throw Error(ErrorCode::InvalidArgument, "unrecognized results header: " + line);
  }
  const std::size_t expected = has_wall_time ? 11 : 10;

  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != expected) {
      throw Error(ErrorCode::InvalidArgument,
                  "line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                      " fields, expected " + std::to_string(expected));
    }
    ResultRow r;
    r.dataset = f[0];
    r.learner = f[1];
    r.b = static_cast<std::size_t>(parse_u64_field(f[2], "B"));
    r.delta = parse_double_field(f[3], "delta");
    r.repeat_index = static_cast<std::size_t>(parse_u64_field(f[4], "repeat_index"));
    r.seed = parse_u64_field(f[5], "seed");
    r.train_metric = parse_double_field(f[6], "train_metric");
    r.test_metric = parse_double_field(f[7], "test_metric");
    r.metric_kind = f[8];
    r.mean_ensemble_variance = parse_double_field(f[9], "mean_ensemble_variance");
    if (has_wall_time) r.wall_time_ms = parse_double_field(f[10], "wall_time_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return rows_from_csv_text(buffer.str());
}

Table2Result run_table2(const Dataset& data, const ExperimentConfig& config) {
  static constexpr Learner kOrder[] = {Learner::DtBagging, Learner::KMeansBagging,
                                       Learner::QMeansBagging};
  Table2Result result;
  for (std::size_t li = 0; li < 3; ++li) {
    ExperimentConfig sub = config;
    sub.learner = kOrder[li];
    sub.distance = DistanceMode::euclidean();
    sub.master_seed = derive_seed(config.master_seed, {kStreamTable2, li});
    std::vector<ResultRow> rows = run_experiment_on(data, sub, &result.audit);
    result.rows.insert(result.rows.end(), std::make_move_iterator(rows.begin()),
                       std::make_move_iterator(rows.end()));
  }
  sort_rows(result.rows);

  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const ResultRow& r : result.rows) {
    groups[{r.learner, r.b}].push_back(r.test_metric);
  }
  for (const auto& [key, values] : groups) {
    const RepeatSummary s = summarize_repeats(values);
    Table2Cell cell;
    cell.dataset = data.name;
    cell.learner = key.first;
    cell.b = key.second;
    cell.mean_test_metric = s.mean;
    cell.std_test_metric = s.std_dev;
    cell.cell_count = s.n_repeats;
    result.summary.push_back(std::move(cell));
  }
  return result;
}

std::string table2_cells_csv(const Table2Result& result) {
  return rows_to_csv(result.rows, false);
}

std::string table2_summary_csv(const Table2Result& result) {
  std::string out = "dataset,learner,B,mean_test_metric,std_test_metric,cells\n";
  for (const Table2Cell& c : result.summary) {
    out += c.dataset;
    out += ',';
    out += c.learner;
    out += ',';
    out += std::to_string(c.b);
    out += ',';
    out += fmt6(c.mean_test_metric);
    out += ',';
    out += fmt6(c.std_test_metric);
    out += ',';
    out += std::to_string(c.cell_count);
    out += '\n';
  }
  return out;
}

std::string table2_text(const Table2Result& result) {
  if (result.summary.empty()) return "(no results)\n";
  std::vector<std::size_t> b_values;
  for (const Table2Cell& c : result.summary) {
    if (std::find(b_values.begin(), b_values.end(), c.b) == b_values.end()) {
      b_values.push_back(c.b);
    }
  }
  std::sort(b_values.begin(), b_values.end());

  const std::string metric =
      result.rows.empty() ? "metric" : result.rows.front().metric_kind;
  std::string out = result.summary.front().dataset + "  (mean test " + metric +
                    ", averaged over delta and repeats)\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-16s", "learner");
  out += buf;
  for (std::size_t b : b_values) {
    std::snprintf(buf, sizeof(buf), "  B=%-6zu", b);
    out += buf;
  }
  out += '\n';

  std::vector<std::string> learners;
  for (const Table2Cell& c : result.summary) {
    if (std::find(learners.begin(), learners.end(), c.learner) == learners.end()) {
      learners.push_back(c.learner);
    }
  }
  for (const std::string& learner : learners) {
    std::snprintf(buf, sizeof(buf), "%-16s", learner.c_str());
    out += buf;
    for (std::size_t b : b_values) {
      for (const Table2Cell& c : result.summary) {
        if (c.learner == learner && c.b == b) {
          std::snprintf(buf, sizeof(buf), "  %-8.4f", c.mean_test_metric);
          out += buf;
          break;
        }
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace qbag
