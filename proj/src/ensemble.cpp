#include "qbag/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qbag/quantum.hpp"

namespace qbag {

namespace {

using nlohmann::json;

constexpr std::uint64_t kStreamLearner = 0xE1;
constexpr int kModelVersion = 1;

void validate(const Dataset& train, const QbbConfig& config) {
  if (config.learner_count == 0) {
    throw Error(ErrorCode::InvalidArgument, "learner_count must be >= 1");
  }
  if (!(config.bootstrap_fraction > 0.0 && config.bootstrap_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap_fraction must be in (0, 1]");
  }
  const bool wants_class = config.task == Task::Classification;
  if (wants_class != train.labels.is_class()) {
    throw Error(ErrorCode::UnsupportedTask, "label type does not match the task");
  }
}

std::size_t bootstrap_size(const QbbConfig& config, std::size_t n) {
  const std::size_t m = static_cast<std::size_t>(
      std::ceil(config.bootstrap_fraction * static_cast<double>(n)));
  if (m < config.qmeans.k) {
    throw Error(ErrorCode::InvalidArgument,
                "bootstrap sample of " + std::to_string(m) + " cannot seed " +
                    std::to_string(config.qmeans.k) + " centers");
  }
  return m;
}

json mode_to_json(const DistanceMode& mode) {
  return json{{"name", mode_name(mode)}, {"shots", mode.shots}};
}

DistanceMode mode_from_json(const json& j) {
  return mode_from_name(j.at("name").get<std::string>(), j.at("shots").get<std::uint32_t>());
}

json labels_to_json(const LabelVector& labels) {
  json j;
  if (labels.is_class()) {
    j["kind"] = "class";
    j["num_classes"] = labels.num_classes();
    j["values"] = labels.class_codes();
  } else {
    j["kind"] = "numeric";
    j["values"] = labels.numeric_values();
  }
  return j;
}

LabelVector labels_from_json(const json& j) {
  if (j.at("kind").get<std::string>() == "class") {
    return LabelVector::classes(j.at("values").get<std::vector<int>>(),
                                j.at("num_classes").get<int>());
  }
  return LabelVector::numeric(j.at("values").get<std::vector<double>>());
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const json& rows = j.at("values");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      m.at(r, c) = rows.at(r).at(c).get<double>();
    }
  }
  return m;
}

json learner_to_json(const ClusterModel& learner) {
  json j;
  j["centroids"] = matrix_to_json(learner.centroids);
  j["mode"] = mode_to_json(learner.mode);
  j["iterations_run"] = learner.iterations_run;
  j["inertia"] = learner.inertia;
  j["inertia_history"] = learner.inertia_history;
  if (learner.cluster_outputs.has_value()) {
    j["outputs"] = labels_to_json(*learner.cluster_outputs);
  }
  return j;
}

ClusterModel learner_from_json(const json& j) {
  ClusterModel learner;
  learner.centroids = matrix_from_json(j.at("centroids"));
  learner.mode = mode_from_json(j.at("mode"));
  learner.iterations_run = j.at("iterations_run").get<std::size_t>();
  learner.inertia = j.at("inertia").get<double>();
  learner.inertia_history = j.at("inertia_history").get<std::vector<double>>();
  if (j.contains("outputs")) learner.cluster_outputs = labels_from_json(j.at("outputs"));
  return learner;
}

json config_to_json(const QbbConfig& config) {
  return json{
      {"learner_count", config.learner_count},
      {"bootstrap_fraction", config.bootstrap_fraction},
      {"task", config.task == Task::Classification ? "classification" : "regression"},
      {"seed", config.seed},
      {"qmeans",
       json{{"k", config.qmeans.k},
            {"delta", config.qmeans.delta},
            {"mode", mode_to_json(config.qmeans.mode)},
            {"max_iterations", config.qmeans.max_iterations},
            {"tolerance", config.qmeans.tolerance},
            {"seed", config.qmeans.seed}}},
  };
}

QbbConfig config_from_json(const json& j) {
  QbbConfig config;
  config.learner_count = j.at("learner_count").get<std::size_t>();
  config.bootstrap_fraction = j.at("bootstrap_fraction").get<double>();
  config.task = j.at("task").get<std::string>() == "classification" ? Task::Classification
                                                                    : Task::Regression;
  config.seed = j.at("seed").get<std::uint64_t>();
  const json& q = j.at("qmeans");
  config.qmeans.k = q.at("k").get<std::size_t>();
  config.qmeans.delta = q.at("delta").get<double>();
  config.qmeans.mode = mode_from_json(q.at("mode"));
  config.qmeans.max_iterations = q.at("max_iterations").get<std::size_t>();
  config.qmeans.tolerance = q.at("tolerance").get<double>();
  config.qmeans.seed = q.at("seed").get<std::uint64_t>();
  return config;
}

}  // namespace

std::uint64_t learner_stream_seed(const QbbConfig& config, std::size_t learner_index) {
  return derive_seed(config.seed, {kStreamLearner, learner_index});
}

QbbModel fit_qbb(const Dataset& train, const QbbConfig& config) {
  validate(train, config);
  const std::size_t n = train.size();
  const std::size_t m = bootstrap_size(config, n);

  QbbModel model;
  model.task = config.task;
  model.config = config;
  model.learners.reserve(config.learner_count);
  for (std::size_t i = 0; i < config.learner_count; ++i) {
    Rng rng(learner_stream_seed(config, i));
    const BootstrapSample sample = qram_bootstrap(n, m, rng);
    const Matrix sub_features = train.features.select_rows(sample.indices);
    const LabelVector sub_labels = train.labels.subset(sample.indices);
    QMeansFit fit = fit_qmeans(sub_features, config.qmeans, rng);
    label_clusters(fit.model, sub_labels, fit.assignment);
    model.learners.push_back(std::move(fit.model));
  }
  return model;
}

EnsemblePrediction predict_one(const QbbModel& model, std::span<const double> x, Rng* rng) {
  if (model.learners.empty()) {
    throw Error(ErrorCode::InvalidArgument, "model has no learners");
  }
  if (model.task == Task::Classification) {
    std::vector<int> votes;
    votes.reserve(model.learners.size());
    for (const ClusterModel& learner : model.learners) {
      votes.push_back(predict_class(learner, x, rng));
    }
    return aggregate_class_votes(std::move(votes));
  }
  std::vector<double> outputs;
  outputs.reserve(model.learners.size());
  for (const ClusterModel& learner : model.learners) {
    outputs.push_back(predict_value(learner, x, rng));
  }
  return aggregate_values(std::move(outputs));
}

std::vector<EnsemblePrediction> predict_batch(const QbbModel& model, const Matrix& x,
                                              Rng* rng) {
  std::vector<EnsemblePrediction> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out.push_back(predict_one(model, x.row_span(i), rng));
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> ensemble_variance_profile(
    const Dataset& train, const Dataset& test, const QbbConfig& base,
    std::span<const std::size_t> b_values, std::size_t repeats,
    std::uint64_t master_seed) {
  if (repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  std::vector<std::pair<std::size_t, double>> profile;
  profile.reserve(b_values.size());
  for (std::size_t bi = 0; bi < b_values.size(); ++bi) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < repeats; ++r) {
      QbbConfig config = base;
      config.learner_count = b_values[bi];
      config.seed = derive_seed(master_seed, {bi, r});
      const QbbModel model = fit_qbb(train, config);
      Rng pred_rng = make_rng(config.seed, {0xF2});
      for (const EnsemblePrediction& p : predict_batch(model, test.features, &pred_rng)) {
        total += p.variance;
        ++count;
      }
    }
    profile.emplace_back(b_values[bi], total / static_cast<double>(count));
  }
  return profile;
}

std::string qbb_to_text(const QbbModel& model) {
  json j;
  j["format"] = "qbag-ensemble";
  j["version"] = kModelVersion;
  j["task"] = model.task == Task::Classification ? "classification" : "regression";
  j["config"] = config_to_json(model.config);
  json learners = json::array();
  for (const ClusterModel& learner : model.learners) {
    learners.push_back(learner_to_json(learner));
  }
  j["learners"] = std::move(learners);
  return j.dump(2) + "\n";
}

QbbModel qbb_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModelFile, std::string("model parse failure: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "qbag-ensemble") {
      throw Error(ErrorCode::BadModelFile, "not a qbag-ensemble file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::BadModelFile,
                  "unsupported model version " + j.at("version").dump());
    }
    QbbModel model;
    model.task = j.at("task").get<std::string>() == "classification" ? Task::Classification
                                                                     : Task::Regression;
    model.config = config_from_json(j.at("config"));
    for (const json& learner : j.at("learners")) {
      model.learners.push_back(learner_from_json(learner));
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModelFile, std::string("model field failure: ") + e.what());
  }
}

void save_qbb(const QbbModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path);
  out << qbb_to_text(model);
}

QbbModel load_qbb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return qbb_from_text(buffer.str());
}

}  // namespace qbag
