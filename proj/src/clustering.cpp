#include "qbag/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qbag/kernels.hpp"
#include "qbag/quantum.hpp"

namespace qbag {

std::string mode_name(const DistanceMode& mode) {
  switch (mode.kind) {
    case DistanceMode::Kind::Euclidean:
      return "euclidean";
    case DistanceMode::Kind::FidelityExact:
      return "fidelity-exact";
    case DistanceMode::Kind::FidelityShots:
      return "fidelity-shots";
  }
  return "euclidean";
}

DistanceMode mode_from_name(const std::string& name, std::uint32_t shots) {
  if (name == "euclidean") return DistanceMode::euclidean();
  if (name == "fidelity-exact") return DistanceMode::fidelity_exact();
  if (name == "fidelity-shots") {
    if (shots == 0) throw Error(ErrorCode::InvalidArgument, "fidelity-shots needs shots >= 1");
    return DistanceMode::fidelity_shots(shots);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown distance mode '" + name + "'");
}

double mode_distance(std::span<const double> x, std::span<const double> c,
                     const DistanceMode& mode, Rng* rng) {
  switch (mode.kind) {
    case DistanceMode::Kind::Euclidean:
      return kernels::squared_l2(x.data(), c.data(), x.size());
    case DistanceMode::Kind::FidelityExact:
      return fidelity_distance(x, c, FidelityMode::Exact);
    case DistanceMode::Kind::FidelityShots:
      if (rng == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "shot-mode distance needs an rng");
      }
      return fidelity_distance(x, c, FidelityMode::Sampled, mode.shots, rng);
  }
  return 0.0;
}

std::vector<double> delta_kpp_weights(std::span<const double> d2, double delta) {
  if (delta <= 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
  std::vector<double> w(d2.size());
  for (std::size_t i = 0; i < d2.size(); ++i) {
    w[i] = d2[i] > 0.0 ? std::pow(d2[i], delta) : 0.0;
  }
  return w;
}

std::size_t delta_kpp_next(std::span<const double> d2, double delta, Rng& rng) {
  const std::vector<double> w = delta_kpp_weights(d2, delta);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "all candidate distances are zero");
  }
  const double r = uniform_double(rng) * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    cum += w[i];
    last_positive = i;
    if (r < cum) return i;
  }
  return last_positive;  // guards against floating-point undershoot of cum
}

Matrix delta_kpp_init(const Matrix& x, std::size_t k, double delta,
                      const DistanceMode& mode, Rng& rng) {
  const std::size_t n = x.rows();
  if (k == 0 || k > n) {
    throw Error(ErrorCode::InvalidArgument,
                "k must be in [1, n]; got k=" + std::to_string(k) + " with n=" +
                    std::to_string(n));
  }
  if (delta <= 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");

  Matrix centroids(k, x.cols());
  std::vector<char> chosen(n, 0);

  auto take = [&](std::size_t center_idx, std::size_t row) {
    const double* src = x.row(row);
    double* dst = centroids.row(center_idx);
    for (std::size_t c = 0; c < x.cols(); ++c) dst[c] = src[c];
    chosen[row] = 1;
  };

  const std::size_t first = uniform_below(rng, n);
  take(0, first);

  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < k; ++j) {
    const std::span<const double> last_center = centroids.row_span(j - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = mode_distance(x.row_span(i), last_center, mode, &rng);
      if (d < min_d2[i]) min_d2[i] = d;
    }
    const double max_d = *std::max_element(min_d2.begin(), min_d2.end());
    std::size_t next_row;
    if (max_d > 0.0) {
      next_row = delta_kpp_next(min_d2, delta, rng);
    } else {
      // Every candidate coincides with a chosen center; fall back to a
      // uniform draw over the rows not yet picked.
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) open.push_back(i);
      }
      if (open.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no unchosen rows left for seeding");
      }
      next_row = open[uniform_below(rng, open.size())];
    }
    take(j, next_row);
  }
  return centroids;
}

namespace {

std::vector<QuantumState> encode_rows(const Matrix& m) {
  std::vector<QuantumState> states;
  states.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    states.push_back(amplitude_encode(m.row_span(i)));
  }
  return states;
}

}  // namespace

std::vector<int> assign_clusters(const Matrix& x, const Matrix& centroids,
                                 const DistanceMode& mode, Rng* rng) {
  if (x.cols() != centroids.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "points and centroids differ in dimension");
  }
  const std::size_t n = x.rows();
  const std::size_t k = centroids.rows();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "no centroids");
  std::vector<int> assignment(n, 0);

  if (mode.kind == DistanceMode::Kind::Euclidean) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = x.row(i);
      double best = std::numeric_limits<double>::infinity();
      int best_j = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double d = kernels::squared_l2(row, centroids.row(j), x.cols());
        if (d < best) {
          best = d;
          best_j = static_cast<int>(j);
        }
      }
      assignment[i] = best_j;
    }
    return assignment;
  }

  if (mode.needs_rng() && rng == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "shot-mode assignment needs an rng");
  }
  const std::vector<QuantumState> centroid_states = encode_rows(centroids);
  for (std::size_t i = 0; i < n; ++i) {
    const QuantumState point = amplitude_encode(x.row_span(i));
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double f = mode.kind == DistanceMode::Kind::FidelityExact
                           ? swap_test_exact(point, centroid_states[j]).value
                           : swap_test_sampled(point, centroid_states[j], mode.shots, *rng).value;
      const double d = 1.0 - f;
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    assignment[i] = best_j;
  }
  return assignment;
}

Matrix update_centroids(const Matrix& x, std::span<const int> assignment, std::size_t k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (assignment.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "assignment size does not match rows");
  }
  Matrix centroids(k, d);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = assignment[i];
    kernels::add_inplace(centroids.row(j), x.row(i), d);
    ++counts[j];
  }
  std::vector<std::size_t> empties;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) {
      kernels::scale_inplace(centroids.row(j), 1.0 / static_cast<double>(counts[j]), d);
    } else {
      empties.push_back(j);
    }
  }
  if (empties.empty()) return centroids;

  // Relocate each empty centroid to the farthest row from its assigned
  // (freshly updated) centroid; successive empties take successive rows.
  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = kernels::squared_l2(x.row(i), centroids.row(assignment[i]), d);
    by_distance.emplace_back(dist, i);
  }
  std::sort(by_distance.begin(), by_distance.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::size_t next = 0;
  for (std::size_t j : empties) {
    const std::size_t row = by_distance[next % n].second;
    ++next;
    const double* src = x.row(row);
    double* dst = centroids.row(j);
    for (std::size_t c = 0; c < d; ++c) dst[c] = src[c];
  }
  return centroids;
}

double euclidean_inertia(const Matrix& x, std::span<const int> assignment,
                         const Matrix& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    total += kernels::squared_l2(x.row(i), centroids.row(assignment[i]), x.cols());
  }
  return total;
}

QMeansFit fit_qmeans(const Matrix& x, const QMeansConfig& config, Rng& rng) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit on an empty matrix");
  if (config.max_iterations == 0) {
    throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  }
  if (!(config.tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be >= 0");
  }
  Rng* rng_ptr = config.mode.needs_rng() ? &rng : nullptr;

  QMeansFit fit;
  fit.model.mode = config.mode;
  fit.model.centroids = delta_kpp_init(x, config.k, config.delta, config.mode, rng);

  for (std::size_t t = 1; t <= config.max_iterations; ++t) {
    const std::vector<int> assignment =
        assign_clusters(x, fit.model.centroids, config.mode, rng_ptr);
    Matrix updated = update_centroids(x, assignment, config.k);
    double max_shift_sq = 0.0;
    for (std::size_t j = 0; j < config.k; ++j) {
      max_shift_sq = std::max(
          max_shift_sq,
          kernels::squared_l2(updated.row(j), fit.model.centroids.row(j), x.cols()));
    }
    fit.model.centroids = std::move(updated);
    fit.model.iterations_run = t;
    fit.model.inertia_history.push_back(
        euclidean_inertia(x, assignment, fit.model.centroids));
    if (std::sqrt(max_shift_sq) < config.tolerance) break;
  }

  fit.assignment = assign_clusters(x, fit.model.centroids, config.mode, rng_ptr);
  fit.model.inertia = euclidean_inertia(x, fit.assignment, fit.model.centroids);
  fit.model.inertia_history.push_back(fit.model.inertia);
  return fit;
}

void label_clusters(ClusterModel& model, const LabelVector& labels,
                    std::span<const int> assignment) {
  const std::size_t k = model.centroids.rows();
  if (labels.size() != assignment.size()) {
    throw Error(ErrorCode::InvalidArgument, "labels and assignment differ in size");
  }
  if (labels.is_class()) {
    const auto& codes = labels.class_codes();
    const int c = labels.num_classes();
    std::vector<std::vector<std::size_t>> votes(k, std::vector<std::size_t>(c, 0));
    std::vector<std::size_t> global(c, 0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      ++votes[assignment[i]][codes[i]];
      ++global[codes[i]];
    }
    auto majority = [c](const std::vector<std::size_t>& count) {
      int best = 0;
      for (int cls = 1; cls < c; ++cls) {
        if (count[cls] > count[best]) best = cls;  // ties keep the smaller code
      }
      return best;
    };
    std::vector<int> outputs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const bool empty = std::accumulate(votes[j].begin(), votes[j].end(),
                                         std::size_t(0)) == 0;
      outputs[j] = majority(empty ? global : votes[j]);
    }
    model.cluster_outputs = LabelVector::classes(std::move(outputs), c);
    return;
  }

  const auto& targets = labels.numeric_values();
  std::vector<double> sums(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  double global_sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    sums[assignment[i]] += targets[i];
    ++counts[assignment[i]];
    global_sum += targets[i];
  }
  const double global_mean = global_sum / static_cast<double>(targets.size());
  std::vector<double> outputs(k);
  for (std::size_t j = 0; j < k; ++j) {
    outputs[j] = counts[j] > 0 ? sums[j] / static_cast<double>(counts[j]) : global_mean;
  }
  model.cluster_outputs = LabelVector::numeric(std::move(outputs));
}

std::size_t nearest_cluster(const ClusterModel& model, std::span<const double> x,
                            Rng* rng) {
  if (x.size() != model.centroids.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension does not match centroids");
  }
  if (model.mode.needs_rng() && rng == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "shot-mode prediction needs an rng");
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < model.centroids.rows(); ++j) {
    const double d = mode_distance(x, model.centroids.row_span(j), model.mode, rng);
    if (d < best) {
      best = d;
      best_j = j;
    }
  }
  return best_j;
}

int predict_class(const ClusterModel& model, std::span<const double> x, Rng* rng) {
  if (!model.cluster_outputs.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "model has no cluster outputs yet");
  }
  return model.cluster_outputs->class_codes()[nearest_cluster(model, x, rng)];
}

double predict_value(const ClusterModel& model, std::span<const double> x, Rng* rng) {
  if (!model.cluster_outputs.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "model has no cluster outputs yet");
  }
  return model.cluster_outputs->numeric_values()[nearest_cluster(model, x, rng)];
}

}  // namespace qbag
