#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbag/data.hpp"
#include "qbag/matrix.hpp"
#include "qbag/rng.hpp"

namespace qbag {

// How point-to-centroid distance is computed.  Euclidean compares squared
// L2 distances; the fidelity modes compare 1 - F where F is the swap-test
// fidelity of the amplitude-encoded vectors, either exact (statevector
// marginal) or estimated from a finite number of measurement shots.
struct DistanceMode {
  enum class Kind { Euclidean, FidelityExact, FidelityShots };

  Kind kind = Kind::Euclidean;
  std::uint32_t shots = 0;  // used only by FidelityShots

  static DistanceMode euclidean() { return {Kind::Euclidean, 0}; }
  static DistanceMode fidelity_exact() { return {Kind::FidelityExact, 0}; }
  static DistanceMode fidelity_shots(std::uint32_t shots) {
    return {Kind::FidelityShots, shots};
  }

  bool is_fidelity() const { return kind != Kind::Euclidean; }
  bool needs_rng() const { return kind == Kind::FidelityShots; }

  friend bool operator==(const DistanceMode&, const DistanceMode&) = default;
};

std::string mode_name(const DistanceMode& mode);
DistanceMode mode_from_name(const std::string& name, std::uint32_t shots);

struct QMeansConfig {
  std::size_t k = 10;
  double delta = 1.0;  // exponent of the seeding law; 1.0 is k-means++
  DistanceMode mode = DistanceMode::euclidean();
  std::size_t max_iterations = 100;
  double tolerance = 1e-4;  // Lloyd stops when max centroid L2 shift < tolerance
  std::uint64_t seed = 0;   // used by callers that build their own Rng
};

struct ClusterModel {
  Matrix centroids;
  // Per-cluster output (majority class code or mean target), set by
  // label_clusters.
  std::optional<LabelVector> cluster_outputs;
  DistanceMode mode;
  std::size_t iterations_run = 0;
  // Sum of squared Euclidean distances to assigned centroids, after each
  // assign/update pair and once more against the final assignment.
  // Non-increasing in Euclidean mode.
  double inertia = 0.0;
  std::vector<double> inertia_history;
};

struct QMeansFit {
  ClusterModel model;
  std::vector<int> assignment;  // against the final centroids
};

// The distance the configured mode feeds to assignment and seeding:
// squared Euclidean distance, or 1 - fidelity (already a squared-overlap
// quantity).  rng is consumed only in shot mode.
double mode_distance(std::span<const double> x, std::span<const double> c,
                     const DistanceMode& mode, Rng* rng = nullptr);

// Seeding law: P(i) proportional to d2[i]^delta where d2 holds each
// candidate's mode-distance to its nearest already-chosen center.
// Requires at least one positive entry.
std::vector<double> delta_kpp_weights(std::span<const double> d2, double delta);
std::size_t delta_kpp_next(std::span<const double> d2, double delta, Rng& rng);

// First center uniform; each next drawn by delta_kpp_next.  When every
// remaining candidate has zero distance the draw falls back to uniform
// over the not-yet-chosen rows.
Matrix delta_kpp_init(const Matrix& x, std::size_t k, double delta,
                      const DistanceMode& mode, Rng& rng);

// Nearest centroid per row under the mode's distance; ties take the
// lowest centroid index.
std::vector<int> assign_clusters(const Matrix& x, const Matrix& centroids,
                                 const DistanceMode& mode, Rng* rng = nullptr);

// Arithmetic mean of each cluster's members.  An empty cluster is
// relocated to the not-yet-taken row farthest (squared Euclidean) from
// its assigned centroid, lowest row index on ties.
Matrix update_centroids(const Matrix& x, std::span<const int> assignment, std::size_t k);

double euclidean_inertia(const Matrix& x, std::span<const int> assignment,
                         const Matrix& centroids);

// Lloyd iterations from a delta-k++ seed until the max centroid shift
// drops below tolerance or max_iterations is reached.  config.seed is
// ignored here; the caller owns the stream.
QMeansFit fit_qmeans(const Matrix& x, const QMeansConfig& config, Rng& rng);

// Majority vote (ties to the smallest class code) or mean target of each
// cluster's members; empty clusters get the global majority/mean.
void label_clusters(ClusterModel& model, const LabelVector& labels,
                    std::span<const int> assignment);

std::size_t nearest_cluster(const ClusterModel& model, std::span<const double> x,
                            Rng* rng = nullptr);
int predict_class(const ClusterModel& model, std::span<const double> x, Rng* rng = nullptr);
double predict_value(const ClusterModel& model, std::span<const double> x,
                     Rng* rng = nullptr);

}  // namespace qbag
