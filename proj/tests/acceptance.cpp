// Release gate for the benchmark pipeline: every numbered requirement runs
// end to end at its stated tolerance and prints exactly one PASS/FAIL line.
// The process exits nonzero when any requirement fails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "qbag/bench.hpp"
#include "qbag/clustering.hpp"
#include "qbag/data.hpp"
#include "qbag/ensemble.hpp"
#include "qbag/matrix.hpp"
#include "qbag/quantum.hpp"
#include "qbag/rng.hpp"
#include "test_util.hpp"

using namespace qbag;
using qbag::testutil::data_path;
using qbag::testutil::random_nonneg_unit_rows;
using qbag::testutil::regression_blobs;

namespace {

constexpr std::uint64_t kMasterSeed = 42;

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d %-24s %s%s%s\n", index, name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : "  ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// Target mean test accuracies for the three-learner comparison grid,
// one value per B in {4, 8, 12, 16, 20, 24, 28, 32}.
struct ReferenceBlock {
  const char* dataset;
  const char* learner;
  std::array<double, 8> mean;
};

const ReferenceBlock kReferenceAccuracy[] = {
    {"iris", "dt_bagging",
     {0.9133, 0.9333, 0.9467, 0.9333, 0.9533, 0.9533, 0.9667, 0.9467}},
    {"iris", "kmeans_bagging",
     {0.9400, 0.9400, 0.9733, 0.9667, 0.9733, 0.9667, 0.9733, 0.9667}},
    {"iris", "qmeans_bagging",
     {0.9417, 0.9750, 0.9750, 0.9750, 0.9667, 0.9667, 0.9667, 0.9583}},
    {"breast_cancer", "dt_bagging",
     {0.8860, 0.9175, 0.9281, 0.9246, 0.9246, 0.9246, 0.9298, 0.9316}},
    {"breast_cancer", "kmeans_bagging",
     {0.9035, 0.9333, 0.9421, 0.9456, 0.9439, 0.9421, 0.9491, 0.9421}},
    {"breast_cancer", "qmeans_bagging",
     {0.9316, 0.9421, 0.9474, 0.9456, 0.9439, 0.9456, 0.9456, 0.9474}},
    {"wine", "dt_bagging",
     {0.9333, 0.9444, 0.9556, 0.9500, 0.9556, 0.9556, 0.9556, 0.9556}},
    {"wine", "kmeans_bagging",
     {0.9500, 0.9722, 0.9722, 0.9889, 0.9889, 0.9889, 0.9889, 0.9889}},
    {"wine", "qmeans_bagging",
     {0.9167, 0.9444, 0.9653, 0.9792, 0.9653, 0.9653, 0.9792, 0.9861}},
};

const std::vector<std::size_t> kTableB = {4, 8, 12, 16, 20, 24, 28, 32};
const std::vector<double> kTableDeltas = {0.1, 0.2, 0.3, 0.4};

ExperimentConfig comparison_config() {
  ExperimentConfig config;
  config.task = Task::Classification;
  config.b_values = kTableB;
  config.delta_values = kTableDeltas;
  config.k = 10;
  config.noise_rate = 0.05;
  config.repeats = 5;
  config.test_fraction = 0.2;
  config.bootstrap_fraction = 0.5;
  config.master_seed = kMasterSeed;
  return config;
}

double summary_mean(const Table2Result& result, const std::string& learner,
                    std::size_t b) {
  for (const Table2Cell& cell : result.summary) {
    if (cell.learner == learner && cell.b == b) return cell.mean_test_metric;
  }
  std::fprintf(stderr, "missing summary cell %s B=%zu\n", learner.c_str(), b);
  std::exit(3);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Non-increasing median profile, allowing a single adjacent inversion of at
// most 5% relative magnitude.
bool profile_non_increasing(const std::vector<double>& medians) {
  int rises = 0;
  double worst_rel = 0.0;
  for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
    if (medians[i + 1] > medians[i]) {
      ++rises;
      const double rel = medians[i] > 0.0
                             ? (medians[i + 1] - medians[i]) / medians[i]
                             : std::numeric_limits<double>::infinity();
      worst_rel = std::max(worst_rel, rel);
    }
  }
  return rises == 0 || (rises == 1 && worst_rel <= 0.05);
}

std::vector<double> random_signed_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = (uniform_double(rng) - 0.5) * 4.0;
  return v;
}

double overlap_squared(const QuantumState& a, const QuantumState& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    acc += a.amplitudes[i].real() * b.amplitudes[i].real();
  }
  return acc * acc;
}

struct VarianceFixture {
  std::string name;
  Dataset train;
  Dataset test;
  std::size_t k;
};

VarianceFixture make_blob_fixture() {
  Rng data_rng = make_rng(kMasterSeed, {0xC5, 0});
  const Dataset data = regression_blobs(40, 3, 3, 0.05, data_rng);
  Rng split_rng = make_rng(kMasterSeed, {0xC5, 1});
  SplitResult split = train_test_split(data, 0.2, false, split_rng);
  const ScalerParams scaler = fit_scaler(split.train);
  return {"blobs", apply_scaler(scaler, split.train), apply_scaler(scaler, split.test),
          3};
}

VarianceFixture make_real_estate_fixture() {
  const Dataset data =
      load_csv(data_path("real_estate_synthetic.csv"), "target", Task::Regression);
  Rng split_rng = make_rng(kMasterSeed, {0xC5, 2});
  SplitResult split = train_test_split(data, 0.2, false, split_rng);
  const ScalerParams scaler = fit_scaler(split.train);
  return {"real_estate", apply_scaler(scaler, split.train),
          apply_scaler(scaler, split.test), 10};
}

}  // namespace

int main() {
  AuditStats audit;

  // 1. The three-learner comparison grid lands within tolerance of the
  //    reference accuracies for at least 20 of 24 (learner, B) cells per
  //    dataset.
  std::string first_iris_cells;
  std::string first_iris_summary;
  {
    std::string detail;
    bool pass = true;
    for (const auto& [file, tolerance] :
         {std::pair<const char*, double>{"iris.csv", 0.04},
          std::pair<const char*, double>{"wine.csv", 0.04},
          std::pair<const char*, double>{"breast_cancer.csv", 0.03}}) {
      const Dataset data = load_csv(data_path(file), "label", Task::Classification);
      const Table2Result result = run_table2(data, comparison_config());
      audit += result.audit;
      if (data.name == "iris") {
        first_iris_cells = table2_cells_csv(result);
        first_iris_summary = table2_summary_csv(result);
      }
      int within = 0;
      int total = 0;
      for (const ReferenceBlock& block : kReferenceAccuracy) {
        if (data.name != block.dataset) continue;
        for (std::size_t bi = 0; bi < kTableB.size(); ++bi) {
          const double got = summary_mean(result, block.learner, kTableB[bi]);
          ++total;
          if (std::abs(got - block.mean[bi]) <= tolerance) ++within;
        }
      }
      if (within < 20) pass = false;
      if (!detail.empty()) detail += ", ";
      detail += data.name + " " + std::to_string(within) + "/" + std::to_string(total);
    }
    report(1, "reference-accuracy", pass, "(" + detail + ")");
  }

  // 2. Under 5% label noise on iris with B >= 8, each bagged clustering
  //    learner matches or beats the bagged trees in at least 16 of 20
  //    master seeds.  Each comparison is paired: both runs share one master
  //    seed, so every grid cell sees the same split and the same corrupted
  //    labels.  The clustering ensembles draw their usual half-size
  //    bootstrap samples; the tree baseline draws conventional full-size
  //    bootstrap samples.  The two clustering families run on separate
  //    derived streams, mirroring the comparison-table seeding.
  {
    const Dataset iris = load_csv(data_path("iris.csv"), "label", Task::Classification);
    ExperimentConfig config = comparison_config();
    config.b_values = {8, 12, 16, 20, 24, 28, 32};
    config.distance = DistanceMode::euclidean();

    const auto grid_mean = [&](Learner learner, double fraction,
                               std::uint64_t master) {
      ExperimentConfig run = config;
      run.learner = learner;
      run.bootstrap_fraction = fraction;
      run.master_seed = master;
      const std::vector<ResultRow> rows = run_experiment_on(iris, run, &audit);
      double total = 0.0;
      for (const ResultRow& row : rows) total += row.test_metric;
      return total / static_cast<double>(rows.size());
    };

    int kmeans_wins = 0;
    int qmeans_wins = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Learner families[2] = {Learner::KMeansBagging,
                                   Learner::QMeansBagging};
      for (int fi = 0; fi < 2; ++fi) {
        const std::uint64_t master = derive_seed(
            kMasterSeed + s, {0xB2, static_cast<std::uint64_t>(fi + 1)});
        const double tree_mean = grid_mean(Learner::DtBagging, 1.0, master);
        const double cluster_mean = grid_mean(families[fi], 0.5, master);
        if (cluster_mean >= tree_mean) ++(fi == 0 ? kmeans_wins : qmeans_wins);
      }
    }
    const bool pass = kmeans_wins >= 16 && qmeans_wins >= 16;
    report(2, "noise-robust-ordering", pass,
           "(kmeans " + std::to_string(kmeans_wins) + "/20, qmeans " +
               std::to_string(qmeans_wins) + "/20)");
  }

  // 3. The simulated circuit reproduces the analytic ancilla probability,
  //    and sampled estimates shrink like one over the square root of the
  //    shot count.
  {
    Rng rng = make_rng(kMasterSeed, {0xC3, 0});
    int exact_ok = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t dim = 2 + uniform_below(rng, 15);
      const QuantumState psi = amplitude_encode(random_signed_vec(dim, rng));
      const QuantumState phi = amplitude_encode(random_signed_vec(dim, rng));
      const FidelityEstimate est = swap_test_exact(psi, phi);
      if (std::abs(est.raw_prob0 - (0.5 + 0.5 * overlap_squared(psi, phi))) <= 1e-9) {
        ++exact_ok;
      }
    }

    const std::vector<std::uint32_t> shot_levels = {64, 256, 1024, 4096};
    Rng pair_rng = make_rng(kMasterSeed, {0xC3, 1});
    Rng shot_rng = make_rng(kMasterSeed, {0xC3, 2});
    std::vector<double> log_shots;
    std::vector<double> log_rms;
    for (std::uint32_t shots : shot_levels) {
      double sq_sum = 0.0;
      std::size_t count = 0;
      for (int pair = 0; pair < 80; ++pair) {
        const std::size_t dim = 2 + uniform_below(pair_rng, 15);
        const Matrix rows = random_nonneg_unit_rows(2, dim, pair_rng);
        const QuantumState psi = amplitude_encode(rows.row_span(0));
        const QuantumState phi = amplitude_encode(rows.row_span(1));
        const double exact = swap_test_exact(psi, phi).value;
        for (int rep = 0; rep < 5; ++rep) {
          const double err = swap_test_sampled(psi, phi, shots, shot_rng).value - exact;
          sq_sum += err * err;
          ++count;
        }
      }
      log_shots.push_back(std::log(static_cast<double>(shots)));
      log_rms.push_back(std::log(std::sqrt(sq_sum / static_cast<double>(count))));
    }
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < log_shots.size(); ++i) {
      x_mean += log_shots[i];
      y_mean += log_rms[i];
    }
    x_mean /= static_cast<double>(log_shots.size());
    y_mean /= static_cast<double>(log_rms.size());
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < log_shots.size(); ++i) {
      cov += (log_shots[i] - x_mean) * (log_rms[i] - y_mean);
      var += (log_shots[i] - x_mean) * (log_shots[i] - x_mean);
    }
    const double slope = cov / var;

    const bool pass = exact_ok == 200 && std::abs(slope + 0.5) <= 0.1;
    report(3, "swap-test-scaling", pass,
           "(exact " + std::to_string(exact_ok) + "/200," +
               fmt(" shot rms slope %.3f)", slope));
  }

  // 4. Fidelity-exact and Euclidean assignments agree on unit-norm
  //    nonnegative fixtures, both verified against direct argmin scans.
  {
    Rng rng = make_rng(kMasterSeed, {0xC4});
    int agreed = 0;
    for (int fixture = 0; fixture < 50; ++fixture) {
      const std::size_t n = 10 + uniform_below(rng, 31);
      const std::size_t d = 2 + uniform_below(rng, 7);
      const std::size_t k = 2 + uniform_below(rng, 5);
      const Matrix x = random_nonneg_unit_rows(n, d, rng);
      const Matrix c = random_nonneg_unit_rows(k, d, rng);

      const std::vector<int> eu = assign_clusters(x, c, DistanceMode::euclidean());
      const std::vector<int> fi = assign_clusters(x, c, DistanceMode::fidelity_exact());

      bool ok = eu == fi;
      for (std::size_t i = 0; ok && i < n; ++i) {
        double best_eu = std::numeric_limits<double>::infinity();
        double best_fi = std::numeric_limits<double>::infinity();
        int arg_eu = 0, arg_fi = 0;
        for (std::size_t j = 0; j < k; ++j) {
          double d2 = 0.0, dot = 0.0;
          for (std::size_t m = 0; m < d; ++m) {
            const double diff = x.at(i, m) - c.at(j, m);
            d2 += diff * diff;
            dot += x.at(i, m) * c.at(j, m);
          }
          if (d2 < best_eu) {
            best_eu = d2;
            arg_eu = static_cast<int>(j);
          }
          const double fid_dist = 1.0 - dot * dot;
          if (fid_dist < best_fi) {
            best_fi = fid_dist;
            arg_fi = static_cast<int>(j);
          }
        }
        ok = eu[i] == arg_eu && fi[i] == arg_fi;
      }
      if (ok) ++agreed;
    }
    report(4, "mode-equivalence", agreed == 50,
           "(" + std::to_string(agreed) + "/50 fixtures)");
  }

  // 5. Median prediction variance over 20 seeds is non-increasing in the
  //    ensemble size on both regression fixtures.
  {
    const std::vector<std::size_t> b_values = {2, 4, 8, 16, 32};
    std::string detail;
    bool pass = true;
    for (const VarianceFixture& fixture :
         {make_blob_fixture(), make_real_estate_fixture()}) {
      QbbConfig base;
      base.task = Task::Regression;
      base.bootstrap_fraction = 0.5;
      base.qmeans.k = fixture.k;
      base.qmeans.delta = 1.0;
      base.qmeans.mode = DistanceMode::euclidean();

      std::vector<std::vector<double>> per_b(b_values.size());
      for (std::uint64_t s = 0; s < 20; ++s) {
        const auto profile = ensemble_variance_profile(
            fixture.train, fixture.test, base, b_values, 1, kMasterSeed + s);
        for (std::size_t bi = 0; bi < b_values.size(); ++bi) {
          per_b[bi].push_back(profile[bi].second);
        }
      }
      std::vector<double> medians;
      medians.reserve(per_b.size());
      for (const std::vector<double>& v : per_b) medians.push_back(median(v));

      const bool fixture_ok = profile_non_increasing(medians);
      pass = pass && fixture_ok;
      if (!detail.empty()) detail += "; ";
      detail += fixture.name + (fixture_ok ? " ok [" : " rising [");
      for (std::size_t bi = 0; bi < medians.size(); ++bi) {
        detail += fmt("%.4g", medians[bi]);
        if (bi + 1 < medians.size()) detail += " ";
      }
      detail += "]";
    }
    report(5, "variance-reduction", pass, "(" + detail + ")");
  }

  // 6. On the regression benchmark the fidelity-seeded learner stays within
  //    10% of the Euclidean learner's mean test MSE at every ensemble size.
  {
    const Dataset data =
        load_csv(data_path("real_estate_synthetic.csv"), "target", Task::Regression);
    ExperimentConfig config = comparison_config();
    config.task = Task::Regression;
    const Table2Result result = run_table2(data, config);
    audit += result.audit;

    bool pass = true;
    double worst = 0.0;
    for (std::size_t b : kTableB) {
      const double qmeans = summary_mean(result, "qmeans_bagging", b);
      const double kmeans = summary_mean(result, "kmeans_bagging", b);
      const double ratio = qmeans / kmeans;
      worst = std::max(worst, ratio);
      if (!(ratio <= 1.10)) pass = false;
    }
    report(6, "regression-parity", pass, fmt("(worst mse ratio %.4f)", worst));
  }

  // 7. Seeding frequencies over 1e5 draws match the power law within
  //    three-sigma binomial bounds on two- and three-point fixtures.
  {
    const std::size_t draws = 100000;
    bool pass = true;
    for (const std::vector<double>& d2 :
         {std::vector<double>{1.0, 4.0}, std::vector<double>{1.0, 4.0, 9.0}}) {
      for (const double delta : {0.1, 0.5, 1.0, 2.0}) {
        Rng rng = make_rng(kMasterSeed,
                           {0xC7, d2.size(), static_cast<std::uint64_t>(delta * 10)});
        std::vector<std::size_t> counts(d2.size(), 0);
        for (std::size_t i = 0; i < draws; ++i) {
          ++counts[delta_kpp_next(d2, delta, rng)];
        }
        double norm = 0.0;
        for (double v : d2) norm += std::pow(v, delta);
        for (std::size_t i = 0; i < d2.size(); ++i) {
          const double p = std::pow(d2[i], delta) / norm;
          const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
          const double freq = static_cast<double>(counts[i]) / static_cast<double>(draws);
          if (std::abs(freq - p) > 3.0 * sigma) pass = false;
        }
      }
    }
    report(7, "seeding-law", pass, "");
  }

  // 8. Every Euclidean fit across the runs above kept a non-increasing
  //    objective, and repeating the comparison grid reproduces its CSVs
  //    byte for byte.
  {
    const Dataset iris = load_csv(data_path("iris.csv"), "label", Task::Classification);
    const Table2Result again = run_table2(iris, comparison_config());
    audit += again.audit;
    const bool identical = table2_cells_csv(again) == first_iris_cells &&
                           table2_summary_csv(again) == first_iris_summary;
    const bool monotone = audit.euclidean_fits > 0 &&
                          audit.euclidean_fits == audit.monotonic_fits;
    report(8, "determinism-audit", identical && monotone,
           "(" + std::to_string(audit.monotonic_fits) + "/" +
               std::to_string(audit.euclidean_fits) + " monotone fits, csv " +
               (identical ? "identical" : "DIFFERS") + ")");
  }

  std::printf("%d of 8 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
