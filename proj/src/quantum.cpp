#include "qbag/quantum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qbag/kernels.hpp"

namespace qbag {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Ancilla Pr(0) of the swap-test circuit, by explicit statevector
// evolution.  Qubit layout: ancilla is the highest bit, followed by the
// two n-qubit registers, so basis index = anc * m^2 + a * m + b with
// m = 2^n.
double swap_test_prob0(const QuantumState& psi, const QuantumState& phi) {
  if (psi.amplitudes.size() != phi.amplitudes.size()) {
    throw Error(ErrorCode::RegisterMismatch,
                "swap test needs equally sized registers (" +
                    std::to_string(psi.amplitudes.size()) + " vs " +
                    std::to_string(phi.amplitudes.size()) + " amplitudes)");
  }
  const std::size_t m = psi.amplitudes.size();
  const std::size_t block = m * m;
  std::vector<std::complex<double>> state(2 * block);

  // |0>_anc (x) |psi> (x) |phi>
  for (std::size_t a = 0; a < m; ++a) {
    const std::complex<double> pa = psi.amplitudes[a];
    for (std::size_t b = 0; b < m; ++b) {
      state[a * m + b] = pa * phi.amplitudes[b];
    }
  }

  // Hadamard on the ancilla.
  for (std::size_t i = 0; i < block; ++i) {
    const std::complex<double> lo = state[i];
    const std::complex<double> hi = state[i + block];
    state[i] = (lo + hi) * kInvSqrt2;
    state[i + block] = (lo - hi) * kInvSqrt2;
  }

  // Controlled swap of the two registers on the ancilla=1 half.
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      std::swap(state[block + a * m + b], state[block + b * m + a]);
    }
  }

  // Second Hadamard on the ancilla.
  for (std::size_t i = 0; i < block; ++i) {
    const std::complex<double> lo = state[i];
    const std::complex<double> hi = state[i + block];
    state[i] = (lo + hi) * kInvSqrt2;
    state[i + block] = (lo - hi) * kInvSqrt2;
  }

  // Pr(ancilla = 0): probability mass of the first half.  complex<double>
  // arrays are guaranteed to be addressable as interleaved doubles.
  return kernels::sum_squares(reinterpret_cast<const double*>(state.data()), 2 * block);
}

}  // namespace

std::size_t QuantumState::num_qubits() const {
  std::size_t n = 0;
  while ((std::size_t(1) << n) < amplitudes.size()) ++n;
  return n;
}

QuantumState QuantumState::from_amplitudes(std::vector<std::complex<double>> amplitudes,
                                           std::size_t source_dim) {
  if (amplitudes.empty() || !std::has_single_bit(amplitudes.size())) {
    throw Error(ErrorCode::InvalidArgument, "amplitude count must be a power of two");
  }
  if (source_dim == 0 || source_dim > amplitudes.size()) {
    throw Error(ErrorCode::InvalidArgument, "source_dim out of range");
  }
  double norm_sq = 0.0;
  for (const auto& a : amplitudes) norm_sq += std::norm(a);
  if (std::abs(norm_sq - 1.0) > 2e-9) {
    throw Error(ErrorCode::InvalidArgument, "amplitudes are not unit norm");
  }
  for (std::size_t i = source_dim; i < amplitudes.size(); ++i) {
    if (amplitudes[i] != std::complex<double>(0.0, 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "padding amplitudes must be zero");
    }
  }
  QuantumState st;
  st.amplitudes = std::move(amplitudes);
  st.source_dim = source_dim;
  return st;
}

QuantumState amplitude_encode(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "cannot encode an empty vector");
  const double norm = std::sqrt(kernels::sum_squares(x.data(), x.size()));
  if (norm <= 1e-12) {
    throw Error(ErrorCode::ZeroNormEncoding,
                "cannot amplitude-encode a (near-)zero vector");
  }
  QuantumState st;
  st.source_dim = x.size();
  st.amplitudes.assign(std::bit_ceil(x.size()), std::complex<double>(0.0, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) st.amplitudes[i] = x[i] / norm;
  return st;
}

FidelityEstimate swap_test_exact(const QuantumState& psi, const QuantumState& phi) {
  FidelityEstimate est;
  est.raw_prob0 = swap_test_prob0(psi, phi);
  est.value = clamp01(2.0 * est.raw_prob0 - 1.0);
  est.shots = std::nullopt;
  return est;
}

FidelityEstimate swap_test_sampled(const QuantumState& psi, const QuantumState& phi,
                                   std::uint32_t shots, Rng& rng) {
  if (shots == 0) throw Error(ErrorCode::InvalidArgument, "shots must be >= 1");
  const double p0 = swap_test_prob0(psi, phi);
  std::uint64_t count0 = 0;
  for (std::uint32_t s = 0; s < shots; ++s) {
    if (uniform_double(rng) < p0) ++count0;
  }
  FidelityEstimate est;
  est.raw_prob0 = static_cast<double>(count0) / static_cast<double>(shots);
  est.value = clamp01(2.0 * est.raw_prob0 - 1.0);
  est.shots = shots;
  return est;
}

double fidelity_distance(std::span<const double> x, std::span<const double> c,
                         FidelityMode mode, std::uint32_t shots, Rng* rng) {
  const QuantumState sx = amplitude_encode(x);
  const QuantumState sc = amplitude_encode(c);
  if (mode == FidelityMode::Exact) {
    return 1.0 - swap_test_exact(sx, sc).value;
  }
  if (rng == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "sampled fidelity distance needs an rng");
  }
  return 1.0 - swap_test_sampled(sx, sc, shots, *rng).value;
}

BootstrapSample qram_bootstrap(std::size_t n, std::size_t m, Rng& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "cannot sample from an empty set");
  BootstrapSample sample;
  sample.sample_size = m;
  sample.indices.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    sample.indices[i] = static_cast<std::uint32_t>(uniform_below(rng, n));
  }
  return sample;
}

}  // namespace qbag
