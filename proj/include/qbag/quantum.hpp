#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qbag/error.hpp"
#include "qbag/rng.hpp"

namespace qbag {

// Amplitude-encoded register: unit-norm amplitudes, length a power of two,
// entries at and beyond source_dim are zero padding.
struct QuantumState {
  std::vector<std::complex<double>> amplitudes;
  std::size_t source_dim = 0;

  std::size_t num_qubits() const;

  // Validates norm (within 1e-9), power-of-two length and zero padding.
  static QuantumState from_amplitudes(std::vector<std::complex<double>> amplitudes,
                                      std::size_t source_dim);
};

struct FidelityEstimate {
  double value = 0.0;                 // squared overlap estimate, clamped to [0, 1]
  std::optional<std::uint32_t> shots; // nullopt marks the exact mode
  double raw_prob0 = 0.0;             // ancilla Pr(0): exact circuit value, or
                                      // the measured fraction in shot mode
};

struct BootstrapSample {
  std::vector<std::uint32_t> indices;
  std::size_t sample_size = 0;
};

// Normalizes x to unit L2 norm and zero-pads to the next power of two.
// Throws ZeroNormEncoding when ||x|| <= 1e-12.
QuantumState amplitude_encode(std::span<const double> x);

// Statevector evolution of the swap-test circuit on 2n+1 qubits: Hadamard
// on the ancilla, controlled swap of the two n-qubit registers, Hadamard
// again, then the ancilla Pr(0) marginal.  value = 2*Pr(0) - 1.
FidelityEstimate swap_test_exact(const QuantumState& psi, const QuantumState& phi);

// Draws `shots` ancilla measurements from the exact circuit distribution;
// value = 2 * count0/shots - 1, clamped to [0, 1].
FidelityEstimate swap_test_sampled(const QuantumState& psi, const QuantumState& phi,
                                   std::uint32_t shots, Rng& rng);

enum class FidelityMode { Exact, Sampled };

// 1 - fidelity of the amplitude-encoded vectors.  rng is required (and
// consumed) only in sampled mode.
double fidelity_distance(std::span<const double> x, std::span<const double> c,
                         FidelityMode mode, std::uint32_t shots = 0, Rng* rng = nullptr);

// M i.i.d. uniform draws over {0..n-1} with replacement: the measurement
// outcomes of a uniform-superposition index register prepared M times.
BootstrapSample qram_bootstrap(std::size_t n, std::size_t m, Rng& rng);

}  // namespace qbag
