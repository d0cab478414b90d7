#pragma once

#include <cstddef>
#include <string_view>

namespace qbag::kernels {

// Dense inner loops shared by the clustering and statevector code.  A
// scalar reference implementation always exists; on x86-64 an AVX2+FMA
// variant is selected at runtime when the CPU supports it.
//
// Reductions accumulate in four independent lanes combined as
// ((l0 + l2) + (l1 + l3)) + tail, with fused multiply-adds in every
// variant, so scalar and AVX2 results are bit-identical on the same
// input.  Equivalence tests rely on that.

double dot(const double* a, const double* b, std::size_t n);
double squared_l2(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);

// acc[i] += x[i]
void add_inplace(double* acc, const double* x, std::size_t n);
// x[i] *= factor
void scale_inplace(double* x, double factor, std::size_t n);

// Name of the implementation currently dispatched: "scalar" or "avx2".
std::string_view active_implementation();

// Force a specific implementation ("scalar", "avx2", or "auto").  Returns
// false and leaves the dispatch unchanged if the request is unavailable.
// The QBAG_KERNELS environment variable applies the same override at
// startup.  Not safe to call concurrently with kernel use.
bool set_implementation(std::string_view name);

}  // namespace qbag::kernels
