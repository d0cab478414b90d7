#pragma once

#include <cstddef>

namespace qbag::kernels::detail {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_l2)(const double*, const double*, std::size_t);
  void (*add_inplace)(double*, const double*, std::size_t);
  void (*scale_inplace)(double*, double, std::size_t);
};

#if QBAG_BUILD_AVX2
Table avx2_table();
bool avx2_supported();
#endif

}  // namespace qbag::kernels::detail
