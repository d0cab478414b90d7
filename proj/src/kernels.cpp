#include "qbag/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "kernels_detail.hpp"

namespace qbag::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t main = n & ~std::size_t(3);
  for (std::size_t i = 0; i < main; i += 4) {
    l0 = std::fma(a[i], b[i], l0);
    l1 = std::fma(a[i + 1], b[i + 1], l1);
    l2 = std::fma(a[i + 2], b[i + 2], l2);
    l3 = std::fma(a[i + 3], b[i + 3], l3);
  }
  double tail = 0.0;
  for (std::size_t i = main; i < n; ++i) tail = std::fma(a[i], b[i], tail);
  return ((l0 + l2) + (l1 + l3)) + tail;
}

double squared_l2_scalar(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t main = n & ~std::size_t(3);
  for (std::size_t i = 0; i < main; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    l0 = std::fma(d0, d0, l0);
    l1 = std::fma(d1, d1, l1);
    l2 = std::fma(d2, d2, l2);
    l3 = std::fma(d3, d3, l3);
  }
  double tail = 0.0;
  for (std::size_t i = main; i < n; ++i) {
    const double d = a[i] - b[i];
    tail = std::fma(d, d, tail);
  }
  return ((l0 + l2) + (l1 + l3)) + tail;
}

void add_inplace_scalar(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void scale_inplace_scalar(double* x, double factor, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= factor;
}

detail::Table scalar_table() {
  return {dot_scalar, squared_l2_scalar, add_inplace_scalar, scale_inplace_scalar};
}

struct Dispatch {
  detail::Table table;
  const char* name;
};

Dispatch pick(std::string_view request) {
#if QBAG_BUILD_AVX2
  if (request == "avx2" && detail::avx2_supported()) {
    return {detail::avx2_table(), "avx2"};
  }
  if (request == "auto" && detail::avx2_supported()) {
    return {detail::avx2_table(), "avx2"};
  }
#endif
  if (request == "scalar" || request == "auto") {
    return {scalar_table(), "scalar"};
  }
  return {scalar_table(), ""};  // unavailable request
}

Dispatch& dispatch() {
  static Dispatch d = [] {
    const char* env = std::getenv("QBAG_KERNELS");
    Dispatch chosen = pick(env != nullptr ? std::string_view(env) : "auto");
    if (chosen.name[0] == '\0') chosen = pick("auto");
    return chosen;
  }();
  return d;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table.dot(a, b, n);
}

double squared_l2(const double* a, const double* b, std::size_t n) {
  return dispatch().table.squared_l2(a, b, n);
}

double sum_squares(const double* a, std::size_t n) {
  return dispatch().table.dot(a, a, n);
}

void add_inplace(double* acc, const double* x, std::size_t n) {
  dispatch().table.add_inplace(acc, x, n);
}

void scale_inplace(double* x, double factor, std::size_t n) {
  dispatch().table.scale_inplace(x, factor, n);
}

std::string_view active_implementation() { return dispatch().name; }

bool set_implementation(std::string_view name) {
  Dispatch requested = pick(name);
  if (requested.name[0] == '\0') return false;
  dispatch() = requested;
  return true;
}

}  // namespace qbag::kernels
