#include "kernels_impl.hpp"

namespace gbi::kernels::detail {

void superset_sum_scalar(double* a, int var_count) {
  const std::size_t n = std::size_t{1} << var_count;
  for (int k = 0; k < var_count; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t base = 0; base < n; base += 2 * bit) {
      for (std::size_t j = 0; j < bit; ++j) a[base + j] += a[base + bit + j];
    }
  }
}

void superset_diff_scalar(double* a, int var_count) {
  const std::size_t n = std::size_t{1} << var_count;
  for (int k = 0; k < var_count; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t base = 0; base < n; base += 2 * bit) {
      for (std::size_t j = 0; j < bit; ++j) a[base + j] -= a[base + bit + j];
    }
  }
}

double pattern_mass_scalar(const double* a, std::size_t n, std::uint32_t care,
                           std::uint32_t want) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((static_cast<std::uint32_t>(i) & care) == want) s += a[i];
  }
  return s;
}

double pattern_keep_scalar(double* a, std::size_t n, std::uint32_t care, std::uint32_t want) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((static_cast<std::uint32_t>(i) & care) == want) {
      s += a[i];
    } else {
      a[i] = 0.0;
    }
  }
  return s;
}

void pattern_scale_scalar(double* a, std::size_t n, std::uint32_t care, std::uint32_t want,
                          double match, double other) {
  for (std::size_t i = 0; i < n; ++i) {
    a[i] *= ((static_cast<std::uint32_t>(i) & care) == want) ? match : other;
  }
}

void gather_scale_scalar(double* a, std::size_t n, const double* factors,
                         const std::uint32_t* index) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= factors[index[i]];
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void scale_scalar(double* a, std::size_t n, double f) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= f;
}

void axpy_scalar(double* y, const double* x, std::size_t n, double alpha) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace gbi::kernels::detail
