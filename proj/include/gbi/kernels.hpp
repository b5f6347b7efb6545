#pragma once

// Data-parallel inner loops over dense probability tables.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant in use is chosen once at first call from cpuid; the
// GBI_SIMD environment variable ("scalar" or "avx2") overrides the choice.
//
// Tables are indexed by bitmask: entry i is the joint event whose occurring
// variables are the set bits of i. Kernels that do not reduce (the subset
// sweeps, zeroing, scaling, gather) are bit-identical across variants; the
// reductions may differ in the last few ulps because of summation order.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace gbi::kernels {

struct Table {
  std::string_view name;

  // a[i] += a[i | bit] for every bit, every i without that bit (superset sums).
  void (*superset_sum)(double* a, int var_count);
  // Inverse of superset_sum: a[i] -= a[i | bit].
  void (*superset_diff)(double* a, int var_count);
  // Sum of a[i] over i with (i & care) == want.
  double (*pattern_mass)(const double* a, std::size_t n, std::uint32_t care, std::uint32_t want);
  // Zeroes a[i] where (i & care) != want; returns the remaining mass.
  double (*pattern_keep)(double* a, std::size_t n, std::uint32_t care, std::uint32_t want);
  // a[i] *= match when (i & care) == want, else a[i] *= other.
  void (*pattern_scale)(double* a, std::size_t n, std::uint32_t care, std::uint32_t want,
                        double match, double other);
  // a[i] *= factors[index[i]].
  void (*gather_scale)(double* a, std::size_t n, const double* factors,
                       const std::uint32_t* index);
  double (*sum)(const double* a, std::size_t n);
  void (*scale)(double* a, std::size_t n, double f);
  // y[i] += alpha * x[i]; no fused multiply-add, so variants agree bit for bit.
  void (*axpy)(double* y, const double* x, std::size_t n, double alpha);
};

const Table& scalar() noexcept;

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const Table* avx2() noexcept;

// The table selected for this process.
const Table& active() noexcept;

}  // namespace gbi::kernels
