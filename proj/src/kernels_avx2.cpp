// AVX2 variants. Built with -mavx2 only (no FMA, no contraction) so that the
// elementwise kernels reproduce the scalar results exactly.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace gbi::kernels::detail {
namespace {

inline __m256i lane_index(std::size_t i) {
  const auto b = static_cast<long long>(i);
  return _mm256_setr_epi64x(b, b + 1, b + 2, b + 3);
}

// All-ones lanes where (index & care) == want.
inline __m256d match_mask(__m256i idx, __m256i care, __m256i want) {
  return _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(idx, care), want));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

template <bool Subtract>
inline __m256d combine(__m256d a, __m256d b) {
  if constexpr (Subtract) {
    return _mm256_sub_pd(a, b);
  } else {
    return _mm256_add_pd(a, b);
  }
}

template <bool Subtract>
void superset_sweep(double* a, int var_count) {
  if (var_count < 2) {
    if constexpr (Subtract) {
      superset_diff_scalar(a, var_count);
    } else {
      superset_sum_scalar(a, var_count);
    }
    return;
  }
  const std::size_t n = std::size_t{1} << var_count;
  // Bit 0: lanes 0 and 2 take their odd neighbour.
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    const __m256d swapped = _mm256_permute_pd(v, 0b0101);
    _mm256_storeu_pd(a + i, _mm256_blend_pd(v, combine<Subtract>(v, swapped), 0b0101));
  }
  // Bit 1: lanes 0 and 1 take lanes 2 and 3.
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    const __m256d swapped = _mm256_permute4x64_pd(v, _MM_SHUFFLE(1, 0, 3, 2));
    _mm256_storeu_pd(a + i, _mm256_blend_pd(v, combine<Subtract>(v, swapped), 0b0011));
  }
  for (int k = 2; k < var_count; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t base = 0; base < n; base += 2 * bit) {
      double* lo = a + base;
      const double* hi = a + base + bit;
      for (std::size_t j = 0; j < bit; j += 4) {
        _mm256_storeu_pd(lo + j,
                         combine<Subtract>(_mm256_loadu_pd(lo + j), _mm256_loadu_pd(hi + j)));
      }
    }
  }
}

}  // namespace

void superset_sum_avx2(double* a, int var_count) { superset_sweep<false>(a, var_count); }

void superset_diff_avx2(double* a, int var_count) { superset_sweep<true>(a, var_count); }

double pattern_mass_avx2(const double* a, std::size_t n, std::uint32_t care, std::uint32_t want) {
  const __m256i vcare = _mm256_set1_epi64x(care);
  const __m256i vwant = _mm256_set1_epi64x(want);
  const __m256i step = _mm256_set1_epi64x(4);
  __m256i idx = lane_index(0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_and_pd(match_mask(idx, vcare, vwant), _mm256_loadu_pd(a + i)));
    idx = _mm256_add_epi64(idx, step);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    if ((static_cast<std::uint32_t>(i) & care) == want) s += a[i];
  }
  return s;
}

double pattern_keep_avx2(double* a, std::size_t n, std::uint32_t care, std::uint32_t want) {
  const __m256i vcare = _mm256_set1_epi64x(care);
  const __m256i vwant = _mm256_set1_epi64x(want);
  const __m256i step = _mm256_set1_epi64x(4);
  __m256i idx = lane_index(0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d kept = _mm256_and_pd(match_mask(idx, vcare, vwant), _mm256_loadu_pd(a + i));
    _mm256_storeu_pd(a + i, kept);
    acc = _mm256_add_pd(acc, kept);
    idx = _mm256_add_epi64(idx, step);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    if ((static_cast<std::uint32_t>(i) & care) == want) {
      s += a[i];
    } else {
      a[i] = 0.0;
    }
  }
  return s;
}

void pattern_scale_avx2(double* a, std::size_t n, std::uint32_t care, std::uint32_t want,
                        double match, double other) {
  const __m256i vcare = _mm256_set1_epi64x(care);
  const __m256i vwant = _mm256_set1_epi64x(want);
  const __m256i step = _mm256_set1_epi64x(4);
  const __m256d vmatch = _mm256_set1_pd(match);
  const __m256d vother = _mm256_set1_pd(other);
  __m256i idx = lane_index(0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d f = _mm256_blendv_pd(vother, vmatch, match_mask(idx, vcare, vwant));
    _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), f));
    idx = _mm256_add_epi64(idx, step);
  }
  for (; i < n; ++i) {
    a[i] *= ((static_cast<std::uint32_t>(i) & care) == want) ? match : other;
  }
}

void gather_scale_avx2(double* a, std::size_t n, const double* factors,
                       const std::uint32_t* index) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(index + i));
    const __m256d f = _mm256_i32gather_pd(factors, idx, 8);
    _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), f));
  }
  for (; i < n; ++i) a[i] *= factors[index[i]];
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

void scale_avx2(double* a, std::size_t n, double f) {
  const __m256d vf = _mm256_set1_pd(f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vf));
  for (; i < n; ++i) a[i] *= f;
}

void axpy_avx2(double* y, const double* x, std::size_t n, double alpha) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace gbi::kernels::detail
