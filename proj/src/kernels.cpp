#include "gbi/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace gbi::kernels {
namespace {

using namespace detail;

constexpr Table kScalar{
    "scalar",          superset_sum_scalar, superset_diff_scalar, pattern_mass_scalar,
    pattern_keep_scalar, pattern_scale_scalar, gather_scale_scalar, sum_scalar,
    scale_scalar,      axpy_scalar,
};

#if defined(GBI_HAVE_AVX2)
constexpr Table kAvx2{
    "avx2",          superset_sum_avx2, superset_diff_avx2, pattern_mass_avx2,
    pattern_keep_avx2, pattern_scale_avx2, gather_scale_avx2, sum_avx2,
    scale_avx2,      axpy_avx2,
};
#endif

const Table& select() noexcept {
  const char* forced = std::getenv("GBI_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return kScalar;
  if (const Table* t = avx2()) return *t;
  return kScalar;
}

}  // namespace

const Table& scalar() noexcept { return kScalar; }

const Table* avx2() noexcept {
#if defined(GBI_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() noexcept {
  static const Table& table = select();
  return table;
}

}  // namespace gbi::kernels
