#pragma once

// Raw-pointer kernel entry points. The AVX2 translation unit is compiled with
// extra ISA flags, so nothing here may pull in inline library templates that
// the linker could merge with baseline copies.

#include <cstddef>
#include <cstdint>

namespace gbi::kernels::detail {

void superset_sum_scalar(double* a, int var_count);
void superset_diff_scalar(double* a, int var_count);
double pattern_mass_scalar(const double* a, std::size_t n, std::uint32_t care, std::uint32_t want);
double pattern_keep_scalar(double* a, std::size_t n, std::uint32_t care, std::uint32_t want);
void pattern_scale_scalar(double* a, std::size_t n, std::uint32_t care, std::uint32_t want,
                          double match, double other);
void gather_scale_scalar(double* a, std::size_t n, const double* factors,
                         const std::uint32_t* index);
double sum_scalar(const double* a, std::size_t n);
void scale_scalar(double* a, std::size_t n, double f);
void axpy_scalar(double* y, const double* x, std::size_t n, double alpha);

#if defined(GBI_HAVE_AVX2)
void superset_sum_avx2(double* a, int var_count);
void superset_diff_avx2(double* a, int var_count);
double pattern_mass_avx2(const double* a, std::size_t n, std::uint32_t care, std::uint32_t want);
double pattern_keep_avx2(double* a, std::size_t n, std::uint32_t care, std::uint32_t want);
void pattern_scale_avx2(double* a, std::size_t n, std::uint32_t care, std::uint32_t want,
                        double match, double other);
void gather_scale_avx2(double* a, std::size_t n, const double* factors,
                       const std::uint32_t* index);
double sum_avx2(const double* a, std::size_t n);
void scale_avx2(double* a, std::size_t n, double f);
void axpy_avx2(double* y, const double* x, std::size_t n, double alpha);
#endif

}  // namespace gbi::kernels::detail
