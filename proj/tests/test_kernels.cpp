#include <bit>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "gbi/kernels.hpp"

using gbi::kernels::Table;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const Table* simd() { return gbi::kernels::avx2(); }

}  // namespace

TEST_CASE("active table is one of the known variants") {
  const Table& t = gbi::kernels::active();
  CHECK((&t == &gbi::kernels::scalar() || &t == simd()));
}

TEST_CASE("subset sweeps: AVX2 is bit-identical to scalar") {
  if (!simd()) return;
  std::mt19937_64 rng(11);
  for (int m = 0; m <= 12; ++m) {
    const auto base = random_vec(rng, std::size_t{1} << m);
    auto a = base, b = base;
    gbi::kernels::scalar().superset_sum(a.data(), m);
    simd()->superset_sum(b.data(), m);
    CHECK_MESSAGE(bit_equal(a, b), "superset_sum m=" << m);
    gbi::kernels::scalar().superset_diff(a.data(), m);
    simd()->superset_diff(b.data(), m);
    CHECK_MESSAGE(bit_equal(a, b), "superset_diff m=" << m);
  }
}

TEST_CASE("superset sum and difference invert each other") {
  std::mt19937_64 rng(12);
  for (int m = 0; m <= 10; ++m) {
    const auto base = random_vec(rng, std::size_t{1} << m);
    auto a = base;
    gbi::kernels::active().superset_sum(a.data(), m);
    for (std::uint32_t s = 0; s < a.size(); ++s) {
      double want = 0.0;
      for (std::uint32_t t = 0; t < a.size(); ++t) {
        if ((t & s) == s) want += base[t];
      }
      REQUIRE(a[s] == doctest::Approx(want).epsilon(1e-12));
    }
    gbi::kernels::active().superset_diff(a.data(), m);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - base[i]) < 1e-12);
  }
}

TEST_CASE("pattern and elementwise kernels agree across variants") {
  if (!simd()) return;
  const Table& s = gbi::kernels::scalar();
  const Table& v = *simd();
  std::mt19937_64 rng(13);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 16u, 31u, 64u, 1024u}) {
    const auto base = random_vec(rng, n);
    const auto other = random_vec(rng, n);
    for (std::uint32_t care : {0u, 1u, 3u, 5u, 6u, 0x2du}) {
      const std::uint32_t want = care & 0x25u;
      CHECK(s.pattern_mass(base.data(), n, care, want) ==
            doctest::Approx(v.pattern_mass(base.data(), n, care, want)).epsilon(1e-13));

      auto a = base, b = base;
      const double ka = s.pattern_keep(a.data(), n, care, want);
      const double kb = v.pattern_keep(b.data(), n, care, want);
      CHECK(bit_equal(a, b));
      CHECK(ka == doctest::Approx(kb).epsilon(1e-13));

      a = base;
      b = base;
      s.pattern_scale(a.data(), n, care, want, 1.7, 0.3);
      v.pattern_scale(b.data(), n, care, want, 1.7, 0.3);
      CHECK(bit_equal(a, b));
    }

    std::vector<double> factors = random_vec(rng, 8);
    std::vector<std::uint32_t> index(n);
    for (auto& i : index) i = static_cast<std::uint32_t>(rng() % 8);
    auto a = base, b = base;
    s.gather_scale(a.data(), n, factors.data(), index.data());
    v.gather_scale(b.data(), n, factors.data(), index.data());
    CHECK(bit_equal(a, b));

    a = base;
    b = base;
    s.scale(a.data(), n, 0.37);
    v.scale(b.data(), n, 0.37);
    CHECK(bit_equal(a, b));

    a = base;
    b = base;
    s.axpy(a.data(), other.data(), n, -2.5);
    v.axpy(b.data(), other.data(), n, -2.5);
    CHECK(bit_equal(a, b));

    CHECK(s.sum(base.data(), n) == doctest::Approx(v.sum(base.data(), n)).epsilon(1e-13));
  }
}

TEST_CASE("pattern kernels select by masked bits") {
  const Table& k = gbi::kernels::active();
  std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(k.pattern_mass(a.data(), 8, 0b101, 0b001) == 2.0 + 4.0);
  const double kept = k.pattern_keep(a.data(), 8, 0b010, 0b010);
  CHECK(kept == 3.0 + 4.0 + 7.0 + 8.0);
  CHECK(a == std::vector<double>{0, 0, 3, 4, 0, 0, 7, 8});
}
