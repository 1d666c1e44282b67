#include "qrecycle/number_theory.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gtest/gtest.h"

using namespace qrecycle;

namespace {

// Largest common divisor by scanning every candidate; independent of Euclid.
std::uint64_t divisor_scan_gcd(std::uint64_t a, std::uint64_t b) {
  std::uint64_t best = 1;
  for (std::uint64_t d = 1; d <= std::max(a, b); ++d) {
    if (a % d == 0 && b % d == 0) best = d;
  }
  return best;
}

std::vector<std::uint64_t> valid_moduli(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 3; n <= limit; ++n) {
    try {
      validate_modulus(n);
      out.push_back(n);
    } catch (const std::invalid_argument&) {
    }
  }
  return out;
}

}  // namespace

TEST(gcd, examples) {
  EXPECT_EQ(gcd(8 - 1, 21), 7u);
  EXPECT_EQ(gcd(13, 13), 13u);
  EXPECT_EQ(gcd(8 + 1, 21), divisor_scan_gcd(9, 21));
  EXPECT_EQ(gcd(8 + 1, 21), 3u);
  EXPECT_EQ(gcd(0, 5), 5u);
  EXPECT_THROW(gcd(0, 0), std::invalid_argument);
}

TEST(gcd, matches_divisor_scan) {
  for (std::uint64_t a = 0; a < 60; ++a) {
    for (std::uint64_t b = 1; b < 60; ++b) {
      ASSERT_EQ(gcd(a, b), divisor_scan_gcd(a, b)) << a << "," << b;
    }
  }
}

TEST(mod_pow, examples) {
  EXPECT_EQ(mod_pow(4, 3, 21), 1u);
  EXPECT_EQ(mod_pow(4, 2, 21), 16u);
  EXPECT_EQ(mod_pow(4, 0, 21), 1u);
  EXPECT_EQ(mod_pow(20, 0, 21), 1u);
  EXPECT_THROW(mod_pow(3, 2, 1), std::invalid_argument);
  EXPECT_THROW(mod_pow(3, 2, 0), std::invalid_argument);
}

TEST(mod_pow, no_overflow_near_64_bits) {
  const std::uint64_t m = 18446744073709551557ull;  // largest 64-bit prime
  // Fermat: a^(p-1) = 1 mod p.
  EXPECT_EQ(mod_pow(123456789, m - 1, m), 1u);
  EXPECT_EQ(mod_pow(m - 1, 2, m), 1u);
}

TEST(mod_pow, matches_repeated_multiplication) {
  for (std::uint64_t m = 2; m < 40; ++m) {
    for (std::uint64_t b = 0; b < 40; ++b) {
      std::uint64_t acc = 1 % m;
      for (std::uint64_t e = 0; e < 20; ++e) {
        ASSERT_EQ(mod_pow(b, e, m), acc);
        acc = acc * b % m;
      }
    }
  }
}

TEST(multiplicative_order, examples) {
  EXPECT_EQ(multiplicative_order(4, 21), 3u);
  EXPECT_EQ(multiplicative_order(1, 21), 1u);
  EXPECT_EQ(multiplicative_order(2, 21), 6u);
  EXPECT_THROW(multiplicative_order(3, 21), std::invalid_argument);
}

TEST(multiplicative_order, least_exponent_exhaustive) {
  for (std::uint64_t n = 2; n <= 1000; ++n) {
    for (std::uint64_t x = 1; x < n; ++x) {
      if (std::gcd(x, n) != 1) continue;
      const std::uint64_t r = multiplicative_order(x, n);
      ASSERT_EQ(mod_pow(x, r, n), 1u);
      // Beyond 200 only the proper divisors of r are checked; any period divides r.
      if (n <= 200) {
        for (std::uint64_t e = 1; e < r; ++e) ASSERT_NE(mod_pow(x, e, n), 1u) << x << "^" << e << " mod " << n;
      } else {
        for (std::uint64_t d = 1; d < r; ++d) {
          if (r % d == 0) ASSERT_NE(mod_pow(x, d, n), 1u);
        }
      }
    }
  }
}

TEST(convergents, examples) {
  EXPECT_EQ(convergents(85, 256), (std::vector<Convergent>{{0, 1}, {1, 3}, {85, 256}}));
  EXPECT_EQ(convergents(0, 16), (std::vector<Convergent>{{0, 1}}));
  EXPECT_EQ(convergents(1, 2), (std::vector<Convergent>{{0, 1}, {1, 2}}));
  EXPECT_EQ(convergents(3, 4), (std::vector<Convergent>{{0, 1}, {1, 1}, {3, 4}}));
  EXPECT_THROW(convergents(1, 0), std::invalid_argument);
}

TEST(convergents, lowest_terms_and_exact_tail) {
  for (std::uint64_t q = 1; q <= 300; ++q) {
    for (std::uint64_t p = 0; p < q; ++p) {
      const auto cs = convergents(p, q);
      ASSERT_FALSE(cs.empty());
      for (std::size_t i = 0; i < cs.size(); ++i) {
        ASSERT_EQ(std::gcd(cs[i].p, cs[i].q), 1u);
        if (i > 1) ASSERT_GT(cs[i].q, cs[i - 1].q);
      }
      const std::uint64_t g = std::gcd(p, q);
      ASSERT_EQ(cs.back(), (Convergent{p / g, q / g}));
    }
  }
}

TEST(validate_modulus, names_the_violation) {
  auto message = [](std::uint64_t n) {
    try {
      validate_modulus(n);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(9).find("prime power"), std::string::npos);
  EXPECT_NE(message(27).find("prime power"), std::string::npos);
  EXPECT_NE(message(22).find("even"), std::string::npos);
  EXPECT_NE(message(13).find("prime"), std::string::npos);
  EXPECT_EQ(message(21), "");
  EXPECT_EQ(message(15), "");
  EXPECT_EQ(message(45), "");
}

TEST(FactoringInstance, rejects_bad_bases) {
  EXPECT_NO_THROW(FactoringInstance::make(21, 4));
  EXPECT_THROW(FactoringInstance::make(21, 3), std::invalid_argument);
  EXPECT_THROW(FactoringInstance::make(21, 7), std::invalid_argument);
  EXPECT_THROW(FactoringInstance::make(21, 1), std::invalid_argument);
  EXPECT_THROW(FactoringInstance::make(21, 21), std::invalid_argument);
  EXPECT_THROW(FactoringInstance::make(25, 2), std::invalid_argument);
}

TEST(recover_order, examples) {
  const auto inst = FactoringInstance::make(21, 4);
  EXPECT_EQ(recover_order(85, 8, inst), std::optional<std::uint64_t>(3));
  EXPECT_EQ(recover_order(0, 2, inst), std::nullopt);
  // 3/4 expands to 0/1, 1/1, 3/4; none of those denominators is a period of 4 mod 21.
  EXPECT_EQ(recover_order(3, 2, inst), std::nullopt);
  EXPECT_THROW(recover_order(4, 2, inst), std::invalid_argument);
}

TEST(recover_order, exact_peaks_recover_order_exhaustive) {
  for (std::uint64_t n : valid_moduli(64)) {
    const unsigned bits = default_control_bits(n);
    ASSERT_GE(std::uint64_t{1} << bits, n * n);
    for (std::uint64_t x = 2; x < n; ++x) {
      if (std::gcd(x, n) != 1) continue;
      const auto inst = FactoringInstance::make(n, x);
      const std::uint64_t r = multiplicative_order(x, n);
      for (std::uint64_t k = 0; k < r; ++k) {
        if (std::gcd(k, r) != 1) continue;
        const auto y = static_cast<std::uint64_t>(std::llround(static_cast<double>(k << bits) / r));
        ASSERT_EQ(recover_order(y, bits, inst), std::optional<std::uint64_t>(r)) << n << " " << x << " k=" << k;
      }
    }
  }
}

TEST(extract_factors, examples) {
  EXPECT_EQ(extract_factors(4, 3, 21), (std::optional<FactorPair>{{3, 7}}));
  EXPECT_EQ(extract_factors(4, 2, 15), (std::optional<FactorPair>{{3, 5}}));
  EXPECT_EQ(extract_factors(14, 2, 15), std::nullopt);
  EXPECT_EQ(extract_factors(2, 6, 21), (std::optional<FactorPair>{{3, 7}}));
  // 5^3 = -1 (mod 21): the even order is useless.
  EXPECT_EQ(extract_factors(5, 6, 21), std::nullopt);
  EXPECT_THROW(extract_factors(4, 2, 21), std::invalid_argument);
}

TEST(extract_factors, odd_order_needs_square_base) {
  // 16 = 4^2 has order 3 mod 21, but 4^3 = 1 (mod 21) so both gcds are trivial.
  EXPECT_EQ(extract_factors(16, 3, 21), std::nullopt);
  for (std::uint64_t n : valid_moduli(300)) {
    for (std::uint64_t x = 2; x < n; ++x) {
      if (std::gcd(x, n) != 1) continue;
      const std::uint64_t order = multiplicative_order(x, n);
      const std::uint64_t root = isqrt(x);
      if (order % 2 == 1 && root * root != x) ASSERT_EQ(extract_factors(x, order, n), std::nullopt) << x;
    }
  }
}

TEST(extract_factors, results_are_nontrivial_divisors) {
  for (std::uint64_t n : valid_moduli(300)) {
    for (std::uint64_t x = 2; x < n; ++x) {
      if (std::gcd(x, n) != 1) continue;
      const auto f = extract_factors(x, multiplicative_order(x, n), n);
      if (!f) continue;
      ASSERT_EQ(n % f->first, 0u);
      ASSERT_EQ(n % f->second, 0u);
      ASSERT_NE(f->first, 1u);
      ASSERT_NE(f->second, n);
      ASSERT_EQ(f->first * f->second, n);
    }
  }
}

TEST(isqrt, exact_floor) {
  for (std::uint64_t v = 0; v < 100000; ++v) {
    const std::uint64_t s = isqrt(v);
    ASSERT_LE(s * s, v);
    ASSERT_GT((s + 1) * (s + 1), v);
  }
  EXPECT_EQ(isqrt(~std::uint64_t{0}), 4294967295u);
}

TEST(default_control_bits, covers_n_squared) {
  EXPECT_EQ(default_control_bits(21), 9u);
  EXPECT_EQ(default_control_bits(15), 8u);
  for (std::uint64_t n = 3; n < 2000; n += 2) {
    const unsigned b = default_control_bits(n);
    ASSERT_GE(std::uint64_t{1} << b, n * n);
    ASSERT_LT(std::uint64_t{1} << (b - 1), n * n);
  }
}
