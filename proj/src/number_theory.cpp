#include "qrecycle/number_theory.hpp"

#include <bit>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qrecycle {

namespace {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t smallest_prime_factor(std::uint64_t value) {
  if (value % 2 == 0) return 2;
  for (std::uint64_t d = 3; d <= value / d; d += 2) {
    if (value % d == 0) return d;
  }
  return value;
}

}  // namespace

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
  if (a == 0 && b == 0) throw std::invalid_argument("gcd(0, 0) is undefined");
  return std::gcd(a, b);
}

std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t modulus) {
  if (modulus < 2) throw std::invalid_argument("mod_pow: modulus must be at least 2");
  std::uint64_t result = 1;
  base %= modulus;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, modulus);
    base = mul_mod(base, base, modulus);
    exp >>= 1;
  }
  return result;
}

std::uint64_t multiplicative_order(std::uint64_t x, std::uint64_t modulus) {
  if (modulus < 2) throw std::invalid_argument("multiplicative_order: N must be at least 2");
  if (std::gcd(x, modulus) != 1) {
    throw std::invalid_argument("multiplicative_order: x and N are not co-prime");
  }
  const std::uint64_t start = x % modulus;
  std::uint64_t value = start;
  std::uint64_t r = 1;
  while (value != 1 % modulus) {
    value = mul_mod(value, start, modulus);
    ++r;
  }
  return r;
}

bool is_prime(std::uint64_t value) {
  return value >= 2 && smallest_prime_factor(value) == value;
}

std::uint64_t isqrt(std::uint64_t value) {
  if (value < 2) return value;
  // Newton from above; the first iterate that does not decrease is the floor.
  std::uint64_t x = std::uint64_t{1} << ((std::bit_width(value) + 1) / 2);
  while (true) {
    std::uint64_t y = (x + value / x) / 2;
    if (y >= x) return x;
    x = y;
  }
}

void validate_modulus(std::uint64_t modulus) {
  if (modulus < 3) throw std::invalid_argument("N = " + std::to_string(modulus) + " is too small to factor");
  if (modulus % 2 == 0) throw std::invalid_argument("N = " + std::to_string(modulus) + " is even");
  const std::uint64_t p = smallest_prime_factor(modulus);
  if (p == modulus) throw std::invalid_argument("N = " + std::to_string(modulus) + " is prime");
  std::uint64_t rest = modulus;
  while (rest % p == 0) rest /= p;
  if (rest == 1) {
    throw std::invalid_argument("N = " + std::to_string(modulus) + " is a prime power of " + std::to_string(p));
  }
}

FactoringInstance FactoringInstance::make(std::uint64_t modulus, std::uint64_t base) {
  validate_modulus(modulus);
  if (base <= 1 || base >= modulus) {
    throw std::invalid_argument("co-prime x = " + std::to_string(base) + " must satisfy 1 < x < N");
  }
  if (std::gcd(base, modulus) != 1) {
    throw std::invalid_argument("x = " + std::to_string(base) + " is not co-prime to N = " +
                                std::to_string(modulus));
  }
  return FactoringInstance(modulus, base);
}

std::vector<Convergent> convergents(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) throw std::invalid_argument("convergents: zero denominator");
  std::vector<Convergent> out;
  // h/k recurrences seeded with h_{-1}/k_{-1} = 1/0 and h_{-2}/k_{-2} = 0/1.
  std::uint64_t h1 = 1, h2 = 0, k1 = 0, k2 = 1;
  std::uint64_t num = numerator, den = denominator;
  while (den != 0) {
    const std::uint64_t term = num / den;
    const std::uint64_t h = term * h1 + h2;
    const std::uint64_t k = term * k1 + k2;
    out.push_back({h, k});
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
    const std::uint64_t rem = num % den;
    num = den;
    den = rem;
  }
  return out;
}

std::optional<std::uint64_t> recover_order(std::uint64_t measured, unsigned bits,
                                           const FactoringInstance& instance) {
  if (bits == 0 || bits >= 64) throw std::invalid_argument("recover_order: bit count must be in [1, 63]");
  const std::uint64_t scale = std::uint64_t{1} << bits;
  if (measured >= scale) throw std::invalid_argument("recover_order: measured outcome exceeds 2^n");
  const std::uint64_t n = instance.modulus();
  for (const Convergent& c : convergents(measured, scale)) {
    if (c.q >= n) break;
    if (mod_pow(instance.base(), c.q, n) == 1) return c.q;
  }
  return std::nullopt;
}

std::optional<FactorPair> extract_factors(std::uint64_t x, std::uint64_t order, std::uint64_t modulus) {
  if (order == 0 || mod_pow(x, order, modulus) != 1) {
    throw std::invalid_argument("extract_factors: x^r is not 1 mod N");
  }
  std::uint64_t half_power = 0;
  if (order % 2 == 0) {
    half_power = mod_pow(x, order / 2, modulus);
  } else {
    const std::uint64_t root = isqrt(x);
    if (root * root != x) return std::nullopt;
    half_power = mod_pow(root, order, modulus);
  }
  for (std::uint64_t candidate : {(half_power + modulus - 1) % modulus, (half_power + 1) % modulus}) {
    const std::uint64_t g = std::gcd(candidate, modulus);
    if (g != 1 && g != modulus) {
      const std::uint64_t other = modulus / g;
      return FactorPair{std::min(g, other), std::max(g, other)};
    }
  }
  return std::nullopt;
}

unsigned default_control_bits(std::uint64_t modulus) {
  if (modulus < 2 || modulus > (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("default_control_bits: N out of range");
  }
  const std::uint64_t square = modulus * modulus;
  return static_cast<unsigned>(std::bit_width(square - 1));
}

}  // namespace qrecycle
