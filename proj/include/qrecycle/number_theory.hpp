#pragma once

// Classical routines around quantum order finding: input validation, modular
// arithmetic, the brute-force order oracle, continued-fraction order recovery
// and factor extraction.
//
// Everything here is a pure function over 64-bit unsigned integers. Products
// are formed in 128 bits, so no intermediate can overflow.

#include <cstdint>
#include <optional>
#include <vector>

namespace qrecycle {

/// A number to factor together with the co-prime base used for order finding.
///
/// Construction enforces: N odd, composite and not a prime power; 1 < x < N;
/// gcd(x, N) = 1.
class FactoringInstance {
 public:
  /// Throws std::invalid_argument naming the violated precondition.
  static FactoringInstance make(std::uint64_t modulus, std::uint64_t base);

  std::uint64_t modulus() const { return modulus_; }
  std::uint64_t base() const { return base_; }

 private:
  FactoringInstance(std::uint64_t modulus, std::uint64_t base) : modulus_(modulus), base_(base) {}

  std::uint64_t modulus_;
  std::uint64_t base_;
};

/// Throws std::invalid_argument if N is not odd, composite and a non prime power.
/// The message names the violated condition ("even", "prime", "prime power", ...).
void validate_modulus(std::uint64_t modulus);

/// Continued-fraction convergent p/q, always in lowest terms.
struct Convergent {
  std::uint64_t p = 0;
  std::uint64_t q = 1;

  friend bool operator==(const Convergent&, const Convergent&) = default;
};

/// Both-zero input throws std::invalid_argument.
std::uint64_t gcd(std::uint64_t a, std::uint64_t b);

/// base^exp mod modulus by square-and-multiply. modulus < 2 throws.
std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t modulus);

/// Least r >= 1 with x^r = 1 (mod N), found by direct iteration. This is the
/// reference the quantum paths are checked against.
std::uint64_t multiplicative_order(std::uint64_t x, std::uint64_t modulus);

/// All convergents of numerator/denominator, ending with the reduced fraction.
std::vector<Convergent> convergents(std::uint64_t numerator, std::uint64_t denominator);

/// Recovers the order from a measured outcome y of an n-bit control register.
/// Scans the convergents of y/2^n and returns the smallest denominator q < N
/// with x^q = 1 (mod N). Requires y < 2^n and n < 64.
std::optional<std::uint64_t> recover_order(std::uint64_t measured, unsigned bits,
                                           const FactoringInstance& instance);

struct FactorPair {
  std::uint64_t first = 0;  // first <= second
  std::uint64_t second = 0;

  friend bool operator==(const FactorPair&, const FactorPair&) = default;
};

/// gcd(x^{r/2} +- 1, N). For odd r the half power is taken as s^r with x = s^2,
/// which is how x = 4 factors 21; odd r with non-square x yields nullopt, as do
/// trivial gcds. Throws std::invalid_argument unless x^r = 1 (mod N).
std::optional<FactorPair> extract_factors(std::uint64_t x, std::uint64_t order, std::uint64_t modulus);

bool is_prime(std::uint64_t value);

/// Exact floor(sqrt(value)).
std::uint64_t isqrt(std::uint64_t value);

/// ceil(log2(N^2)): the control-register width that guarantees k/r is a
/// convergent of y/2^n.
unsigned default_control_bits(std::uint64_t modulus);

}  // namespace qrecycle
