#pragma once

// Quantum order finding, simulated exactly two ways:
//
//  * run_standard: n control qubits in uniform superposition, controlled
//    modular-multiplication permutations, a full quantum Fourier transform.
//  * run_recycled: one control qubit reused n times. Each round resets it,
//    applies the next controlled power (highest first), a feed-forward phase
//    computed from the bits measured so far, a Hadamard, and a measurement.
//
// In both, the work register is a single qudit of dimension r whose level j
// stands for x^j mod N, so U^k is the cyclic shift j -> j + k (mod r).
//
// The first bit measured by the recycled loop is the least significant bit of
// the outcome y; labels render y most-significant-bit first ("00", "01", ...).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qrecycle/number_theory.hpp"
#include "qrecycle/qudit_sim.hpp"

namespace qrecycle {

/// Widest control register the exact simulators accept.
inline constexpr unsigned kMaxControlBits = 16;

/// Probability mass over the 2^n outcomes of an n-bit control register.
class Distribution {
 public:
  /// Throws std::invalid_argument unless probs has 2^bits entries in [0, 1]
  /// summing to 1 within 1e-9.
  Distribution(unsigned bits, std::vector<double> probs);

  unsigned bits() const { return bits_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t outcome) const { return probs_.at(outcome); }
  std::span<const double> probabilities() const { return probs_; }

  /// Big-endian binary rendering of the outcome, e.g. label(1) == "01" for n = 2.
  std::string label(std::size_t outcome) const;

 private:
  unsigned bits_;
  std::vector<double> probs_;
};

/// max_y |p(y) - q(y)|; throws on mismatched widths.
double max_abs_difference(const Distribution& p, const Distribution& q);

/// Everything the circuits need to know about one instance.
struct OrderFindingSpec {
  FactoringInstance instance;
  unsigned bits;
  std::uint64_t order;
  std::vector<std::uint64_t> orbit;  // orbit[j] = x^j mod N, j < order

  /// U^exponent as a permutation of work levels.
  LevelPermutation power_shift(std::uint64_t exponent) const;
};

OrderFindingSpec build_spec(const FactoringInstance& instance, unsigned bits);

Distribution run_standard(const OrderFindingSpec& spec);
Distribution run_recycled(const OrderFindingSpec& spec);

/// Branches of the recycled loop after the first `iterations` rounds: bits in
/// measurement order, joint probability, and the (qubit, work qudit) state.
std::vector<MeasurementBranch> recycled_branches(const OrderFindingSpec& spec, unsigned iterations);

/// theta_j = -2 pi sum_{l<j} m_l 2^{-(j-l+1)}, applied to level 1 of the
/// control before its last Hadamard in round j (1-based).
double feedforward_phase(std::span<const std::size_t> measured_bits, unsigned iteration);

/// Closed form, independent of any simulation:
/// P(y) = 4^{-n} sum_{j<r} |sum_{a = j mod r, a < 2^n} exp(2 pi i y a / 2^n)|^2.
Distribution theoretical_distribution(std::uint64_t order, unsigned bits);

/// Classical (Bhattacharyya) fidelity (sum_y sqrt(p_y q_y))^2.
double distribution_fidelity(const Distribution& p, const Distribution& q);

/// Inverse-CDF draw with a 53-bit uniform from the generator.
std::size_t sample_outcome(const Distribution& dist, std::mt19937_64& rng);

enum class PathMode { kStandard, kRecycled };

std::string to_string(PathMode mode);
/// Throws std::invalid_argument on an unknown name.
PathMode path_mode_from_string(const std::string& name);

struct FactorRequest {
  std::uint64_t modulus = 0;
  PathMode mode = PathMode::kRecycled;
  std::optional<std::uint64_t> coprime;  // drawn with the seeded generator when empty
  std::optional<unsigned> bits;          // ceil(log2(N^2)) when empty
  std::uint64_t seed = 0;
};

/// Samples drawn per co-prime before giving up on it.
inline constexpr int kMaxSamplesPerCoprime = 32;
/// Co-primes tried when none was requested.
inline constexpr int kMaxCoprimeAttempts = 8;

struct FactorReport {
  std::uint64_t modulus = 0;
  PathMode mode = PathMode::kRecycled;
  std::uint64_t seed = 0;
  unsigned bits = 0;
  std::uint64_t coprime = 0;                  // base of the final attempt
  std::vector<std::uint64_t> coprimes_tried;
  std::vector<std::uint64_t> samples;         // outcomes drawn for the final base
  std::optional<std::uint64_t> order;
  std::optional<FactorPair> factors;
  std::string status;  // "factored", "order_not_found" or "order_gives_no_factors"

  bool success() const { return factors.has_value(); }
};

/// Classical pre-processing, a quantum path, sampling, order recovery and factor
/// extraction. Invalid input throws std::invalid_argument; running out of
/// retries is reported, not thrown.
FactorReport factor_pipeline(const FactorRequest& request);

}  // namespace qrecycle
