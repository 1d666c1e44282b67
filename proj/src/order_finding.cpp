#include "qrecycle/order_finding.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qrecycle {

namespace {

constexpr std::size_t kControl = 0;
constexpr std::size_t kWork = 1;

void check_bits(unsigned bits) {
  if (bits < 1 || bits > kMaxControlBits) {
    throw std::invalid_argument("control bit count must be in [1, " + std::to_string(kMaxControlBits) + "]");
  }
}

std::uint64_t shift_amount(std::uint64_t exponent_log2, std::uint64_t order) {
  return order < 2 ? 0 : mod_pow(2, exponent_log2, order);
}

// Depth-first walk over the recycled loop. Only one branch per depth is alive.
template <typename Visit>
void walk_recycled(const OrderFindingSpec& spec, unsigned stop, PureState state, std::vector<std::size_t>& bits,
                   double probability, Visit& visit) {
  const auto iteration = static_cast<unsigned>(bits.size()) + 1;
  if (iteration > stop) {
    visit(MeasurementBranch{bits, probability, std::move(state)});
    return;
  }
  state = hadamard(std::move(state), kControl);
  state = controlled_permutation(std::move(state), kControl, kWork,
                                 spec.power_shift(shift_amount(spec.bits - iteration, spec.order)));
  state = phase(std::move(state), kControl, feedforward_phase(bits, iteration));
  state = hadamard(std::move(state), kControl);
  for (MeasurementBranch& branch : measure_site(state, kControl)) {
    const std::size_t outcome = branch.bits.front();
    PureState next = outcome == 1 ? pauli_x(std::move(branch.state), kControl) : std::move(branch.state);
    bits.push_back(outcome);
    walk_recycled(spec, stop, std::move(next), bits, probability * branch.probability, visit);
    bits.pop_back();
  }
}

}  // namespace

Distribution::Distribution(unsigned bits, std::vector<double> probs) : bits_(bits), probs_(std::move(probs)) {
  if (bits_ >= 63 || probs_.size() != (std::size_t{1} << bits_)) {
    throw std::invalid_argument("distribution needs exactly 2^n probabilities");
  }
  double total = 0;
  for (double p : probs_) {
    if (!(p >= -1e-12 && p <= 1 + 1e-12)) throw std::invalid_argument("probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1) > 1e-9) throw std::invalid_argument("probabilities do not sum to 1");
}

std::string Distribution::label(std::size_t outcome) const {
  if (outcome >= probs_.size()) throw std::out_of_range("outcome out of range");
  std::string s(bits_, '0');
  for (unsigned b = 0; b < bits_; ++b) {
    if ((outcome >> b) & 1) s[bits_ - 1 - b] = '1';
  }
  return s;
}

double max_abs_difference(const Distribution& p, const Distribution& q) {
  if (p.bits() != q.bits()) throw std::invalid_argument("distributions have different widths");
  double worst = 0;
  for (std::size_t y = 0; y < p.size(); ++y) worst = std::max(worst, std::abs(p[y] - q[y]));
  return worst;
}

LevelPermutation OrderFindingSpec::power_shift(std::uint64_t exponent) const {
  LevelPermutation perm(order);
  for (std::uint64_t j = 0; j < order; ++j) perm[j] = (j + exponent) % order;
  return perm;
}

OrderFindingSpec build_spec(const FactoringInstance& instance, unsigned bits) {
  check_bits(bits);
  const std::uint64_t n = instance.modulus();
  const std::uint64_t r = multiplicative_order(instance.base(), n);
  std::vector<std::uint64_t> orbit;
  orbit.reserve(r);
  std::uint64_t value = 1;
  for (std::uint64_t j = 0; j < r; ++j) {
    orbit.push_back(value);
    value = static_cast<std::uint64_t>(static_cast<unsigned __int128>(value) * instance.base() % n);
  }
  return {instance, bits, r, std::move(orbit)};
}

Distribution run_standard(const OrderFindingSpec& spec) {
  const unsigned n = spec.bits;
  check_bits(n);
  std::vector<std::size_t> dims(n, 2);
  dims.push_back(spec.order);
  const std::size_t work = n;
  PureState state(dims);

  // Site k holds the control bit of weight 2^{n-1-k}.
  for (std::size_t k = 0; k < n; ++k) state = hadamard(std::move(state), k);
  for (unsigned b = 0; b < n; ++b) {
    state = controlled_permutation(std::move(state), n - 1 - b, work, spec.power_shift(shift_amount(b, spec.order)));
  }

  // QFT without the final swaps: afterwards site k holds the output bit of weight 2^k.
  for (std::size_t k = 0; k < n; ++k) {
    state = hadamard(std::move(state), k);
    for (std::size_t m = k + 1; m < n; ++m) {
      state = controlled_phase(std::move(state), m, k, 2 * std::numbers::pi / static_cast<double>(std::size_t{1} << (m - k + 1)));
    }
  }

  std::vector<double> probs(std::size_t{1} << n, 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    std::size_t y = 0;
    for (std::size_t k = 0; k < n; ++k) y |= state.digit(i, k) << k;
    probs[y] += std::norm(amps[i]);
  }
  return Distribution(n, std::move(probs));
}

std::vector<MeasurementBranch> recycled_branches(const OrderFindingSpec& spec, unsigned iterations) {
  check_bits(spec.bits);
  if (iterations > spec.bits) throw std::invalid_argument("more iterations than control bits");
  std::vector<MeasurementBranch> out;
  auto collect = [&](MeasurementBranch&& b) { out.push_back(std::move(b)); };
  std::vector<std::size_t> bits;
  walk_recycled(spec, iterations, PureState({2, spec.order}), bits, 1.0, collect);
  return out;
}

Distribution run_recycled(const OrderFindingSpec& spec) {
  check_bits(spec.bits);
  std::vector<double> probs(std::size_t{1} << spec.bits, 0.0);
  auto accumulate = [&](MeasurementBranch&& b) {
    std::size_t y = 0;
    for (std::size_t l = 0; l < b.bits.size(); ++l) y |= b.bits[l] << l;
    probs[y] += b.probability;
  };
  std::vector<std::size_t> bits;
  walk_recycled(spec, spec.bits, PureState({2, spec.order}), bits, 1.0, accumulate);
  return Distribution(spec.bits, std::move(probs));
}

double feedforward_phase(std::span<const std::size_t> measured_bits, unsigned iteration) {
  if (iteration < 1) throw std::invalid_argument("iterations are numbered from 1");
  if (measured_bits.size() != iteration - 1) {
    throw std::invalid_argument("feed-forward phase needs exactly j-1 earlier bits");
  }
  // Earlier bit l (1-based) carries weight 2^{-(j-l+1)}.
  double fraction = 0;
  for (std::size_t l = 1; l < iteration; ++l) {
    if (measured_bits[l - 1]) fraction += std::ldexp(1.0, -static_cast<int>(iteration - l + 1));
  }
  return -2 * std::numbers::pi * fraction;
}

Distribution theoretical_distribution(std::uint64_t order, unsigned bits) {
  if (order < 1) throw std::invalid_argument("order must be positive");
  check_bits(bits);
  const std::size_t dim = std::size_t{1} << bits;
  // Roots of unity indexed by (y * a) mod 2^n so every phase is reduced exactly.
  std::vector<Amplitude> roots(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    roots[k] = std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(dim));
  }
  std::vector<double> probs(dim, 0.0);
  for (std::size_t y = 0; y < dim; ++y) {
    double total = 0;
    for (std::uint64_t j = 0; j < order && j < dim; ++j) {
      Amplitude sum{0, 0};
      for (std::size_t a = j; a < dim; a += order) sum += roots[(y * a) & (dim - 1)];
      total += std::norm(sum);
    }
    probs[y] = total / (static_cast<double>(dim) * static_cast<double>(dim));
  }
  return Distribution(bits, std::move(probs));
}

double distribution_fidelity(const Distribution& p, const Distribution& q) {
  if (p.bits() != q.bits()) throw std::invalid_argument("distributions have different widths");
  double overlap = 0;
  for (std::size_t y = 0; y < p.size(); ++y) overlap += std::sqrt(std::max(p[y], 0.0) * std::max(q[y], 0.0));
  return std::min(1.0, overlap * overlap);
}

std::size_t sample_outcome(const Distribution& dist, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cumulative = 0;
  std::size_t last_possible = 0;
  for (std::size_t y = 0; y < dist.size(); ++y) {
    if (dist[y] <= 0) continue;
    cumulative += dist[y];
    last_possible = y;
    if (u < cumulative) return y;
  }
  return last_possible;
}

std::string to_string(PathMode mode) { return mode == PathMode::kStandard ? "standard" : "recycled"; }

PathMode path_mode_from_string(const std::string& name) {
  if (name == "standard") return PathMode::kStandard;
  if (name == "recycled") return PathMode::kRecycled;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

FactorReport factor_pipeline(const FactorRequest& request) {
  const std::uint64_t n = request.modulus;
  validate_modulus(n);
  std::optional<FactoringInstance> fixed;
  if (request.coprime) fixed = FactoringInstance::make(n, *request.coprime);
  const unsigned bits = request.bits ? *request.bits : default_control_bits(n);
  check_bits(bits);

  FactorReport report;
  report.modulus = n;
  report.mode = request.mode;
  report.seed = request.seed;
  report.bits = bits;

  std::mt19937_64 rng(request.seed);
  std::vector<std::uint64_t> candidates;
  if (!fixed) {
    for (std::uint64_t x = 2; x < n; ++x) {
      if (std::gcd(x, n) == 1) candidates.push_back(x);
    }
  }

  const int attempts = fixed ? 1 : kMaxCoprimeAttempts;
  for (int attempt = 0; attempt < attempts && (fixed || !candidates.empty()); ++attempt) {
    std::optional<FactoringInstance> instance = fixed;
    if (!instance) {
      const std::size_t pick = static_cast<std::size_t>(rng() % candidates.size());
      instance = FactoringInstance::make(n, candidates[pick]);
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    report.coprime = instance->base();
    report.coprimes_tried.push_back(instance->base());
    report.samples.clear();
    report.order.reset();

    const OrderFindingSpec spec = build_spec(*instance, bits);
    const Distribution dist = request.mode == PathMode::kStandard ? run_standard(spec) : run_recycled(spec);

    report.status = "order_not_found";
    for (int s = 0; s < kMaxSamplesPerCoprime; ++s) {
      const auto y = static_cast<std::uint64_t>(sample_outcome(dist, rng));
      report.samples.push_back(y);
      const auto order = recover_order(y, bits, *instance);
      if (!order) continue;
      report.order = order;
      report.factors = extract_factors(instance->base(), *order, n);
      report.status = report.factors ? "factored" : "order_gives_no_factors";
      break;
    }
    if (report.factors) break;
  }
  return report;
}

}  // namespace qrecycle
