#pragma once

// Exact pure-state simulation of registers whose sites have heterogeneous
// dimension (qubits next to qutrits, or one qudit of arbitrary size).
//
// Amplitudes are stored in mixed-radix order with site 0 most significant, so
// for a control qubit followed by a work qutrit the basis state |c, w> sits at
// index 3c + w, matching kets written "|00> + |11> + |02> + |12>".
//
// Gates take the state by value and return it, so callers that do not need the
// input can std::move it in and nothing is copied.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qrecycle {

using Amplitude = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Image of every level under a permutation: level i goes to perm[i].
using LevelPermutation = std::vector<std::size_t>;

/// Largest register (number of amplitudes) the simulator will allocate.
inline constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 24;

/// Outcomes less likely than this are treated as impossible and omitted.
inline constexpr double kZeroProbability = 1e-24;

class PureState {
 public:
  /// The all-zero basis state. Throws std::invalid_argument for an empty list,
  /// a dimension below 2, or more than kMaxAmplitudes amplitudes.
  explicit PureState(std::vector<std::size_t> dims);

  struct Term {
    Amplitude coefficient;
    std::vector<std::size_t> digits;
  };

  /// Normalised superposition of basis kets, e.g. {{1, {0, 0}}, {1, {1, 2}}}.
  static PureState from_terms(std::vector<std::size_t> dims, const std::vector<Term>& terms);

  /// Normalises the given amplitudes. Throws on length mismatch or a zero vector.
  static PureState from_amplitudes(std::vector<std::size_t> dims, std::vector<Amplitude> amps);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t num_sites() const { return dims_.size(); }
  std::size_t size() const { return amps_.size(); }
  std::size_t dim(std::size_t site) const { return dims_.at(site); }
  std::size_t stride(std::size_t site) const { return strides_.at(site); }

  /// Level of `site` in basis state `index`.
  std::size_t digit(std::size_t index, std::size_t site) const {
    return (index / strides_[site]) % dims_[site];
  }
  std::size_t index_of(std::span<const std::size_t> digits) const;

  std::span<const Amplitude> amplitudes() const { return amps_; }
  std::span<Amplitude> mutable_amplitudes() { return amps_; }
  Amplitude amplitude(std::initializer_list<std::size_t> digits) const;

  double norm_squared() const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::vector<Amplitude> amps_;
};

/// Reduced state of one site.
struct DensityMatrix {
  ComplexMatrix entries;

  std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
  double trace() const { return entries.trace().real(); }
  /// Tr(rho^2): 1 for a pure state, 1/d for the maximal mixture.
  double purity() const { return (entries * entries).trace().real(); }
};

/// One outcome path of mid-circuit measurement.
struct MeasurementBranch {
  std::vector<std::size_t> bits;
  double probability = 0;
  PureState state;
};

struct PostSelection {
  double probability = 0;
  std::optional<PureState> state;  // empty when the outcome is impossible
};

PureState new_register(std::vector<std::size_t> dims);

/// Dense kernel: `matrix` acts on the listed sites (first listed most
/// significant), identity elsewhere. Rejects dimension mismatches, repeated
/// sites, and any matrix with max|M^dagger M - I| > 1e-10.
PureState apply_unitary(PureState state, std::span<const std::size_t> sites, const ComplexMatrix& matrix);

// Qubit gates; the site must have dimension 2.
PureState hadamard(PureState state, std::size_t site);
PureState pauli_x(PureState state, std::size_t site);
/// e^{i theta} on level 1. phase(-pi/2) is the R = |0><0| - i|1><1| rotation.
PureState phase(PureState state, std::size_t site, double theta);
/// e^{i theta} on |1>|1> of two qubit sites.
PureState controlled_phase(PureState state, std::size_t control, std::size_t target, double theta);

/// Swaps two levels of one site (a relabelling of two modes).
PureState transposition(PureState state, std::size_t site, std::size_t level_a, std::size_t level_b);
/// Swaps two target levels on the control = 1 subspace. Control must be a qubit.
PureState controlled_transposition(PureState state, std::size_t control, std::size_t target, std::size_t level_a,
                                   std::size_t level_b);
PureState permutation(PureState state, std::size_t site, const LevelPermutation& perm);
PureState controlled_permutation(PureState state, std::size_t control, std::size_t target,
                                 const LevelPermutation& perm);

/// Born probability of each level of `site`.
std::vector<double> marginal_probabilities(const PureState& state, std::size_t site);

/// One branch per possible outcome, in increasing level order. Outcomes with
/// probability below kZeroProbability are omitted. Each branch records its
/// level in `bits` and holds the renormalised collapsed state.
std::vector<MeasurementBranch> measure_site(const PureState& state, std::size_t site);

PostSelection post_select(const PureState& state, std::size_t site, std::size_t level);

/// Projects `site` onto the span of `levels` (a detector that does not resolve them).
PostSelection project_levels(const PureState& state, std::size_t site, std::span<const std::size_t> levels);

/// Partial trace over every other site.
DensityMatrix reduced_density(const PureState& state, std::size_t site);

/// max_i |a_i - b_i|. Registers must have equal dims.
double max_deviation(const PureState& a, const PureState& b);

/// max_i |e^{i phi} a_i - b_i| with phi aligning a to b.
double max_deviation_up_to_global_phase(const PureState& a, const PureState& b);

}  // namespace qrecycle
