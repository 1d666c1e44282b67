#pragma once

// Compiled order finding on a control qubit (site 0) and one work qudit
// (site 1) of dimension r, including the hand-compiled N = 21, x = 4 circuit:
//
//   round 1: H, cT(0,2), phase, H, project
//   round 2: reset, H, cT(0,1), uT(0,2), feed-forward phase, H, measure
//
// Compiled circuits use the opposite Fourier sign to feedforward_phase: the
// feed-forward op applies -feedforward_phase(bits) plus a per-branch
// compensation. Every other gate is real, so flipping the sign of all phases
// conjugates the state and leaves each outcome probability unchanged.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qrecycle/number_theory.hpp"
#include "qrecycle/order_finding.hpp"
#include "qrecycle/qudit_sim.hpp"

namespace qrecycle {

inline constexpr std::size_t kControlSite = 0;
inline constexpr std::size_t kWorkSite = 1;

namespace op {

struct Hadamard {
  friend bool operator==(const Hadamard&, const Hadamard&) = default;
};
struct Phase {
  double theta = 0;
  friend bool operator==(const Phase&, const Phase&) = default;
};
/// Phase fed forward from the bits measured in earlier rounds.
struct FeedForwardPhase {
  unsigned iteration = 1;
  /// Extra phase indexed by the earlier bits read as an integer (first bit
  /// least significant). Empty means none.
  std::vector<double> compensation;
  friend bool operator==(const FeedForwardPhase&, const FeedForwardPhase&) = default;
};
struct ControlledTransposition {
  std::size_t level_a = 0;
  std::size_t level_b = 0;
  friend bool operator==(const ControlledTransposition&, const ControlledTransposition&) = default;
};
struct Transposition {
  std::size_t level_a = 0;
  std::size_t level_b = 0;
  friend bool operator==(const Transposition&, const Transposition&) = default;
};
struct ControlledPermutation {
  LevelPermutation perm;
  friend bool operator==(const ControlledPermutation&, const ControlledPermutation&) = default;
};
/// Mid-circuit projection whose outcome is fed forward. Without a level every
/// outcome is enumerated; with one, only that outcome is kept.
struct Project {
  std::optional<std::size_t> level;
  friend bool operator==(const Project&, const Project&) = default;
};
/// Final read-out of the control qubit.
struct Measure {
  friend bool operator==(const Measure&, const Measure&) = default;
};
/// Control qubit back to |0>.
struct Reset {
  friend bool operator==(const Reset&, const Reset&) = default;
};

}  // namespace op

using CircuitOp = std::variant<op::Hadamard, op::Phase, op::FeedForwardPhase, op::ControlledTransposition,
                               op::Transposition, op::ControlledPermutation, op::Project, op::Measure, op::Reset>;

struct CompiledCircuit {
  unsigned bits = 0;
  std::size_t work_dim = 0;
  bool reduced = false;
  std::vector<CircuitOp> ops;

  friend bool operator==(const CompiledCircuit&, const CompiledCircuit&) = default;
};

struct CompileOptions {
  /// Apply the initial-state reduction and, where certified, the trailing
  /// uncontrolled-swap elision. false emits every controlled transposition.
  bool reduce = true;
};

/// Throws std::invalid_argument when the order is 1 or the work qudit or
/// control width exceed the simulator limits.
CompiledCircuit compile(const FactoringInstance& instance, unsigned bits, CompileOptions options = {});

/// compile(21, 4, 2) with both reductions.
CompiledCircuit reference_circuit();

/// Extra phase added to a feed-forward op, given the earlier bits and the round.
using PhaseOffset = std::function<double(std::span<const std::size_t> earlier_bits, unsigned iteration)>;

/// Exact output distribution, enumerating every projection and measurement outcome.
Distribution run_compiled(const CompiledCircuit& circuit, const PhaseOffset& offset = {});

/// State after every op along one fixed outcome record (one entry per
/// Project/Measure, in order). Projections renormalise. Throws if the record
/// has probability zero.
std::vector<PureState> trace_branch(const CompiledCircuit& circuit, std::span<const std::size_t> outcomes);

/// Checkpoints of the N = 21 circuit for the given first-round outcome:
///   [0] right before the first projection,
///   [1] after projection and the second controlled transposition,
///   [2] after the uncontrolled swap,
///   [3] final, after the feed-forward phase and Hadamard.
std::vector<PureState> stage_states(std::size_t branch_bit);

/// The expected kets for the same checkpoints, written out term by term and normalised.
std::vector<PureState> reference_states(std::size_t branch_bit);

enum class Equivalence { kIdentity, kControlPhaseFlip, kNeither };

std::string to_string(Equivalence e);

struct EquivalenceReport {
  Equivalence relation = Equivalence::kNeither;
  /// Deviation (up to global phase) for the reported relation; for kNeither,
  /// the smaller of the two candidates.
  double max_deviation = 0;
};

/// Compares cS|psi> with (I (x) uS)|psi> for a swap of two work levels.
/// Agreement is judged up to a global phase with tolerance 1e-10.
EquivalenceReport cs_us_equivalence(const PureState& state, std::size_t level_a = 0, std::size_t level_b = 2);

struct FringeRecord {
  double phi = 0;
  double p_c0_w2 = 0;
  double p_c1_w2 = 0;
  double p_c0_w01 = 0;
  double p_c1_w01 = 0;
};

enum class FringeChannel { kC0W2, kC1W2, kC0W01, kC1W01 };

double channel_value(const FringeRecord& record, FringeChannel channel);

/// First projection fixed to 0. For every phi the branch-0 state after the
/// second controlled transposition (pre-swap work labels, as the detectors see
/// them) gets phase(phi) and a Hadamard on the control, and the four heralded
/// coincidence probabilities are read off. W(0,1) sums work levels 0 and 1.
std::vector<FringeRecord> fringe_scan(std::span<const double> phases);

/// 2 pi k / count for k < count.
std::vector<double> uniform_phases(std::size_t count);

enum class Herald { kW2, kW01 };

/// Purity of the control qubit conditioned on the work detector, at phase phi.
double heralded_control_purity(double phi, Herald herald);

/// (max - min) / (max + min) of one channel. Throws std::domain_error when
/// the channel is identically zero.
double visibility(std::span<const FringeRecord> records, FringeChannel channel);

enum class DephasingScope {
  kZeroHistory,   // offset only when every earlier bit was 0
  kAllBranches,   // offset in every branch
};

/// Trapezoidal average of the compiled distribution over `grid` evenly spaced
/// phase offsets in [phi_lo, phi_hi], added to the final round's feed-forward
/// phase. Throws unless phi_lo < phi_hi and grid >= 2.
Distribution dephased_distribution(const CompiledCircuit& circuit, double phi_lo, double phi_hi, std::size_t grid,
                                   DephasingScope scope = DephasingScope::kZeroHistory);

/// Same, on reference_circuit().
Distribution dephased_distribution(double phi_lo, double phi_hi, std::size_t grid,
                                   DephasingScope scope = DephasingScope::kZeroHistory);

/// Total-variation distance to the uniform distribution.
double distance_to_uniform(const Distribution& dist);

/// Documented JSON form (schema_version "1"); see README.
std::string circuit_to_json(const CompiledCircuit& circuit);
/// Throws std::invalid_argument on malformed input.
CompiledCircuit circuit_from_json(std::string_view text);

}  // namespace qrecycle
