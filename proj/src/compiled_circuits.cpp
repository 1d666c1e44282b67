#include "qrecycle/compiled_circuits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace qrecycle {

namespace {

using ordered_json = nlohmann::ordered_json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t history_index(std::span<const std::size_t> bits) {
  std::size_t index = 0;
  for (std::size_t l = 0; l < bits.size(); ++l) index |= bits[l] << l;
  return index;
}

PureState reset_control(PureState state) {
  const auto p = marginal_probabilities(state, kControlSite);
  if (p[1] < kZeroProbability) return state;
  if (p[0] < kZeroProbability) return pauli_x(std::move(state), kControlSite);
  throw std::invalid_argument("reset requires the control qubit in a basis state");
}

// Applies one non-branching op; returns false for Project/Measure.
bool apply_gate(const CircuitOp& op, PureState& state, std::span<const std::size_t> bits, const PhaseOffset& offset) {
  return std::visit(
      Overloaded{
          [&](const op::Hadamard&) {
            state = hadamard(std::move(state), kControlSite);
            return true;
          },
          [&](const op::Phase& p) {
            state = phase(std::move(state), kControlSite, p.theta);
            return true;
          },
          [&](const op::FeedForwardPhase& f) {
            if (f.iteration != bits.size() + 1) throw std::invalid_argument("feed-forward op out of sequence");
            double theta = -feedforward_phase(bits, f.iteration);
            if (!f.compensation.empty()) theta += f.compensation.at(history_index(bits));
            if (offset) theta += offset(bits, f.iteration);
            state = phase(std::move(state), kControlSite, theta);
            return true;
          },
          [&](const op::ControlledTransposition& t) {
            state = controlled_transposition(std::move(state), kControlSite, kWorkSite, t.level_a, t.level_b);
            return true;
          },
          [&](const op::Transposition& t) {
            state = transposition(std::move(state), kWorkSite, t.level_a, t.level_b);
            return true;
          },
          [&](const op::ControlledPermutation& p) {
            state = controlled_permutation(std::move(state), kControlSite, kWorkSite, p.perm);
            return true;
          },
          [&](const op::Reset&) {
            state = reset_control(std::move(state));
            return true;
          },
          [](const op::Project&) { return false; },
          [](const op::Measure&) { return false; },
      },
      op);
}

std::optional<std::size_t> fixed_level(const CircuitOp& op) {
  if (const auto* p = std::get_if<op::Project>(&op)) return p->level;
  return std::nullopt;
}

// Depth-first over every measurement outcome; visit(bits, probability, state)
// is called for each surviving branch when op index `stop` is reached.
template <typename Visit>
void walk(const CompiledCircuit& c, std::size_t index, std::size_t stop, PureState state,
          std::vector<std::size_t>& bits, double probability, const PhaseOffset& offset, Visit& visit) {
  for (; index < stop; ++index) {
    const CircuitOp& op = c.ops[index];
    if (apply_gate(op, state, bits, offset)) continue;
    if (const auto level = fixed_level(op)) {
      PostSelection p = post_select(state, kControlSite, *level);
      if (!p.state) return;
      probability *= p.probability;
      state = std::move(*p.state);
      bits.push_back(*level);
      walk(c, index + 1, stop, std::move(state), bits, probability, offset, visit);
      bits.pop_back();
      return;
    }
    for (MeasurementBranch& branch : measure_site(state, kControlSite)) {
      bits.push_back(branch.bits.front());
      walk(c, index + 1, stop, std::move(branch.state), bits, probability * branch.probability, offset, visit);
      bits.pop_back();
    }
    return;
  }
  visit(std::span<const std::size_t>(bits), probability, state);
}

PureState initial_state(const CompiledCircuit& c) {
  if (c.work_dim < 2) throw std::invalid_argument("work qudit needs dimension at least 2");
  return PureState({2, c.work_dim});
}

// Transpositions realising j -> j + shift (mod r): each cycle (c0 c1 ... ck)
// becomes swaps (c0,c1), (c0,c2), ..., (c0,ck).
std::vector<op::ControlledTransposition> shift_transpositions(std::size_t order, std::size_t shift) {
  std::vector<op::ControlledTransposition> out;
  std::vector<bool> seen(order, false);
  for (std::size_t start = 0; start < order; ++start) {
    if (seen[start]) continue;
    seen[start] = true;
    for (std::size_t next = (start + shift) % order; next != start; next = (next + shift) % order) {
      seen[next] = true;
      out.push_back({start, next});
    }
  }
  return out;
}

// Replaces the final controlled transposition of the last round by an
// uncontrolled one when every reachable branch certifies it.
void elide_trailing_swap(CompiledCircuit& c) {
  std::optional<std::size_t> feed_forward;
  for (std::size_t i = c.ops.size(); i-- > 0;) {
    if (std::holds_alternative<op::FeedForwardPhase>(c.ops[i])) {
      feed_forward = i;
      break;
    }
  }
  if (!feed_forward || *feed_forward == 0) return;
  const std::size_t swap_index = *feed_forward - 1;
  const auto* swap = std::get_if<op::ControlledTransposition>(&c.ops[swap_index]);
  if (!swap) return;

  std::vector<double> compensation(std::size_t{1} << (c.bits - 1), 0.0);
  bool certified = true;
  auto check = [&](std::span<const std::size_t> bits, double, const PureState& state) {
    const EquivalenceReport report = cs_us_equivalence(state, swap->level_a, swap->level_b);
    if (report.relation == Equivalence::kNeither) certified = false;
    if (report.relation == Equivalence::kControlPhaseFlip) compensation[history_index(bits)] = std::numbers::pi;
  };
  std::vector<std::size_t> bits;
  walk(c, 0, swap_index, initial_state(c), bits, 1.0, PhaseOffset{}, check);
  if (!certified) return;

  c.ops[swap_index] = op::Transposition{swap->level_a, swap->level_b};
  auto& ff = std::get<op::FeedForwardPhase>(c.ops[*feed_forward]);
  if (std::any_of(compensation.begin(), compensation.end(), [](double v) { return v != 0; })) {
    ff.compensation = std::move(compensation);
  }
}

PureState evolve_fringe(double phi) {
  PureState s = stage_states(0).at(1);
  s = phase(std::move(s), kControlSite, phi);
  return hadamard(std::move(s), kControlSite);
}

}  // namespace

CompiledCircuit compile(const FactoringInstance& instance, unsigned bits, CompileOptions options) {
  const OrderFindingSpec spec = build_spec(instance, bits);
  if (spec.order < 2) throw std::invalid_argument("order 1 leaves nothing to find");
  CompiledCircuit c;
  c.bits = bits;
  c.work_dim = spec.order;
  c.reduced = options.reduce;
  (void)initial_state(c);  // size check

  for (unsigned j = 1; j <= bits; ++j) {
    if (j > 1) c.ops.emplace_back(op::Reset{});
    c.ops.emplace_back(op::Hadamard{});
    const std::size_t shift = mod_pow(2, bits - j, spec.order);
    if (j == 1 && options.reduce) {
      // The work register is still |0>, so U^s only has to move level 0.
      if (shift != 0) c.ops.emplace_back(op::ControlledTransposition{0, shift});
    } else {
      for (const auto& t : shift_transpositions(spec.order, shift)) c.ops.emplace_back(t);
    }
    c.ops.emplace_back(op::FeedForwardPhase{j, {}});
    c.ops.emplace_back(op::Hadamard{});
    if (j < bits) {
      c.ops.emplace_back(op::Project{});
    } else {
      c.ops.emplace_back(op::Measure{});
    }
  }
  if (options.reduce && bits >= 2) elide_trailing_swap(c);
  return c;
}

CompiledCircuit reference_circuit() { return compile(FactoringInstance::make(21, 4), 2); }

Distribution run_compiled(const CompiledCircuit& circuit, const PhaseOffset& offset) {
  if (circuit.bits < 1 || circuit.bits > kMaxControlBits) throw std::invalid_argument("bad circuit width");
  std::vector<double> probs(std::size_t{1} << circuit.bits, 0.0);
  auto accumulate = [&](std::span<const std::size_t> bits, double probability, const PureState&) {
    if (bits.size() != circuit.bits) throw std::invalid_argument("circuit measures the wrong number of bits");
    probs[history_index(bits)] += probability;
  };
  std::vector<std::size_t> bits;
  walk(circuit, 0, circuit.ops.size(), initial_state(circuit), bits, 1.0, offset, accumulate);
  return Distribution(circuit.bits, std::move(probs));
}

std::vector<PureState> trace_branch(const CompiledCircuit& circuit, std::span<const std::size_t> outcomes) {
  std::vector<PureState> states{initial_state(circuit)};
  std::vector<std::size_t> bits;
  for (const CircuitOp& op : circuit.ops) {
    PureState state = states.back();
    if (!apply_gate(op, state, bits, PhaseOffset{})) {
      if (bits.size() == outcomes.size()) break;
      const std::size_t level = outcomes[bits.size()];
      if (const auto fixed = fixed_level(op); fixed && *fixed != level) {
        throw std::invalid_argument("outcome record contradicts a fixed projection");
      }
      PostSelection p = post_select(state, kControlSite, level);
      if (!p.state) throw std::invalid_argument("outcome record has probability zero");
      state = std::move(*p.state);
      bits.push_back(level);
    }
    states.push_back(std::move(state));
  }
  return states;
}

std::vector<PureState> stage_states(std::size_t branch_bit) {
  if (branch_bit > 1) throw std::invalid_argument("branch bit must be 0 or 1");
  const CompiledCircuit c = reference_circuit();
  const std::size_t outcome[] = {branch_bit};
  const std::vector<PureState> states = trace_branch(c, outcome);

  auto position = [&](auto predicate) {
    const auto it = std::find_if(c.ops.begin(), c.ops.end(), predicate);
    return static_cast<std::size_t>(it - c.ops.begin());
  };
  const std::size_t project = position([](const CircuitOp& o) { return std::holds_alternative<op::Project>(o); });
  const std::size_t swap = position([](const CircuitOp& o) { return std::holds_alternative<op::Transposition>(o); });
  const std::size_t measure = position([](const CircuitOp& o) { return std::holds_alternative<op::Measure>(o); });
  // states[k] is the state before op k.
  return {states.at(project), states.at(swap), states.at(swap + 1), states.at(measure)};
}

std::vector<PureState> reference_states(std::size_t branch_bit) {
  if (branch_bit > 1) throw std::invalid_argument("branch bit must be 0 or 1");
  const std::vector<std::size_t> dims{2, 3};
  const Amplitude i{0, 1};
  std::vector<PureState> out;
  // |c,w>_1 = |0>(|0>+|2>) + |1>(|0>-|2>)
  out.push_back(PureState::from_terms(dims, {{1, {0, 0}}, {1, {0, 2}}, {1, {1, 0}}, {-1, {1, 2}}}));
  if (branch_bit == 0) {
    out.push_back(PureState::from_terms(dims, {{1, {0, 0}}, {1, {1, 1}}, {1, {0, 2}}, {1, {1, 2}}}));
    out.push_back(PureState::from_terms(dims, {{1, {0, 0}}, {1, {1, 0}}, {1, {1, 1}}, {1, {0, 2}}}));
    out.push_back(PureState::from_terms(
        dims, {{1, {0, 0}}, {1, {0, 0}}, {1, {0, 1}}, {1, {0, 2}}, {1, {1, 0}}, {-1, {1, 0}}, {-1, {1, 1}}, {1, {1, 2}}}));
  } else {
    out.push_back(PureState::from_terms(dims, {{1, {0, 0}}, {1, {1, 1}}, {-1, {0, 2}}, {-1, {1, 2}}}));
    out.push_back(PureState::from_terms(dims, {{1, {0, 0}}, {-1, {1, 1}}, {-1, {0, 2}}, {1, {1, 0}}}));
    out.push_back(PureState::from_terms(
        dims, {{1, {0, 0}}, {-i, {0, 0}}, {i, {0, 1}}, {-1, {0, 2}}, {1, {1, 0}}, {i, {1, 0}}, {-i, {1, 1}}, {-1, {1, 2}}}));
  }
  return out;
}

std::string to_string(Equivalence e) {
  switch (e) {
    case Equivalence::kIdentity: return "identity";
    case Equivalence::kControlPhaseFlip: return "control_phase_flip";
    case Equivalence::kNeither: break;
  }
  return "neither";
}

EquivalenceReport cs_us_equivalence(const PureState& state, std::size_t level_a, std::size_t level_b) {
  if (state.num_sites() != 2 || state.dim(kControlSite) != 2) {
    throw std::invalid_argument("cs_us_equivalence expects a control qubit and one work qudit");
  }
  constexpr double kTolerance = 1e-10;
  const PureState controlled = controlled_transposition(state, kControlSite, kWorkSite, level_a, level_b);
  const PureState uncontrolled = transposition(state, kWorkSite, level_a, level_b);
  const double identity = max_deviation_up_to_global_phase(uncontrolled, controlled);
  if (identity < kTolerance) return {Equivalence::kIdentity, identity};
  const double flipped =
      max_deviation_up_to_global_phase(phase(uncontrolled, kControlSite, std::numbers::pi), controlled);
  if (flipped < kTolerance) return {Equivalence::kControlPhaseFlip, flipped};
  return {Equivalence::kNeither, std::min(identity, flipped)};
}

double channel_value(const FringeRecord& record, FringeChannel channel) {
  switch (channel) {
    case FringeChannel::kC0W2: return record.p_c0_w2;
    case FringeChannel::kC1W2: return record.p_c1_w2;
    case FringeChannel::kC0W01: return record.p_c0_w01;
    case FringeChannel::kC1W01: return record.p_c1_w01;
  }
  throw std::invalid_argument("unknown fringe channel");
}

std::vector<FringeRecord> fringe_scan(std::span<const double> phases) {
  std::vector<FringeRecord> out;
  out.reserve(phases.size());
  for (double phi : phases) {
    const PureState s = evolve_fringe(phi);
    auto p = [&](std::size_t c, std::size_t w) { return std::norm(s.amplitude({c, w})); };
    out.push_back({phi, p(0, 2), p(1, 2), p(0, 0) + p(0, 1), p(1, 0) + p(1, 1)});
  }
  return out;
}

std::vector<double> uniform_phases(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
  return out;
}

double heralded_control_purity(double phi, Herald herald) {
  static constexpr std::size_t kW2[] = {2};
  static constexpr std::size_t kW01[] = {0, 1};
  const PureState s = evolve_fringe(phi);
  const PostSelection heralded =
      herald == Herald::kW2 ? project_levels(s, kWorkSite, kW2) : project_levels(s, kWorkSite, kW01);
  if (!heralded.state) throw std::domain_error("herald has zero probability");
  return reduced_density(*heralded.state, kControlSite).purity();
}

double visibility(std::span<const FringeRecord> records, FringeChannel channel) {
  if (records.empty()) throw std::invalid_argument("visibility needs at least one record");
  double lo = channel_value(records.front(), channel);
  double hi = lo;
  for (const FringeRecord& r : records) {
    lo = std::min(lo, channel_value(r, channel));
    hi = std::max(hi, channel_value(r, channel));
  }
  if (hi + lo <= 0) throw std::domain_error("visibility undefined for an all-zero channel");
  return (hi - lo) / (hi + lo);
}

Distribution dephased_distribution(const CompiledCircuit& circuit, double phi_lo, double phi_hi, std::size_t grid,
                                   DephasingScope scope) {
  if (!(phi_lo < phi_hi)) throw std::invalid_argument("dephasing interval needs phi_lo < phi_hi");
  if (grid < 2) throw std::invalid_argument("dephasing grid needs at least 2 points");
  std::vector<double> acc(std::size_t{1} << circuit.bits, 0.0);
  double weight_total = 0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double delta = phi_lo + (phi_hi - phi_lo) * static_cast<double>(k) / static_cast<double>(grid - 1);
    const double weight = (k == 0 || k + 1 == grid) ? 0.5 : 1.0;
    const PhaseOffset offset = [&](std::span<const std::size_t> bits, unsigned iteration) {
      if (iteration != circuit.bits) return 0.0;
      const bool zero_history = std::all_of(bits.begin(), bits.end(), [](std::size_t b) { return b == 0; });
      return (scope == DephasingScope::kAllBranches || zero_history) ? delta : 0.0;
    };
    const Distribution d = run_compiled(circuit, offset);
    for (std::size_t y = 0; y < acc.size(); ++y) acc[y] += weight * d[y];
    weight_total += weight;
  }
  for (double& p : acc) p /= weight_total;
  return Distribution(circuit.bits, std::move(acc));
}

Distribution dephased_distribution(double phi_lo, double phi_hi, std::size_t grid, DephasingScope scope) {
  return dephased_distribution(reference_circuit(), phi_lo, phi_hi, grid, scope);
}

double distance_to_uniform(const Distribution& dist) {
  const double u = 1.0 / static_cast<double>(dist.size());
  double total = 0;
  for (double p : dist.probabilities()) total += std::abs(p - u);
  return total / 2;
}

std::string circuit_to_json(const CompiledCircuit& circuit) {
  ordered_json ops = ordered_json::array();
  for (const CircuitOp& o : circuit.ops) {
    ops.push_back(std::visit(
        Overloaded{
            [](const op::Hadamard&) { return ordered_json{{"op", "hadamard"}, {"site", kControlSite}}; },
            [](const op::Phase& p) { return ordered_json{{"op", "phase"}, {"site", kControlSite}, {"theta", p.theta}}; },
            [](const op::FeedForwardPhase& f) {
              return ordered_json{{"op", "feedforward_phase"},
                                  {"site", kControlSite},
                                  {"iteration", f.iteration},
                                  {"compensation", f.compensation}};
            },
            [](const op::ControlledTransposition& t) {
              return ordered_json{{"op", "controlled_transposition"},
                                  {"control", kControlSite},
                                  {"target", kWorkSite},
                                  {"levels", {t.level_a, t.level_b}}};
            },
            [](const op::Transposition& t) {
              return ordered_json{{"op", "transposition"}, {"site", kWorkSite}, {"levels", {t.level_a, t.level_b}}};
            },
            [](const op::ControlledPermutation& p) {
              return ordered_json{
                  {"op", "controlled_permutation"}, {"control", kControlSite}, {"target", kWorkSite}, {"perm", p.perm}};
            },
            [](const op::Project& p) {
              ordered_json j{{"op", "project"}, {"site", kControlSite}};
              if (p.level) j["level"] = *p.level;
              return j;
            },
            [](const op::Measure&) { return ordered_json{{"op", "measure"}, {"site", kControlSite}}; },
            [](const op::Reset&) { return ordered_json{{"op", "reset"}, {"site", kControlSite}}; },
        },
        o));
  }
  ordered_json doc{{"schema_version", "1"},
                   {"bits", circuit.bits},
                   {"work_dim", circuit.work_dim},
                   {"reduced", circuit.reduced},
                   {"sites", {{"control", kControlSite}, {"work", kWorkSite}}},
                   {"ops", std::move(ops)}};
  return doc.dump(2);
}

CompiledCircuit circuit_from_json(std::string_view text) {
  try {
    const ordered_json doc = ordered_json::parse(text);
    if (doc.at("schema_version").get<std::string>() != "1") throw std::invalid_argument("unsupported schema_version");
    CompiledCircuit c;
    c.bits = doc.at("bits").get<unsigned>();
    c.work_dim = doc.at("work_dim").get<std::size_t>();
    c.reduced = doc.at("reduced").get<bool>();
    for (const ordered_json& j : doc.at("ops")) {
      const std::string name = j.at("op").get<std::string>();
      if (name == "hadamard") {
        c.ops.emplace_back(op::Hadamard{});
      } else if (name == "phase") {
        c.ops.emplace_back(op::Phase{j.at("theta").get<double>()});
      } else if (name == "feedforward_phase") {
        c.ops.emplace_back(
            op::FeedForwardPhase{j.at("iteration").get<unsigned>(), j.at("compensation").get<std::vector<double>>()});
      } else if (name == "controlled_transposition" || name == "transposition") {
        const auto levels = j.at("levels").get<std::vector<std::size_t>>();
        if (levels.size() != 2) throw std::invalid_argument("transposition needs two levels");
        if (name == "transposition") {
          c.ops.emplace_back(op::Transposition{levels[0], levels[1]});
        } else {
          c.ops.emplace_back(op::ControlledTransposition{levels[0], levels[1]});
        }
      } else if (name == "controlled_permutation") {
        c.ops.emplace_back(op::ControlledPermutation{j.at("perm").get<LevelPermutation>()});
      } else if (name == "project") {
        op::Project p;
        if (j.contains("level")) p.level = j.at("level").get<std::size_t>();
        c.ops.emplace_back(p);
      } else if (name == "measure") {
        c.ops.emplace_back(op::Measure{});
      } else if (name == "reset") {
        c.ops.emplace_back(op::Reset{});
      } else {
        throw std::invalid_argument("unknown op '" + name + "'");
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed circuit JSON: ") + e.what());
  }
}

}  // namespace qrecycle
