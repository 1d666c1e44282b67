#include "qrecycle/qudit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qrecycle {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_site(const PureState& state, std::size_t site) {
  if (site >= state.num_sites()) {
    throw std::invalid_argument("site " + std::to_string(site) + " out of range");
  }
}

void check_qubit(const PureState& state, std::size_t site) {
  check_site(state, site);
  require(state.dim(site) == 2, "gate requires a qubit site");
}

void check_control_target(const PureState& state, std::size_t control, std::size_t target) {
  check_qubit(state, control);
  check_site(state, target);
  require(control != target, "control and target must be distinct sites");
}

void check_permutation(const LevelPermutation& perm, std::size_t dim) {
  require(perm.size() == dim, "permutation size must equal the site dimension");
  std::vector<bool> seen(dim, false);
  for (std::size_t image : perm) {
    require(image < dim && !seen[image], "permutation is not a bijection on the site levels");
    seen[image] = true;
  }
}

// Calls fn(base) for every index whose digit on `site` is 0; the fiber through
// base is base + level * stride.
template <typename Fn>
void for_each_fiber(const PureState& state, std::size_t site, Fn&& fn) {
  const std::size_t stride = state.stride(site);
  const std::size_t block = stride * state.dim(site);
  for (std::size_t outer = 0; outer < state.size(); outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) fn(outer + inner);
  }
}

void permute_fiber(std::span<Amplitude> amps, std::size_t base, std::size_t stride, const LevelPermutation& perm,
                   std::vector<Amplitude>& scratch) {
  const std::size_t d = perm.size();
  for (std::size_t l = 0; l < d; ++l) scratch[l] = amps[base + l * stride];
  for (std::size_t l = 0; l < d; ++l) amps[base + perm[l] * stride] = scratch[l];
}

LevelPermutation swap_levels(std::size_t dim, std::size_t a, std::size_t b) {
  require(a < dim && b < dim, "transposition level out of range");
  require(a != b, "transposition levels must be distinct");
  LevelPermutation perm(dim);
  for (std::size_t l = 0; l < dim; ++l) perm[l] = l;
  std::swap(perm[a], perm[b]);
  return perm;
}

PostSelection project_onto(const PureState& state, std::size_t site, const std::vector<bool>& keep) {
  PureState projected = state;
  auto amps = projected.mutable_amplitudes();
  double probability = 0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (keep[state.digit(i, site)]) {
      probability += std::norm(amps[i]);
    } else {
      amps[i] = 0;
    }
  }
  if (probability < kZeroProbability) return {0.0, std::nullopt};
  const double scale = 1.0 / std::sqrt(probability);
  for (Amplitude& a : amps) a *= scale;
  return {probability, std::move(projected)};
}

}  // namespace

PureState::PureState(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), "register needs at least one site");
  strides_.assign(dims_.size(), 1);
  std::size_t total = 1;
  for (std::size_t i = dims_.size(); i-- > 0;) {
    require(dims_[i] >= 2, "site dimension must be at least 2");
    strides_[i] = total;
    require(total <= kMaxAmplitudes / dims_[i], "register exceeds the simulator size limit");
    total *= dims_[i];
  }
  amps_.assign(total, Amplitude{0, 0});
  amps_[0] = 1;
}

PureState PureState::from_amplitudes(std::vector<std::size_t> dims, std::vector<Amplitude> amps) {
  PureState state(std::move(dims));
  require(amps.size() == state.size(), "amplitude vector length must equal the product of dims");
  double norm = 0;
  for (const Amplitude& a : amps) norm += std::norm(a);
  require(norm > kZeroProbability, "cannot normalise a zero vector");
  const double scale = 1.0 / std::sqrt(norm);
  for (Amplitude& a : amps) a *= scale;
  state.amps_ = std::move(amps);
  return state;
}

PureState PureState::from_terms(std::vector<std::size_t> dims, const std::vector<Term>& terms) {
  PureState shape(dims);
  std::vector<Amplitude> amps(shape.size(), Amplitude{0, 0});
  for (const Term& t : terms) amps[shape.index_of(t.digits)] += t.coefficient;
  return from_amplitudes(std::move(dims), std::move(amps));
}

std::size_t PureState::index_of(std::span<const std::size_t> digits) const {
  require(digits.size() == dims_.size(), "digit count must equal the number of sites");
  std::size_t index = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    require(digits[i] < dims_[i], "digit exceeds site dimension");
    index += digits[i] * strides_[i];
  }
  return index;
}

Amplitude PureState::amplitude(std::initializer_list<std::size_t> digits) const {
  return amps_[index_of(std::span<const std::size_t>(digits.begin(), digits.size()))];
}

double PureState::norm_squared() const {
  double total = 0;
  for (const Amplitude& a : amps_) total += std::norm(a);
  return total;
}

PureState new_register(std::vector<std::size_t> dims) { return PureState(std::move(dims)); }

PureState apply_unitary(PureState state, std::span<const std::size_t> sites, const ComplexMatrix& matrix) {
  require(!sites.empty(), "apply_unitary needs at least one site");
  std::size_t local_dim = 1;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    check_site(state, sites[i]);
    for (std::size_t j = 0; j < i; ++j) require(sites[i] != sites[j], "apply_unitary sites must be distinct");
    local_dim *= state.dim(sites[i]);
  }
  require(matrix.rows() == matrix.cols() && static_cast<std::size_t>(matrix.rows()) == local_dim,
          "matrix dimension must equal the product of the selected site dimensions");
  const ComplexMatrix gram = matrix.adjoint() * matrix - ComplexMatrix::Identity(matrix.rows(), matrix.cols());
  require(gram.cwiseAbs().maxCoeff() <= 1e-10, "matrix is not unitary");

  // Offsets of every local basis state relative to a base index.
  std::vector<std::size_t> offsets(local_dim, 0);
  for (std::size_t local = 0; local < local_dim; ++local) {
    std::size_t rest = local;
    for (std::size_t k = sites.size(); k-- > 0;) {
      const std::size_t d = state.dim(sites[k]);
      offsets[local] += (rest % d) * state.stride(sites[k]);
      rest /= d;
    }
  }

  auto amps = state.mutable_amplitudes();
  Eigen::VectorXcd gathered(static_cast<Eigen::Index>(local_dim));
  for (std::size_t base = 0; base < amps.size(); ++base) {
    bool is_base = true;
    for (std::size_t s : sites) is_base = is_base && state.digit(base, s) == 0;
    if (!is_base) continue;
    for (std::size_t l = 0; l < local_dim; ++l) gathered[static_cast<Eigen::Index>(l)] = amps[base + offsets[l]];
    const Eigen::VectorXcd result = matrix * gathered;
    for (std::size_t l = 0; l < local_dim; ++l) amps[base + offsets[l]] = result[static_cast<Eigen::Index>(l)];
  }
  return state;
}

PureState hadamard(PureState state, std::size_t site) {
  check_qubit(state, site);
  const double h = std::numbers::sqrt2 / 2;
  const std::size_t stride = state.stride(site);
  auto amps = state.mutable_amplitudes();
  for_each_fiber(state, site, [&](std::size_t base) {
    const Amplitude a0 = amps[base];
    const Amplitude a1 = amps[base + stride];
    amps[base] = h * (a0 + a1);
    amps[base + stride] = h * (a0 - a1);
  });
  return state;
}

PureState pauli_x(PureState state, std::size_t site) {
  check_qubit(state, site);
  const std::size_t stride = state.stride(site);
  auto amps = state.mutable_amplitudes();
  for_each_fiber(state, site, [&](std::size_t base) { std::swap(amps[base], amps[base + stride]); });
  return state;
}

PureState phase(PureState state, std::size_t site, double theta) {
  check_qubit(state, site);
  const Amplitude factor = std::polar(1.0, theta);
  const std::size_t stride = state.stride(site);
  auto amps = state.mutable_amplitudes();
  for_each_fiber(state, site, [&](std::size_t base) { amps[base + stride] *= factor; });
  return state;
}

PureState controlled_phase(PureState state, std::size_t control, std::size_t target, double theta) {
  check_control_target(state, control, target);
  require(state.dim(target) == 2, "controlled_phase target must be a qubit");
  const Amplitude factor = std::polar(1.0, theta);
  auto amps = state.mutable_amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (state.digit(i, control) == 1 && state.digit(i, target) == 1) amps[i] *= factor;
  }
  return state;
}

PureState permutation(PureState state, std::size_t site, const LevelPermutation& perm) {
  check_site(state, site);
  check_permutation(perm, state.dim(site));
  const std::size_t stride = state.stride(site);
  auto amps = state.mutable_amplitudes();
  std::vector<Amplitude> scratch(perm.size());
  for_each_fiber(state, site, [&](std::size_t base) { permute_fiber(amps, base, stride, perm, scratch); });
  return state;
}

PureState controlled_permutation(PureState state, std::size_t control, std::size_t target,
                                 const LevelPermutation& perm) {
  check_control_target(state, control, target);
  check_permutation(perm, state.dim(target));
  const std::size_t stride = state.stride(target);
  auto amps = state.mutable_amplitudes();
  std::vector<Amplitude> scratch(perm.size());
  for_each_fiber(state, target, [&](std::size_t base) {
    if (state.digit(base, control) == 1) permute_fiber(amps, base, stride, perm, scratch);
  });
  return state;
}

PureState transposition(PureState state, std::size_t site, std::size_t level_a, std::size_t level_b) {
  check_site(state, site);
  const LevelPermutation perm = swap_levels(state.dim(site), level_a, level_b);
  return permutation(std::move(state), site, perm);
}

PureState controlled_transposition(PureState state, std::size_t control, std::size_t target, std::size_t level_a,
                                   std::size_t level_b) {
  check_control_target(state, control, target);
  const LevelPermutation perm = swap_levels(state.dim(target), level_a, level_b);
  return controlled_permutation(std::move(state), control, target, perm);
}

std::vector<double> marginal_probabilities(const PureState& state, std::size_t site) {
  check_site(state, site);
  std::vector<double> probs(state.dim(site), 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) probs[state.digit(i, site)] += std::norm(amps[i]);
  return probs;
}

std::vector<MeasurementBranch> measure_site(const PureState& state, std::size_t site) {
  check_site(state, site);
  std::vector<MeasurementBranch> branches;
  for (std::size_t level = 0; level < state.dim(site); ++level) {
    PostSelection p = post_select(state, site, level);
    if (!p.state) continue;
    branches.push_back({{level}, p.probability, std::move(*p.state)});
  }
  return branches;
}

PostSelection post_select(const PureState& state, std::size_t site, std::size_t level) {
  check_site(state, site);
  require(level < state.dim(site), "post_select level out of range");
  std::vector<bool> keep(state.dim(site), false);
  keep[level] = true;
  return project_onto(state, site, keep);
}

PostSelection project_levels(const PureState& state, std::size_t site, std::span<const std::size_t> levels) {
  check_site(state, site);
  std::vector<bool> keep(state.dim(site), false);
  for (std::size_t l : levels) {
    require(l < state.dim(site), "projection level out of range");
    keep[l] = true;
  }
  return project_onto(state, site, keep);
}

DensityMatrix reduced_density(const PureState& state, std::size_t site) {
  check_site(state, site);
  const std::size_t d = state.dim(site);
  const std::size_t stride = state.stride(site);
  const auto amps = state.amplitudes();
  ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for_each_fiber(state, site, [&](std::size_t base) {
    for (std::size_t a = 0; a < d; ++a) {
      const Amplitude ua = amps[base + a * stride];
      if (ua == Amplitude{0, 0}) continue;
      for (std::size_t b = 0; b < d; ++b) {
        rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += ua * std::conj(amps[base + b * stride]);
      }
    }
  });
  return {std::move(rho)};
}

double max_deviation(const PureState& a, const PureState& b) {
  require(a.dims() == b.dims(), "states have different register shapes");
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.amplitudes()[i] - b.amplitudes()[i]));
  return worst;
}

double max_deviation_up_to_global_phase(const PureState& a, const PureState& b) {
  require(a.dims() == b.dims(), "states have different register shapes");
  Amplitude overlap{0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) overlap += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
  const Amplitude align = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Amplitude{1, 0};
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(align * a.amplitudes()[i] - b.amplitudes()[i]));
  }
  return worst;
}

}  // namespace qrecycle
