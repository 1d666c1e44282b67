// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrecycle/cli.hpp"
#include "qrecycle/compiled_circuits.hpp"
#include "qrecycle/number_theory.hpp"
#include "qrecycle/order_finding.hpp"

using namespace qrecycle;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

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

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Outcome compiled_distribution() {
  const auto start = std::chrono::steady_clock::now();
  const Distribution d = run_compiled(reference_circuit());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double want[] = {0.375, 0.25, 0.125, 0.25};
  double dev = 0;
  for (std::size_t y = 0; y < 4; ++y) dev = std::max(dev, std::abs(d[y] - want[y]));
  return {dev < 1e-12 && secs < 1.0, "max deviation " + sci(dev) + ", " + sci(secs) + " s"};
}

Outcome path_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t instances = 0;
  double worst = 0;
  for (std::uint64_t n : valid_moduli(64)) {
    for (std::uint64_t x = 2; x < n; ++x) {
      if (std::gcd(x, n) != 1) continue;
      const auto inst = FactoringInstance::make(n, x);
      for (unsigned bits = 1; bits <= 8; ++bits) {
        const auto spec = build_spec(inst, bits);
        const Distribution theory = theoretical_distribution(spec.order, bits);
        worst = std::max(worst, max_abs_difference(run_standard(spec), theory));
        worst = std::max(worst, max_abs_difference(run_recycled(spec), theory));
        worst = std::max(worst, max_abs_difference(run_compiled(compile(inst, bits, {.reduce = false})), theory));
        ++instances;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-10 && secs < 300,
          std::to_string(instances) + " instances, max deviation " + sci(worst) + ", " + sci(secs) + " s"};
}

Outcome checkpoint_states() {
  double worst = 0;
  for (std::size_t branch : {0u, 1u}) {
    const auto got = stage_states(branch);
    const auto want = reference_states(branch);
    for (std::size_t k = 0; k < got.size(); ++k) {
      worst = std::max(worst, max_deviation_up_to_global_phase(got[k], want[k]));
    }
  }
  return {worst < 1e-12, "8 checkpoints, max deviation " + sci(worst)};
}

Outcome interference() {
  const Distribution d = run_compiled(reference_circuit());
  const double a = std::abs(d[0] - 3 * d[2]);
  const double b = std::abs(d[1] - d[3]);
  return {a < 1e-12 && b < 1e-12, "|P00 - 3 P10| = " + sci(a) + ", |P01 - P11| = " + sci(b)};
}

Outcome fringe() {
  const auto records = fringe_scan(uniform_phases(16));
  double curve = 0, flat = 0, purity = 0;
  for (const FringeRecord& r : records) {
    curve = std::max({curve, std::abs(r.p_c0_w2 - (1 + std::cos(r.phi)) / 4),
                      std::abs(r.p_c1_w2 - (1 - std::cos(r.phi)) / 4)});
    flat = std::max({flat, std::abs(r.p_c0_w01 - 0.25), std::abs(r.p_c1_w01 - 0.25)});
    purity = std::max({purity, std::abs(heralded_control_purity(r.phi, Herald::kW2) - 1.0),
                       std::abs(heralded_control_purity(r.phi, Herald::kW01) - 0.5)});
  }
  const double vis = std::max(std::abs(visibility(records, FringeChannel::kC0W2) - 1),
                              std::abs(visibility(records, FringeChannel::kC1W2) - 1));
  return {vis < 1e-10 && curve < 1e-12 && flat < 1e-12 && purity < 1e-12,
          "visibility error " + sci(vis) + ", curve " + sci(curve) + ", flat " + sci(flat) + ", purity " +
              sci(purity)};
}

Outcome decoherence() {
  const double half = distance_to_uniform(dephased_distribution(0, std::numbers::pi, 128));
  const double full = distance_to_uniform(dephased_distribution(0, 2 * std::numbers::pi, 128));
  return {half < 1e-3 && full < 1e-10, "TV [0,pi] " + sci(half) + ", TV [0,2pi] " + sci(full)};
}

Outcome end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  int found = 0, wrong = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::ostringstream out, err;
    const int code = run_cli({"factor", "21", "--coprime", "4", "--bits", "8", "--seed", std::to_string(seed)},
                             out, err);
    const auto report = nlohmann::ordered_json::parse(out.str());
    const auto& factors = report["result"]["factors"];
    if (code == kExitOk && factors == nlohmann::ordered_json{3, 7}) {
      ++found;
    } else if (!factors.is_null()) {
      ++wrong;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {found >= 90 && wrong == 0 && secs < 10,
          std::to_string(found) + "/100 seeds factored, " + std::to_string(wrong) + " wrong, " + sci(secs) + " s"};
}

Outcome order_recovery() {
  std::size_t cases = 0, misses = 0;
  for (std::uint64_t n : valid_moduli(64)) {
    const unsigned bits = default_control_bits(n);
    const double scale = std::ldexp(1.0, static_cast<int>(bits));
    for (std::uint64_t x = 2; x < n; ++x) {
      if (std::gcd(x, n) != 1) continue;
      const auto inst = FactoringInstance::make(n, x);
      const std::uint64_t r = multiplicative_order(x, n);
      for (std::uint64_t k = 0; k < r; ++k) {
        if (std::gcd(k, r) != 1) continue;
        const double peak = static_cast<double>(k) * scale / static_cast<double>(r);
        const auto y = static_cast<std::uint64_t>(std::llround(peak));
        ++cases;
        if (recover_order(y, bits, inst) != r) ++misses;
      }
    }
  }
  return {misses == 0, std::to_string(cases) + " cases, " + std::to_string(misses) + " misses"};
}

Outcome first_iteration() {
  const auto spec = build_spec(FactoringInstance::make(21, 4), 2);
  double p0 = 0;
  for (const auto& b : recycled_branches(spec, 1)) {
    if (b.bits.at(0) == 0) p0 += b.probability;
  }
  const double dev = std::abs(p0 - 0.5);
  return {dev < 1e-12, "|P(m1=0) - 1/2| = " + sci(dev)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"compiled two-bit distribution for N=21, x=4", compiled_distribution},
      {"standard, recycled, unreduced compiled and closed form agree", path_equivalence},
      {"checkpoint states match reference kets", checkpoint_states},
      {"P(00) = 3 P(10) and P(01) = P(11)", interference},
      {"16-phase fringe scan", fringe},
      {"dephased distribution approaches uniform", decoherence},
      {"factor 21 --coprime 4 --bits 8 over seeds 0..99", end_to_end},
      {"order recovery from exact peaks, N <= 64", order_recovery},
      {"first recycled measurement is uniform for N=21", first_iteration},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s %zu %s (%s)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
