#include "qrecycle/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrecycle/compiled_circuits.hpp"
#include "qrecycle/number_theory.hpp"
#include "qrecycle/order_finding.hpp"

namespace qrecycle {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kSchemaVersion = "1";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_json(std::ostream& out, const ordered_json& command, ordered_json result) {
  const ordered_json report{{"schema_version", kSchemaVersion}, {"command", command}, {"result", std::move(result)}};
  out << report.dump(2) << "\n";
}

ordered_json distribution_json(const Distribution& d) {
  ordered_json outcomes = ordered_json::array();
  for (std::size_t y = 0; y < d.size(); ++y) {
    outcomes.push_back({{"y", y}, {"label", d.label(y)}, {"probability", d[y]}});
  }
  return outcomes;
}

void emit_distribution_csv(std::ostream& out, const Distribution& d) {
  out << "y,label,probability\n";
  for (std::size_t y = 0; y < d.size(); ++y) out << y << "," << d.label(y) << "," << fmt17(d[y]) << "\n";
}

struct FactorArgs {
  std::uint64_t modulus = 0;
  std::optional<std::uint64_t> coprime;
  std::optional<unsigned> bits;
  std::string mode = "recycled";
  std::uint64_t seed = 0;
  std::string format = "json";
};

int cmd_factor(const FactorArgs& a, std::ostream& out) {
  FactorRequest req;
  req.modulus = a.modulus;
  req.mode = path_mode_from_string(a.mode);
  req.coprime = a.coprime;
  req.bits = a.bits;
  req.seed = a.seed;
  const FactorReport rep = factor_pipeline(req);

  if (a.format == "csv") {
    std::string samples;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) samples += (i ? ";" : "") + std::to_string(rep.samples[i]);
    out << "field,value\n";
    out << "N," << rep.modulus << "\n";
    out << "coprime," << rep.coprime << "\n";
    out << "bits," << rep.bits << "\n";
    out << "mode," << to_string(rep.mode) << "\n";
    out << "seed," << rep.seed << "\n";
    out << "samples," << samples << "\n";
    out << "order," << (rep.order ? std::to_string(*rep.order) : "") << "\n";
    out << "factor_1," << (rep.factors ? std::to_string(rep.factors->first) : "") << "\n";
    out << "factor_2," << (rep.factors ? std::to_string(rep.factors->second) : "") << "\n";
    out << "status," << rep.status << "\n";
  } else {
    const ordered_json command{{"name", "factor"},
                               {"N", a.modulus},
                               {"coprime", a.coprime ? ordered_json(*a.coprime) : ordered_json(nullptr)},
                               {"bits", rep.bits},
                               {"mode", to_string(rep.mode)},
                               {"seed", rep.seed},
                               {"format", a.format}};
    ordered_json result{{"coprime", rep.coprime},
                        {"coprimes_tried", rep.coprimes_tried},
                        {"bits", rep.bits},
                        {"samples", rep.samples},
                        {"order", rep.order ? ordered_json(*rep.order) : ordered_json(nullptr)},
                        {"factors", rep.factors ? ordered_json{rep.factors->first, rep.factors->second}
                                                : ordered_json(nullptr)},
                        {"status", rep.status}};
    emit_json(out, command, std::move(result));
  }
  return rep.success() ? kExitOk : kExitAlgorithmFailed;
}

struct DistributionArgs {
  std::uint64_t modulus = 0;
  std::uint64_t coprime = 0;
  unsigned bits = 0;
  std::string mode = "recycled";
  bool unreduced = false;
  std::string format = "json";
};

int cmd_distribution(const DistributionArgs& a, std::ostream& out) {
  const FactoringInstance inst = FactoringInstance::make(a.modulus, a.coprime);
  const OrderFindingSpec spec = build_spec(inst, a.bits);
  std::optional<Distribution> d;
  if (a.mode == "standard") {
    d = run_standard(spec);
  } else if (a.mode == "recycled") {
    d = run_recycled(spec);
  } else if (a.mode == "compiled") {
    d = run_compiled(compile(inst, a.bits, CompileOptions{.reduce = !a.unreduced}));
  } else {
    d = theoretical_distribution(spec.order, a.bits);
  }
  if (a.format == "csv") {
    emit_distribution_csv(out, *d);
  } else {
    ordered_json command{{"name", "distribution"}, {"N", a.modulus}, {"coprime", a.coprime}, {"bits", a.bits},
                         {"mode", a.mode},         {"unreduced", a.unreduced}, {"format", a.format}};
    emit_json(out, command, {{"order", spec.order}, {"orbit", spec.orbit}, {"outcomes", distribution_json(*d)}});
  }
  return kExitOk;
}

struct FringeArgs {
  std::size_t count = 16;
  std::vector<std::string> phase_list;
  std::string format = "csv";
};

int cmd_fringe(const FringeArgs& a, std::ostream& out) {
  std::vector<double> phases;
  if (!a.phase_list.empty()) {
    for (const std::string& s : a.phase_list) phases.push_back(parse_angle(s));
  } else {
    if (a.count < 2) throw std::invalid_argument("--phases needs at least 2 settings");
    phases = uniform_phases(a.count);
  }
  const std::vector<FringeRecord> records = fringe_scan(phases);
  if (a.format == "csv") {
    out << "phi,p_c0_w2,p_c1_w2,p_c0_w01,p_c1_w01\n";
    for (const FringeRecord& r : records) {
      out << fmt17(r.phi) << "," << fmt17(r.p_c0_w2) << "," << fmt17(r.p_c1_w2) << "," << fmt17(r.p_c0_w01) << ","
          << fmt17(r.p_c1_w01) << "\n";
    }
    return kExitOk;
  }
  ordered_json rows = ordered_json::array();
  for (const FringeRecord& r : records) {
    rows.push_back({{"phi", r.phi},
                    {"p_c0_w2", r.p_c0_w2},
                    {"p_c1_w2", r.p_c1_w2},
                    {"p_c0_w01", r.p_c0_w01},
                    {"p_c1_w01", r.p_c1_w01}});
  }
  ordered_json vis = ordered_json::object();
  const std::pair<const char*, FringeChannel> channels[] = {{"p_c0_w2", FringeChannel::kC0W2},
                                                            {"p_c1_w2", FringeChannel::kC1W2},
                                                            {"p_c0_w01", FringeChannel::kC0W01},
                                                            {"p_c1_w01", FringeChannel::kC1W01}};
  for (const auto& [name, ch] : channels) {
    try {
      vis[name] = visibility(records, ch);
    } catch (const std::domain_error&) {
      vis[name] = nullptr;
    }
  }
  ordered_json command{{"name", "fringe"}, {"phases", phases}, {"format", a.format}};
  emit_json(out, command, {{"records", std::move(rows)}, {"visibility", std::move(vis)}});
  return kExitOk;
}

struct DecohereArgs {
  std::string from = "0";
  std::string to = "pi";
  std::size_t grid = 128;
  std::string scope = "zero-history";
  std::string format = "json";
};

int cmd_decohere(const DecohereArgs& a, std::ostream& out) {
  const double lo = parse_angle(a.from);
  const double hi = parse_angle(a.to);
  const DephasingScope scope = a.scope == "all" ? DephasingScope::kAllBranches : DephasingScope::kZeroHistory;
  const Distribution d = dephased_distribution(lo, hi, a.grid, scope);
  if (a.format == "csv") {
    emit_distribution_csv(out, d);
  } else {
    ordered_json command{{"name", "decohere"}, {"from", lo},         {"to", hi},
                         {"grid", a.grid},     {"scope", a.scope},   {"format", a.format}};
    emit_json(out, command,
              {{"outcomes", distribution_json(d)}, {"distance_to_uniform", distance_to_uniform(d)}});
  }
  return kExitOk;
}

struct Check {
  std::string name;
  double deviation;
  bool passed;
  std::string detail;
};

std::vector<Check> self_checks() {
  constexpr double kStateTolerance = 1e-12;
  std::vector<Check> checks;
  const char* names[] = {"pre_projection", "after_second_cnot", "after_swap", "final"};
  for (std::size_t branch : {0u, 1u}) {
    const auto got = stage_states(branch);
    const auto want = reference_states(branch);
    for (std::size_t k = 0; k < got.size(); ++k) {
      const double dev = max_deviation_up_to_global_phase(got[k], want[k]);
      checks.push_back({"branch" + std::to_string(branch) + "_" + names[k], dev, dev < kStateTolerance, ""});
    }
    const EquivalenceReport eq = cs_us_equivalence(got[1]);
    const Equivalence expected = branch == 0 ? Equivalence::kIdentity : Equivalence::kControlPhaseFlip;
    checks.push_back({"branch" + std::to_string(branch) + "_cs_us_equivalence", eq.max_deviation,
                      eq.relation == expected && eq.max_deviation < kStateTolerance, to_string(eq.relation)});
  }
  const Distribution d = run_compiled(reference_circuit());
  const double ideal[] = {0.375, 0.25, 0.125, 0.25};
  double dev = 0;
  for (std::size_t y = 0; y < 4; ++y) dev = std::max(dev, std::abs(d[y] - ideal[y]));
  checks.push_back({"compiled_distribution", dev, dev < kStateTolerance, ""});
  return checks;
}

int cmd_verify(const std::string& format, std::ostream& out, std::ostream& err) {
  const std::vector<Check> checks = self_checks();
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  if (format == "csv") {
    out << "check,deviation,status,detail\n";
    for (const Check& c : checks) {
      out << c.name << "," << fmt17(c.deviation) << "," << (c.passed ? "pass" : "fail") << "," << c.detail << "\n";
    }
  } else {
    ordered_json rows = ordered_json::array();
    for (const Check& c : checks) {
      ordered_json row{{"check", c.name}, {"deviation", c.deviation}, {"passed", c.passed}};
      if (!c.detail.empty()) row["relation"] = c.detail;
      rows.push_back(std::move(row));
    }
    emit_json(out, {{"name", "verify"}, {"format", format}}, {{"checks", std::move(rows)}, {"passed", ok}});
  }
  if (!ok) {
    for (const Check& c : checks) {
      if (!c.passed) err << "verify: " << c.name << " failed (deviation " << fmt17(c.deviation) << ")\n";
    }
    return kExitSelfTestFailed;
  }
  return kExitOk;
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '*') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  auto parse_number = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || part.empty()) throw std::invalid_argument("cannot parse angle '" + text + "'");
    return v;
  };
  const auto at = s.find("pi");
  if (at == std::string::npos) return parse_number(s);
  double factor = 1;
  const std::string head = s.substr(0, at);
  if (head == "-") {
    factor = -1;
  } else if (!head.empty() && head != "+") {
    factor = parse_number(head);
  }
  double divisor = 1;
  const std::string tail = s.substr(at + 2);
  if (!tail.empty()) {
    if (tail[0] != '/') throw std::invalid_argument("cannot parse angle '" + text + "'");
    divisor = parse_number(tail.substr(1));
  }
  return factor * std::numbers::pi / divisor;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact simulation of recycled-qubit order finding and the compiled N = 21 circuit", "qrecycle"};
  app.require_subcommand(1);
  const auto formats = CLI::IsMember({"json", "csv"});

  FactorArgs fa;
  auto* factor = app.add_subcommand("factor", "Factor N end to end");
  factor->add_option("N", fa.modulus, "Odd composite, not a prime power")->required();
  factor->add_option("--coprime", fa.coprime, "Co-prime base x (drawn from the seed when omitted)");
  factor->add_option("--bits", fa.bits, "Control bits n (default ceil(log2 N^2))");
  factor->add_option("--mode", fa.mode)->check(CLI::IsMember({"standard", "recycled"}));
  factor->add_option("--seed", fa.seed, "Seed of the sampling generator");
  factor->add_option("--format", fa.format)->check(formats);

  DistributionArgs da;
  auto* distribution = app.add_subcommand("distribution", "Exact n-bit output distribution");
  distribution->add_option("N", da.modulus)->required();
  distribution->add_option("x", da.coprime)->required();
  distribution->add_option("n", da.bits)->required();
  distribution->add_option("--mode", da.mode)->check(CLI::IsMember({"standard", "recycled", "compiled", "theory"}));
  distribution->add_flag("--unreduced", da.unreduced, "Compiled mode without redundancy elimination");
  distribution->add_option("--format", da.format)->check(formats);

  FringeArgs fr;
  auto* fringe = app.add_subcommand("fringe", "Heralded probabilities versus Fourier phase");
  auto* count_opt = fringe->add_option("--phases", fr.count, "Number of phases evenly spaced over [0, 2pi)");
  fringe->add_option("--phase-list", fr.phase_list, "Explicit phases (radians, 'pi' allowed)")
      ->delimiter(',')
      ->excludes(count_opt);
  fringe->add_option("--format", fr.format)->check(formats);

  DecohereArgs de;
  auto* decohere = app.add_subcommand("decohere", "Output distribution averaged over a Fourier phase window");
  decohere->add_option("--from", de.from, "Window start (radians, 'pi' allowed)");
  decohere->add_option("--to", de.to, "Window end (radians, 'pi' allowed)");
  decohere->add_option("--grid", de.grid, "Trapezoid grid points");
  decohere->add_option("--scope", de.scope, "Branches that see the offset")
      ->check(CLI::IsMember({"zero-history", "all"}));
  decohere->add_option("--format", de.format)->check(formats);

  std::string verify_format = "json";
  auto* verify = app.add_subcommand("verify", "Check the compiled circuit against the reference states");
  verify->add_option("--format", verify_format)->check(formats);

  std::uint64_t cn = 0, cx = 0;
  unsigned cbits = 0;
  bool c_unreduced = false;
  auto* compile_cmd = app.add_subcommand("compile", "Print the compiled circuit as JSON");
  compile_cmd->add_option("N", cn)->required();
  compile_cmd->add_option("x", cx)->required();
  compile_cmd->add_option("n", cbits)->required();
  compile_cmd->add_flag("--unreduced", c_unreduced);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (factor->parsed()) return cmd_factor(fa, out);
    if (distribution->parsed()) return cmd_distribution(da, out);
    if (fringe->parsed()) return cmd_fringe(fr, out);
    if (decohere->parsed()) return cmd_decohere(de, out);
    if (verify->parsed()) return cmd_verify(verify_format, out, err);
    if (compile_cmd->parsed()) {
      const auto inst = FactoringInstance::make(cn, cx);
      out << circuit_to_json(compile(inst, cbits, CompileOptions{.reduce = !c_unreduced})) << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}

}  // namespace qrecycle
