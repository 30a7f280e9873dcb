#include "rsplab/cli.hpp"

#include "rsplab/bloch.hpp"
#include "rsplab/json_io.hpp"
#include "rsplab/protocol.hpp"
#include "rsplab/rsp_eq.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace rsplab::cli {

namespace {

constexpr double kFidelityFloor = 1.0 - 1e-9;
constexpr double kGenericProductThreshold = 1e-3;
constexpr double kDeterminantTolerance = 1e-12;
constexpr double kDefaultGenericMargin = 1e-6;
// Outcome sampling draws from a stream disjoint from the state sampler's.
constexpr std::uint64_t kOutcomeStreamSalt = 0x5eed0f0a11ce0001ULL;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResolvedFamily {
  std::string name;
  int d = 0;
  std::vector<UnitaryOperator> unitaries;
  RspProtocol protocol;
  RealVector oblivious_p;  // state-independent p used by the bound report
  Sampler sampler = Sampler::Haar;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::vector<UnitaryOperator> truncate(std::vector<UnitaryOperator> us, std::optional<int> n,
                                      const std::string& name) {
  if (!n) return us;
  if (*n < 1 || *n > static_cast<int>(us.size())) {
    throw ConfigError("--n " + std::to_string(*n) + " is out of range for family '" + name + "' (size " +
                      std::to_string(us.size()) + ")");
  }
  us.erase(us.begin() + *n, us.end());
  return us;
}

RspProtocol solver_protocol(std::vector<UnitaryOperator> us, double tol) {
  StateDependentRule rule;
  rule.tol = tol;
  return RspProtocol(std::move(us), std::move(rule));
}

ResolvedFamily resolve_family(const ExperimentConfig& cfg) {
  const std::string& fam = cfg.family;
  if (fam == "shift") {
    const int d = cfg.d.value_or(2);
    auto us = truncate(shift_family(d).unitaries(), cfg.n, fam);
    const bool full = static_cast<int>(us.size()) == d * d;
    const int n = static_cast<int>(us.size());
    RspProtocol proto = full ? RspProtocol(us, UniformRule{}) : solver_protocol(us, cfg.tol);
    return {fam, d, std::move(us), std::move(proto), RealVector::Constant(n, 1.0 / n), Sampler::Haar};
  }
  if (fam == "pauli") {
    if (cfg.d && *cfg.d != 2) throw ConfigError("family 'pauli' requires --dim 2");
    auto us = truncate(pauli_unitaries(), cfg.n, fam);
    const int n = static_cast<int>(us.size());
    RspProtocol proto = n == 4 ? RspProtocol(us, UniformRule{}) : solver_protocol(us, cfg.tol);
    return {fam, 2, std::move(us), std::move(proto), RealVector::Constant(n, 1.0 / n), Sampler::Haar};
  }
  if (fam == "equatorial") {
    if (cfg.d && *cfg.d != 2) throw ConfigError("family 'equatorial' requires --dim 2");
    if (cfg.n && *cfg.n != 2) throw ConfigError("family 'equatorial' has n = 2");
    RspProtocol proto = equatorial_protocol();
    auto us = proto.unitaries();
    return {fam, 2, std::move(us), std::move(proto), RealVector::Constant(2, 0.5), Sampler::Equatorial};
  }
  if (fam.rfind("file:", 0) == 0) {
    UnitaryFamily file = load_family(fam.substr(5));
    if (cfg.d && *cfg.d != file.d) {
      throw ConfigError("--dim " + std::to_string(*cfg.d) + " does not match family.d = " + std::to_string(file.d));
    }
    if (cfg.n && *cfg.n != static_cast<int>(file.unitaries.size())) {
      throw ConfigError("--n does not match family.n");
    }
    const int n = static_cast<int>(file.unitaries.size());
    RealVector p = file.probabilities.value_or(RealVector::Constant(n, 1.0 / n));
    RspProtocol proto = file.to_protocol(cfg.tol);
    return {fam, file.d, file.unitaries, std::move(proto), std::move(p), Sampler::Haar};
  }
  throw ConfigError("unknown family '" + fam + "' (expected shift, pauli, equatorial or file:<path>)");
}

Sampler resolve_sampler(const ExperimentConfig& cfg, const ResolvedFamily& fam) {
  if (cfg.sampler == "auto") return fam.sampler;
  if (cfg.sampler == "haar") return Sampler::Haar;
  if (cfg.sampler == "equatorial") {
    if (fam.d != 2) throw ConfigError("--sampler equatorial requires d = 2");
    return Sampler::Equatorial;
  }
  throw ConfigError("unknown sampler '" + cfg.sampler + "'");
}

const char* kTranscriptCsvHeader = "sample,outcome,outcome_probability,fidelity,classical_cost_bits";

void write_transcript(std::ostream& out, OutputFormat format, int sample, const RspTranscript& t) {
  if (format == OutputFormat::Csv) {
    out << sample << ',' << t.outcome << ',' << fmt(t.outcome_probability, 17) << ',' << fmt(t.fidelity, 17)
        << ',' << fmt(t.classical_cost_bits, 17) << '\n';
    return;
  }
  json j = to_json(t);
  j["sample"] = sample;
  out << j.dump() << '\n';
}

void write_error_record(std::ostream& out, OutputFormat format, int sample, const std::string& what) {
  if (format == OutputFormat::Csv) {
    out << sample << ",,,,\n";
    return;
  }
  out << json{{"sample", sample}, {"error", what}}.dump() << '\n';
}

void write_report(std::ostream& out, OutputFormat format, const json& report) {
  if (format == OutputFormat::Json) {
    out << report.dump() << '\n';
    return;
  }
  // Flat objects only: header row of keys, one row of values.
  std::string header, row;
  for (auto it = report.begin(); it != report.end(); ++it) {
    if (it->is_structured()) continue;
    if (!header.empty()) {
      header += ',';
      row += ',';
    }
    header += it.key();
    row += it->is_string() ? it->get<std::string>() : it->dump();
  }
  out << header << '\n' << row << '\n';
}

Rng outcome_rng(const ExperimentConfig& cfg, int sample) {
  return Rng(cfg.seed ^ kOutcomeStreamSalt).split(static_cast<std::uint64_t>(sample));
}

int cmd_demo_rsp(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const ResolvedFamily fam = resolve_family(cfg);
  const Sampler sampler = resolve_sampler(cfg, fam);
  if (cfg.output == OutputFormat::Csv) out << kTranscriptCsvHeader << '\n';

  int failures = 0;
  double min_fidelity = 1.0;
  for (int i = 0; i < cfg.samples; ++i) {
    const PureState phi = sample_state(sampler, fam.d, cfg.seed, static_cast<std::uint64_t>(i));
    Rng rng = outcome_rng(cfg, i);
    try {
      const RspTranscript t = run_rsp(phi, fam.protocol, rng);
      min_fidelity = std::min(min_fidelity, t.fidelity);
      if (t.fidelity < kFidelityFloor) ++failures;
      write_transcript(out, cfg.output, i, t);
    } catch (const RspError& e) {
      ++failures;
      write_error_record(out, cfg.output, i, e.what());
    }
  }
  err << "demo-rsp: family=" << fam.name << " d=" << fam.d << " n=" << fam.protocol.n()
      << " samples=" << cfg.samples << " min_fidelity=" << fmt(min_fidelity, 17) << " failures=" << failures
      << '\n';
  return failures == 0 ? kExitOk : kExitFailure;
}

ScanOptions scan_options(const ExperimentConfig& cfg, const ResolvedFamily& fam, Sampler sampler) {
  ScanOptions opt;
  opt.sampler = sampler;
  opt.count = cfg.samples;
  opt.tol = cfg.tol;
  opt.seed = cfg.seed;
  if (cfg.generic_margin) {
    opt.generic_margin = *cfg.generic_margin;
  } else if (fam.d == 2 && fam.unitaries.size() == 3 && sampler == Sampler::Haar) {
    opt.generic_margin = kDefaultGenericMargin;
  }
  return opt;
}

int cmd_scan(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
  const ResolvedFamily fam = resolve_family(cfg);
  const Sampler sampler = resolve_sampler(cfg, fam);
  const ScanReport report = feasibility_scan(fam.unitaries, scan_options(cfg, fam, sampler));
  write_report(out, cfg.output, to_json(report));
  return kExitOk;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
  const ResolvedFamily fam = resolve_family(cfg);
  const Sampler sampler = resolve_sampler(cfg, fam);
  const int n = static_cast<int>(fam.unitaries.size());
  const int d = fam.d;
  const ObliviousBoundReport ob = oblivious_bound_report(fam.unitaries, fam.oblivious_p);
  const double cost = std::log2(static_cast<double>(n));

  int min_rank = d;
  for (int i = 0; i < cfg.samples; ++i) {
    const PureState phi = sample_state(sampler, d, cfg.seed, static_cast<std::uint64_t>(i));
    min_rank = std::min(min_rank, completeness_rank(fam.unitaries, phi));
  }

  json notes = json::array();
  notes.push_back("n = " + std::to_string(n) + ", d = " + std::to_string(d) + ", d^2 = " + std::to_string(d * d));
  if (ob.is_identity && n == d * d) {
    notes.push_back("n = d^2 = " + std::to_string(n));
    notes.push_back("p_m = 1/" + std::to_string(d * d));
    notes.push_back("tr u_m^dag u_m' = " + std::to_string(d) + " delta_mm'");
  } else if (!ob.is_identity) {
    notes.push_back("X^dag X != I: no oblivious protocol with these probabilities");
  }
  notes.push_back("classical cost = log2 " + std::to_string(n) + " = " + fmt(cost, 6) + " bits");

  json report{{"n", n},
              {"d", d},
              {"family", fam.name},
              {"is_identity", ob.is_identity},
              {"gram_deviation", ob.gram_deviation},
              {"bound_satisfied", ob.bound_satisfied},
              {"holevo_bound_satisfied", n >= d},
              {"strict_bound_satisfied", n >= d + 1},
              {"completeness_rank_min", min_rank},
              {"classical_cost_bits", cost},
              {"seed", cfg.seed}};
  if (ob.xx_dagger_deviation) {
    report["xx_dagger_deviation"] = *ob.xx_dagger_deviation;
    report["uniform_deviation"] = *ob.uniform_deviation;
    report["trace_condition_deviation"] = *ob.trace_condition_deviation;
    report["implied_probability"] = 1.0 / (d * d);
  }

  if (d == 2) {
    double max_det_err = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
      const BlochVector chi = bloch_from_state(sample_state(Sampler::Haar, 2, cfg.seed, static_cast<std::uint64_t>(i)));
      const N3Matrix m = n3_matrix(chi);
      max_det_err = std::max(max_det_err, std::abs(m.determinant - 4.0 * chi.chi.x() * chi.chi.y() * chi.chi.z()));
    }
    report["n3_determinant_samples"] = cfg.samples;
    report["n3_determinant_max_error"] = max_det_err;
    const ScanReport scan = feasibility_scan(fam.unitaries, scan_options(cfg, fam, sampler));
    report["scan"] = to_json(scan);
    report["scan_feasible_fraction"] = scan.feasible_fraction;
  }
  report["notes"] = notes;
  write_report(out, cfg.output, report);
  return kExitOk;
}

BlochVector generic_bloch(Rng& rng) {
  for (;;) {
    Vector3 v(rng.normal(), rng.normal(), rng.normal());
    if (v.norm() == 0.0) continue;
    v.normalize();
    if (std::abs(v.x() * v.y() * v.z()) > kGenericProductThreshold) return BlochVector{v};
  }
}

int cmd_bloch_impossibility(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
  const auto rotations = canonical_n3_rotations();
  std::vector<UnitaryOperator> unitaries = pauli_unitaries();
  unitaries.pop_back();  // {I, sigma_x, sigma_y} realize {I, Rx(pi), Ry(pi)}

  int infeasible = 0;
  double min_bloch = std::numeric_limits<double>::infinity();
  double min_operator = std::numeric_limits<double>::infinity();
  double max_det_err = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    Rng rng = Rng(cfg.seed).split(static_cast<std::uint64_t>(i));
    const BlochVector chi = generic_bloch(rng);
    const N3Matrix m = n3_matrix(chi);
    max_det_err = std::max(max_det_err, std::abs(m.determinant - 4.0 * chi.chi.x() * chi.chi.y() * chi.chi.z()));
    const FeasibilityResult reduced = solve_reduced(rotations, chi, cfg.tol);
    const FeasibilityResult op = solve_probabilities(unitaries, state_from_bloch(chi), cfg.tol);
    if (!reduced.feasible() && !op.feasible() && reduced.min_residual > kGenericProductThreshold) ++infeasible;
    min_bloch = std::min(min_bloch, reduced.min_residual);
    min_operator = std::min(min_operator, op.min_residual);
  }
  const bool passed = infeasible == cfg.samples && max_det_err <= kDeterminantTolerance;
  json report{{"samples", cfg.samples},
              {"infeasible", infeasible},
              {"generic_threshold", kGenericProductThreshold},
              {"min_bloch_residual", min_bloch},
              {"min_operator_residual", min_operator},
              {"max_determinant_error", max_det_err},
              {"seed", cfg.seed},
              {"passed", passed}};
  write_report(out, cfg.output, report);
  return passed ? kExitOk : kExitFailure;
}

int cmd_equator_demo(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.d && *cfg.d != 2) throw ConfigError("equator-demo requires --dim 2");
  const RspProtocol proto = equatorial_protocol();
  if (cfg.output == OutputFormat::Csv) out << kTranscriptCsvHeader << '\n';

  int failures = 0;
  double min_fidelity = 1.0;
  for (int i = 0; i < cfg.samples; ++i) {
    const PureState phi = sample_state(Sampler::Equatorial, 2, cfg.seed, static_cast<std::uint64_t>(i));
    Rng rng = outcome_rng(cfg, i);
    const RspTranscript t = run_rsp(phi, proto, rng);
    min_fidelity = std::min(min_fidelity, t.fidelity);
    if (t.fidelity < kFidelityFloor || t.classical_cost_bits != 1.0) ++failures;
    write_transcript(out, cfg.output, i, t);
  }

  // Off-equator states must be refused.
  int rejected = 0;
  int off_equator = 0;
  for (int i = 0; i < cfg.samples; ++i) {
    const PureState phi = sample_state(Sampler::Haar, 2, cfg.seed, static_cast<std::uint64_t>(i));
    if (std::abs(bloch_from_state(phi).chi.z()) <= kEquatorTolerance) continue;
    ++off_equator;
    Rng rng = outcome_rng(cfg, i);
    try {
      (void)run_rsp(phi, proto, rng);
    } catch (const RspError&) {
      ++rejected;
    }
  }
  failures += off_equator - rejected;
  err << "equator-demo: samples=" << cfg.samples << " min_fidelity=" << fmt(min_fidelity, 17)
      << " cost_bits=" << proto.classical_cost_bits() << " off_equator_rejected=" << rejected << "/"
      << off_equator << " failures=" << failures << '\n';
  return failures == 0 ? kExitOk : kExitFailure;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("RSPLAB_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("RSPLAB_SEED is not an unsigned integer: '") + env + "'");
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.d && *cfg.d < 2) throw ConfigError("--dim must be at least 2");
  if (cfg.d && *cfg.d > 64) throw ConfigError("--dim must be at most 64");
  if (cfg.samples < 1) throw ConfigError("--samples must be at least 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (cfg.generic_margin && *cfg.generic_margin < 0.0) throw ConfigError("--generic-margin must be nonnegative");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  CLI::App app{"rsplab: remote state preparation toolkit", "rsplab"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string output = "json";
  std::optional<std::string> out_path;
  const std::map<std::string, std::string> subcommands = {
      {"demo-rsp", "simulate the protocol on sampled states"},
      {"scan", "feasibility of the RSP equation over sampled states"},
      {"bounds", "oblivious X-matrix report and message-count bounds"},
      {"bloch-impossibility", "n = 3 qubit impossibility check on generic Bloch vectors"},
      {"equator-demo", "two-message protocol on the equator of the Bloch sphere"}};
  for (const auto& [name, description] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--dim", cfg.d, "Hilbert-space dimension d");
    sub->add_option("--n", cfg.n, "number of messages (truncates built-in families)");
    sub->add_option("--family", cfg.family, "shift | pauli | equatorial | file:<path>");
    sub->add_option("--sampler", cfg.sampler, "auto | haar | equatorial");
    sub->add_option("--samples", cfg.samples, "number of sampled states");
    sub->add_option("--seed", seed, "PRNG seed (default: $RSPLAB_SEED or 0)");
    sub->add_option("--tol", cfg.tol, "feasibility tolerance on the RSP residual");
    sub->add_option("--generic-margin", cfg.generic_margin,
                    "d = 2 scans: skip states within this distance of chi_x chi_y chi_z = 0");
    sub->add_option("--output", output, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out_path, "write primary output to this file");
    sub->callback([&cfg, name] { cfg.subcommand = name; });
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (cfg.subcommand == "bloch-impossibility" && !app.get_subcommand(cfg.subcommand)->get_option("--samples")->count()) {
      cfg.samples = 500;
    }
    cfg.seed = seed ? *seed : default_seed();
    cfg.output = output == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    cfg.out_path = out_path;
    validate(cfg);

    std::ofstream file;
    std::ostream* target = &out;
    if (cfg.out_path) {
      file.open(*cfg.out_path);
      if (!file) throw ConfigError("cannot open --out path '" + *cfg.out_path + "'");
      target = &file;
    }

    if (cfg.subcommand == "demo-rsp") return cmd_demo_rsp(cfg, *target, err);
    if (cfg.subcommand == "scan") return cmd_scan(cfg, *target, err);
    if (cfg.subcommand == "bounds") return cmd_bounds(cfg, *target, err);
    if (cfg.subcommand == "bloch-impossibility") return cmd_bloch_impossibility(cfg, *target, err);
    if (cfg.subcommand == "equator-demo") return cmd_equator_demo(cfg, *target, err);
    throw ConfigError("unknown subcommand");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n\n" << app.get_subcommand(cfg.subcommand)->help();
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "error: malformed family file: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace rsplab::cli
