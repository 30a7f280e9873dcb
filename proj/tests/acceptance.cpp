// Acceptance gate. One PASS/FAIL line per criterion; nonzero exit on any FAIL.

#include "rsplab/bloch.hpp"
#include "rsplab/cli.hpp"
#include "rsplab/json_io.hpp"
#include "rsplab/protocol.hpp"
#include "rsplab/qmath.hpp"
#include "rsplab/rsp_eq.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace rsplab;
using namespace rsplab::testing;

namespace {

// Tolerances.
constexpr double kGramTol = 1e-8;
constexpr double kTraceOrthoTol = 1e-10;
constexpr double kFidelityTol = 1e-9;
constexpr double kAverageStateTol = 1e-8;
constexpr double kResidualFloor = 1e-3;
constexpr double kGenericMargin = 1e-3;
constexpr double kDeterminantTol = 1e-12;
constexpr double kEquatorTol = 1e-9;
constexpr double kEntropySlack = 1e-9;
constexpr double kProductTol = 1e-7;
constexpr double kReductionTol = 1e-10;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. Teleportation-equivalent shift families.
Outcome teleportation_equivalence() {
  Outcome o;
  double worst_gram = 0, worst_trace = 0, worst_fid = 1;
  for (int d = 2; d <= 5; ++d) {
    const RspProtocol proto = shift_family(d);
    const int n = proto.n();
    const ObliviousBoundReport rep = oblivious_bound_report(proto.unitaries(), RealVector::Constant(n, 1.0 / n));
    worst_gram = std::max(worst_gram, rep.gram_deviation);
    if (!rep.is_identity || rep.gram_deviation > kGramTol) o.fail("X^dag X != I at d=" + std::to_string(d));
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const Complex tr = (proto.unitaries()[a].matrix().adjoint() * proto.unitaries()[b].matrix()).trace();
        worst_trace = std::max(worst_trace, std::abs(tr - (a == b ? Complex(d) : Complex(0))));
      }
    }
    Rng states(1000 + d);
    for (int i = 0; i < 100; ++i) {
      const RspTranscript t = run_rsp(haar_random_state(d, states), proto, 7 * d + i);
      worst_fid = std::min(worst_fid, t.fidelity);
    }
  }
  if (worst_trace > kTraceOrthoTol) o.fail("trace orthogonality deviation " + fmt(worst_trace));
  if (worst_fid < 1.0 - kFidelityTol) o.fail("fidelity " + fmt(worst_fid));
  if (o.pass)
    o.detail = "d=2..5 gram_dev=" + fmt(worst_gram) + " trace_dev=" + fmt(worst_trace) + " min_fidelity=1-" +
               fmt(1.0 - worst_fid);
  return o;
}

// 2. n = 3 qubit impossibility.
Outcome qubit_two_bit_bound() {
  Outcome o;
  const auto rs = canonical_n3_rotations();
  Rng rng(2024);
  int samples = 0;
  double min_res = std::numeric_limits<double>::infinity(), worst_det = 0;
  while (samples < 500) {
    const Vector3 chi = bloch_from_state(haar_random_state(2, rng)).chi;
    if (std::abs(chi.x() * chi.y() * chi.z()) <= kGenericMargin) continue;
    ++samples;
    const FeasibilityResult r = solve_reduced(rs, BlochVector{chi}, kDefaultFeasibilityTolerance);
    min_res = std::min(min_res, r.min_residual);
    if (r.feasible()) o.fail("feasible sample");
    const double det_err = std::abs(n3_matrix(BlochVector{chi}).determinant - 4 * chi.x() * chi.y() * chi.z());
    worst_det = std::max(worst_det, det_err);
  }
  if (min_res <= kResidualFloor) o.fail("min_residual " + fmt(min_res));
  if (worst_det > kDeterminantTol) o.fail("determinant error " + fmt(worst_det));
  if (o.pass) o.detail = "500/500 infeasible, min_residual=" + fmt(min_res) + " det_err=" + fmt(worst_det);
  return o;
}

// 3. Feasible solutions give perfect protocols; infeasible ones are rejected.
Outcome necessary_and_sufficient() {
  Outcome o;
  Rng rng(33);
  int feasible = 0, infeasible = 0, attempts = 0;
  double worst_fid = 1, worst_avg = 0;
  while ((feasible < 50 || infeasible < 50) && attempts < 2000) {
    ++attempts;
    std::vector<UnitaryOperator> us;
    int d = 2;
    if (attempts % 4 == 0) {
      // V u_m W with uniform weights solves the equation for every state.
      d = 3;
      const UnitaryOperator v = haar_random_unitary(d, rng), w = haar_random_unitary(d, rng);
      const RspProtocol shifts = shift_family(d);
      for (const auto& u : shifts.unitaries()) us.emplace_back(v.matrix() * u.matrix() * w.matrix());
    } else {
      us = random_family(2, 3 + attempts % 6, rng);
    }
    const PureState phi = haar_random_state(d, rng);
    const FeasibilityResult r = solve_probabilities(us, phi);
    const RspProtocol proto(us, StateDependentRule{});
    if (r.feasible()) {
      if (feasible >= 50) continue;
      ++feasible;
      const Povm povm = build_povm(phi, proto, *r.probabilities);
      const RealVector dist = alice_outcome_distribution(povm);
      ComplexMatrix avg = ComplexMatrix::Zero(d, d);
      for (int m = 0; m < proto.n(); ++m) {
        if (dist(m) <= 1e-12) continue;
        const DensityOperator before = post_measurement_state(phi, proto, povm, m);
        avg += dist(m) * before.matrix();
        worst_fid = std::min(worst_fid, fidelity(phi, bob_correct(before, us[m])));
      }
      worst_avg = std::max(worst_avg, (avg - ComplexMatrix::Identity(d, d) / d).norm());
      worst_fid = std::min(worst_fid, run_rsp(phi, proto, attempts).fidelity);
    } else {
      if (infeasible >= 50) continue;
      ++infeasible;
      bool rejected = false;
      try {
        build_povm(phi, proto, r.best_probabilities);
      } catch (const RspError&) {
        rejected = true;
      }
      if (!rejected) o.fail("build_povm accepted an infeasible pair");
    }
  }
  if (feasible < 50 || infeasible < 50)
    o.fail("collected " + std::to_string(feasible) + " feasible / " + std::to_string(infeasible) + " infeasible");
  if (worst_fid < 1.0 - kFidelityTol) o.fail("branch fidelity " + fmt(worst_fid));
  if (worst_avg > kAverageStateTol) o.fail("average state deviation " + fmt(worst_avg));
  if (o.pass)
    o.detail = "50 feasible (min_fidelity=1-" + fmt(1.0 - worst_fid) + ", avg_dev=" + fmt(worst_avg) +
               "), 50 infeasible rejected";
  return o;
}

// 4. Rank-deficient and n = d families.
Outcome lower_bound_ladder() {
  Outcome o;
  Rng rng(44);
  int deficient = 0;
  auto check_deficient = [&](const std::vector<UnitaryOperator>& us, const PureState& phi) {
    const int d = phi.dim();
    const int rank = completeness_rank(us, phi);
    if (rank >= d) o.fail("engineered family has full rank");
    if (solve_probabilities(us, phi).feasible()) o.fail("rank-deficient family is feasible");
    ++deficient;
  };
  // Fewer messages than dimensions.
  for (int d = 2; d <= 5; ++d)
    for (int n = 1; n < d; ++n)
      for (int k = 0; k < 5; ++k) check_deficient(random_family(d, n, rng), haar_random_state(d, rng));
  // Many diagonal unitaries at a basis state: every column is parallel to |0>.
  for (int d = 2; d <= 4; ++d) {
    std::vector<UnitaryOperator> us;
    for (int m = 0; m < d * d; ++m) {
      ComplexMatrix u = ComplexMatrix::Zero(d, d);
      for (int k = 0; k < d; ++k) u(k, k) = std::polar(1.0, 2 * std::numbers::pi * rng.uniform());
      us.emplace_back(u);
    }
    check_deficient(us, PureState::basis(d, 0));
  }
  int families = 0;
  for (int d : {2, 3}) {
    for (int f = 0; f < 30; ++f) {
      ScanOptions opt;
      opt.count = 50;
      opt.seed = 100 * d + f;
      const ScanReport r = feasibility_scan(random_family(d, d, rng), opt);
      ++families;
      if (r.feasible_fraction != 0.0) o.fail("n=d family feasible at d=" + std::to_string(d));
    }
  }
  if (o.pass)
    o.detail = std::to_string(deficient) + " deficient families certified, " + std::to_string(families) +
               " n=d families x 50 states at 0% feasibility";
  return o;
}

// 5. Equatorial two-message protocol.
Outcome equatorial_n2() {
  Outcome o;
  std::ostringstream out, err;
  const int code = cli::run({"equator-demo", "--samples", "100", "--seed", "5"}, out, err);
  if (code != cli::kExitOk) o.fail("equator-demo exit " + std::to_string(code));
  std::istringstream lines(out.str());
  int rows = 0;
  double worst = 1;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ++rows;
    worst = std::min(worst, j["fidelity"].get<double>());
    if (j["classical_cost_bits"].get<double>() != 1.0) o.fail("classical cost != 1 bit");
  }
  if (rows != 100) o.fail("expected 100 transcripts, got " + std::to_string(rows));
  if (worst < 1.0 - kEquatorTol) o.fail("fidelity " + fmt(worst));

  const RspProtocol proto = equatorial_protocol();
  Rng rng(55);
  int rejected = 0;
  for (int i = 0; i < 100; ++i) {
    // Polar offsets from 1e-8 upward, beyond the equator tolerance.
    const double theta = std::numbers::pi / 2 - std::pow(10.0, -8.0 + 7.0 * rng.uniform());
    ComplexVector v(2);
    v << std::cos(theta / 2), std::polar(std::sin(theta / 2), 2 * std::numbers::pi * rng.uniform());
    try {
      run_rsp(PureState::normalized(v), proto, i);
    } catch (const RspError&) {
      ++rejected;
    }
  }
  if (rejected != 100) o.fail("accepted off-equator state");
  if (o.pass) o.detail = "100 transcripts, min_fidelity=1-" + fmt(1.0 - worst) + ", cost=1 bit, 100/100 off-equator rejected";
  return o;
}

// 6. Quantum-information lemmas.
Outcome lemma_suite() {
  Outcome o;
  Rng rng(66);
  for (int t = 0; t < 200; ++t) {
    const int dq = 2 + t % 2, dr = 2 + (t / 2) % 3;
    const int terms = 1 + t % 3;
    ComplexMatrix rho = ComplexMatrix::Zero(dq * dr, dq * dr);
    const RealVector w = random_simplex_point(terms, rng);
    for (int k = 0; k < terms; ++k) rho += w(k) * haar_random_state(dq * dr, rng).projector();
    const DensityOperator full(rho);
    const double s = von_neumann_entropy(full);
    const double sq = von_neumann_entropy(partial_trace(full, Subsystem::A, dq, dr));
    const double sr = von_neumann_entropy(partial_trace(full, Subsystem::B, dq, dr));
    if (std::abs(sr - sq) > s + kEntropySlack || s > sq + sr + kEntropySlack) o.fail("entropy inequality");
  }
  for (int t = 0; t < 200; ++t) {
    const int dq = 2 + t % 3, dr = 2 + (t / 3) % 3;
    const PureState q = haar_random_state(dq, rng);
    ComplexMatrix rho = ComplexMatrix::Zero(dq * dr, dq * dr);
    const int terms = 1 + t % 3;
    const RealVector w = random_simplex_point(terms, rng);
    for (int k = 0; k < terms; ++k) rho += w(k) * tensor(q.projector(), random_density(dr, rng, 1 + k).matrix());
    const ComplexMatrix local = tensor(ComplexMatrix::Identity(dq, dq), haar_random_unitary(dr, rng).matrix());
    const DensityOperator full(local * rho * local.adjoint());
    const DensityOperator rq = partial_trace(full, Subsystem::A, dq, dr);
    const DensityOperator rr = partial_trace(full, Subsystem::B, dq, dr);
    if (purity(rq) < 1.0 - 1e-12) o.fail("marginal not pure");
    if ((full.matrix() - tensor(rq.matrix(), rr.matrix())).norm() > kProductTol) o.fail("purity factorization");
  }
  int certified = 0;
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 4;
    DensityOperator a = DensityOperator::from_pure(haar_random_state(d, rng));
    DensityOperator b = a;
    if (t % 3 == 1) {
      b = DensityOperator::from_pure(
          PureState::normalized(haar_random_state(d, rng).amplitudes() * 1e-3 + haar_random_state(d, rng).amplitudes()));
    } else if (t % 3 == 2) {
      a = random_density(d, rng);
      b = random_density(d, rng);
    }
    const double ov = overlap_trace(a, b);
    if (ov < -1e-12 || ov > 1.0 + 1e-9) o.fail("overlap out of range");
    if (ov >= 1.0 - 1e-9) {
      ++certified;
      if ((a.matrix() - b.matrix()).norm() > 1e-6 || purity(a) < 1.0 - 1e-9 || purity(b) < 1.0 - 1e-9)
        o.fail("overlap lemma");
    }
  }
  if (certified < 60) o.fail("too few overlap-one instances: " + std::to_string(certified));
  if (o.pass) o.detail = "600 instances (200 entropy, 200 factorization, 200 overlap; " + std::to_string(certified) + " at overlap 1)";
  return o;
}

// 7. Operator-level and Bloch-level equations agree.
Outcome bloch_reduction() {
  Outcome o;
  Rng rng(77);
  double worst = 0;
  int feasible = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 8;
    const auto us = random_family(2, n, rng);
    const auto rs = rotations_from_unitaries(us);
    const PureState phi = haar_random_state(2, rng);
    const BlochVector chi = bloch_from_state(phi);
    const RealVector p = random_simplex_point(n, rng);
    worst = std::max(worst, std::abs(rsp_residual(us, p, phi) - reduced_residual(rs, p, chi) / std::sqrt(2.0)));
    const FeasibilityResult a = solve_probabilities(us, phi);
    const FeasibilityResult b = solve_reduced(rs, chi, a.tolerance * std::sqrt(2.0));
    if (a.feasible() != b.feasible()) o.fail("verdicts differ at instance " + std::to_string(t));
    feasible += a.feasible();
  }
  if (worst > kReductionTol) o.fail("residual ratio error " + fmt(worst));
  if (o.pass) o.detail = "200 instances, max |op - bloch/sqrt2|=" + fmt(worst) + ", verdicts agree (" + std::to_string(feasible) + " feasible)";
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double budget_seconds;  // 0 = none
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"teleportation-equivalence", teleportation_equivalence, 10.0},
      {"qubit-two-bit-bound", qubit_two_bit_bound, 5.0},
      {"necessary-and-sufficient", necessary_and_sufficient, 0.0},
      {"lower-bound-ladder", lower_bound_ladder, 10.0},
      {"equatorial-n2", equatorial_n2, 0.0},
      {"lemma-suite", lemma_suite, 0.0},
      {"bloch-reduction", bloch_reduction, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0 && secs > criteria[i].budget_seconds)
      o.fail("runtime " + fmt(secs) + " s over budget " + fmt(criteria[i].budget_seconds) + " s");
    std::printf("%s [%zu] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
