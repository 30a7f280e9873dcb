#include "rsplab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rsplab {

namespace {

constexpr double kZeroProbability = 1e-12;
constexpr double kPovmRejectCeiling = 1e-6;

int family_dimension(const std::vector<UnitaryOperator>& unitaries) {
  if (unitaries.empty()) throw std::invalid_argument("RspProtocol: no unitaries");
  const int d = unitaries.front().dim();
  for (const auto& u : unitaries)
    if (u.dim() != d) throw std::invalid_argument("RspProtocol: unitaries have mixed dimensions");
  return d;
}

// tr_A(|a><b|) for a, b on C^d (x) C^d stored A-major as d x d matrices
// (row = A index, column = B index).
ComplexMatrix trace_out_a(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.transpose() * b.conjugate();
}

}  // namespace

RspProtocol::RspProtocol(std::vector<UnitaryOperator> unitaries, ProbabilityRule rule)
    : d_(family_dimension(unitaries)), unitaries_(std::move(unitaries)), rule_(std::move(rule)) {
  if (const auto* fixed = std::get_if<FixedRule>(&rule_)) {
    check_probability_vector(fixed->p, unitaries_.size());
  }
}

RealVector RspProtocol::probabilities(const PureState& phi) const {
  if (phi.dim() != d_) throw std::invalid_argument("RspProtocol: state dimension mismatch");
  RealVector p;
  if (std::holds_alternative<UniformRule>(rule_)) {
    p = RealVector::Constant(n(), 1.0 / n());
  } else if (const auto* fixed = std::get_if<FixedRule>(&rule_)) {
    p = fixed->p;
  } else {
    const auto& dependent = std::get<StateDependentRule>(rule_);
    if (dependent.closed_form) {
      p = dependent.closed_form(phi);
    } else {
      FeasibilityResult r = solve_probabilities(unitaries_, phi, dependent.tol);
      if (!r.feasible()) {
        throw RspError("no RSP-equation solution for this state (min residual " +
                       std::to_string(r.min_residual) + ")");
      }
      p = std::move(*r.probabilities);
    }
  }
  check_probability_vector(p, unitaries_.size());
  return p;
}

double RspProtocol::classical_cost_bits() const { return std::log2(static_cast<double>(n())); }

double Povm::completeness_deviation() const {
  ComplexMatrix sum = -ComplexMatrix::Identity(d, d);
  for (const auto& e : elements) sum += e;
  return sum.norm();
}

double Povm::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& e : elements) lo = std::min(lo, hermitian_eigenvalues(e).minCoeff());
  return lo;
}

PureState conjugate_state(const PureState& phi) {
  return PureState(phi.amplitudes().conjugate());
}

Povm build_povm(const PureState& phi, const RspProtocol& proto, const RealVector& p, double tol) {
  if (phi.dim() != proto.d()) throw std::invalid_argument("build_povm: state dimension mismatch");
  check_probability_vector(p, static_cast<std::size_t>(proto.n()));
  const int d = proto.d();

  Povm povm;
  povm.d = d;
  povm.elements.reserve(proto.n());
  for (int m = 0; m < proto.n(); ++m) {
    const PureState phi_m(proto.unitaries()[m].adjoint() * phi.amplitudes());
    const ComplexVector bar = conjugate_state(phi_m).amplitudes();
    povm.elements.push_back(d * std::max(p(m), 0.0) * (bar * bar.adjoint()));
  }
  const double threshold = std::min(d * tol, kPovmRejectCeiling);
  if (povm.completeness_deviation() > threshold) {
    throw RspError("not an RSP-equation solution: POVM completeness deviation " +
                   std::to_string(povm.completeness_deviation()));
  }
  return povm;
}

RealVector alice_outcome_distribution(const Povm& povm) {
  const ComplexMatrix rho_a = ComplexMatrix::Identity(povm.d, povm.d) / static_cast<double>(povm.d);
  RealVector p(povm.n());
  for (int m = 0; m < povm.n(); ++m) p(m) = (rho_a * povm.elements[m]).trace().real();
  return p;
}

DensityOperator post_measurement_state(const PureState& phi, const RspProtocol& proto,
                                       const Povm& povm, int m) {
  if (phi.dim() != proto.d() || povm.d != proto.d()) {
    throw std::invalid_argument("post_measurement_state: dimension mismatch");
  }
  if (m < 0 || m >= povm.n()) throw std::invalid_argument("post_measurement_state: outcome out of range");
  const RealVector probs = alice_outcome_distribution(povm);
  const double pm = probs(m);
  if (pm <= kZeroProbability) throw RspError("outcome has zero probability");

  const int d = povm.d;
  // |Phi_0> as a d x d A-major matrix is I/sqrt(d); (E^dag (x) I)|Phi_0> acts on the row index.
  const ComplexMatrix phi0 = ComplexMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
  const ComplexMatrix bra_side = povm.elements[m].adjoint() * phi0;
  ComplexMatrix rho_b = trace_out_a(phi0, bra_side) / pm;
  return DensityOperator(0.5 * (rho_b + rho_b.adjoint()));
}

DensityOperator bob_correct(const DensityOperator& rho, const UnitaryOperator& u) {
  if (rho.dim() != u.dim()) throw std::invalid_argument("bob_correct: dimension mismatch");
  const ComplexMatrix out = u.matrix() * rho.matrix() * u.adjoint();
  return DensityOperator(0.5 * (out + out.adjoint()));
}

RspTranscript run_rsp(const PureState& phi, const RspProtocol& proto, Rng& rng) {
  const RealVector p = proto.probabilities(phi);
  const Povm povm = build_povm(phi, proto, p);
  const RealVector dist = alice_outcome_distribution(povm);

  // Inverse CDF; the fallback picks the last outcome with nonzero mass.
  const double u = rng.uniform() * dist.sum();
  int m = -1;
  double cumulative = 0.0;
  for (int k = 0; k < dist.size(); ++k) {
    if (dist(k) <= kZeroProbability) continue;
    cumulative += dist(k);
    m = k;
    if (u < cumulative) break;
  }
  if (m < 0) throw RspError("POVM has no outcome with positive probability");

  DensityOperator before = post_measurement_state(phi, proto, povm, m);
  DensityOperator after = bob_correct(before, proto.unitaries()[m]);
  const double f = fidelity(phi, after);
  return RspTranscript{phi, m + 1, dist(m), std::move(before), std::move(after), f,
                       proto.classical_cost_bits()};
}

RspTranscript run_rsp(const PureState& phi, const RspProtocol& proto, std::uint64_t seed) {
  Rng rng(seed);
  return run_rsp(phi, proto, rng);
}

std::vector<std::optional<double>> branch_fidelities(const PureState& phi, const RspProtocol& proto) {
  const RealVector p = proto.probabilities(phi);
  const Povm povm = build_povm(phi, proto, p);
  const RealVector dist = alice_outcome_distribution(povm);
  std::vector<std::optional<double>> out(proto.n());
  for (int m = 0; m < proto.n(); ++m) {
    if (dist(m) <= kZeroProbability) continue;
    const DensityOperator after = bob_correct(post_measurement_state(phi, proto, povm, m), proto.unitaries()[m]);
    out[m] = fidelity(phi, after);
  }
  return out;
}

UnitaryOperator shift_operator(int p, int x, int d) {
  if (d < 1) throw std::invalid_argument("shift_operator: d must be positive");
  if (p < 0 || p >= d || x < 0 || x >= d) {
    throw std::invalid_argument("shift_operator: (p, x) must lie in [0, d)");
  }
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const int target = (k + x) % d;
    const double angle = 2.0 * std::numbers::pi * p * target / d;
    u(target, k) = std::polar(1.0, angle);
  }
  return UnitaryOperator(std::move(u));
}

RspProtocol shift_family(int d) {
  if (d < 2) throw std::invalid_argument("shift_family: d must be at least 2");
  std::vector<UnitaryOperator> us;
  us.reserve(static_cast<std::size_t>(d) * d);
  for (int p = 0; p < d; ++p)
    for (int x = 0; x < d; ++x) us.push_back(shift_operator(p, x, d));
  return RspProtocol(std::move(us), UniformRule{});
}

std::vector<UnitaryOperator> pauli_unitaries() {
  using namespace std::complex_literals;
  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  y << 0.0, -1.0i, 1.0i, 0.0;
  z << 1.0, 0.0, 0.0, -1.0;
  return {UnitaryOperator::identity(2), UnitaryOperator(x), UnitaryOperator(y), UnitaryOperator(z)};
}

}  // namespace rsplab
