#pragma once

// Simulation of exact, deterministic remote state preparation over a
// maximally entangled pair: Alice measures a state-dependent POVM built from
// a solution of the RSP equation, sends the outcome m, and Bob applies u_m.

#include "rsplab/qmath.hpp"
#include "rsplab/rsp_eq.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rsplab {

/// p_m = 1/n for every state.
struct UniformRule {};

/// State-independent probabilities.
struct FixedRule {
  RealVector p;
};

/// p(phi) resolved per state. When `closed_form` is set it is used; it may
/// throw RspError for states it does not cover. Otherwise the RSP equation is
/// solved numerically for each state.
struct StateDependentRule {
  std::function<RealVector(const PureState&)> closed_form;
  double tol = kDefaultFeasibilityTolerance;
};

using ProbabilityRule = std::variant<UniformRule, FixedRule, StateDependentRule>;

class RspProtocol {
 public:
  RspProtocol(std::vector<UnitaryOperator> unitaries, ProbabilityRule rule);

  int d() const { return d_; }
  int n() const { return static_cast<int>(unitaries_.size()); }
  const std::vector<UnitaryOperator>& unitaries() const { return unitaries_; }
  const ProbabilityRule& rule() const { return rule_; }

  /// Probability vector for `phi`, validated to lie on the simplex. Throws
  /// RspError when a state-dependent rule has no solution for `phi`.
  RealVector probabilities(const PureState& phi) const;

  /// log2 n
  double classical_cost_bits() const;

 private:
  int d_;
  std::vector<UnitaryOperator> unitaries_;
  ProbabilityRule rule_;
};

/// POVM elements E_m; each PSD and summing to the identity.
struct Povm {
  int d = 0;
  std::vector<ComplexMatrix> elements;

  int n() const { return static_cast<int>(elements.size()); }
  /// ||sum_m E_m - I||_F
  double completeness_deviation() const;
  /// Smallest eigenvalue over all elements.
  double min_eigenvalue() const;
};

/// Amplitudes conjugated in the computational basis: |phi-bar> = sum_k <phi|k> |k>.
PureState conjugate_state(const PureState& phi);

/// E_m = d p_m |conj(u_m^dag phi)><conj(u_m^dag phi)|.
///
/// The supplied p must solve the RSP equation at phi. The completeness
/// deviation ||sum E_m - I||_F equals d times the RSP residual; elements are
/// rejected with RspError("not an RSP-equation solution") once it exceeds
/// min(d * tol, 1e-6).
Povm build_povm(const PureState& phi, const RspProtocol& proto, const RealVector& p,
                double tol = kDefaultFeasibilityTolerance);

/// p_m = tr(rho_0^A E_m) with rho_0^A = I/d, the marginal of the shared pair.
RealVector alice_outcome_distribution(const Povm& povm);

/// Bob's conditional state tr_A(rho_0^AB (E_m (x) I)) / p_m for outcome m
/// (0-based). Throws RspError when p_m <= 1e-12.
DensityOperator post_measurement_state(const PureState& phi, const RspProtocol& proto,
                                       const Povm& povm, int m);

/// u rho u^dag
DensityOperator bob_correct(const DensityOperator& rho, const UnitaryOperator& u);

struct RspTranscript {
  PureState input;
  int outcome = 1;  // 1..n
  double outcome_probability = 0.0;
  DensityOperator bob_before;
  DensityOperator bob_after;
  double fidelity = 0.0;
  double classical_cost_bits = 0.0;
};

/// One protocol run. The outcome is drawn by inverse CDF from Alice's exact
/// outcome distribution using `rng`.
RspTranscript run_rsp(const PureState& phi, const RspProtocol& proto, Rng& rng);
RspTranscript run_rsp(const PureState& phi, const RspProtocol& proto, std::uint64_t seed);

/// Post-correction fidelity for every outcome with p_m > 1e-12 (others are
/// reported as nullopt).
std::vector<std::optional<double>> branch_fidelities(const PureState& phi, const RspProtocol& proto);

/// Clock-and-shift unitary  diag(e^{2 pi i p k / d}) * (|k> -> |k + x mod d>).
UnitaryOperator shift_operator(int p, int x, int d);

/// All d^2 shift operators, ordered m = p*d + x, with uniform probabilities.
RspProtocol shift_family(int d);

/// {I, sigma_x, sigma_y, sigma_z}
std::vector<UnitaryOperator> pauli_unitaries();

}  // namespace rsplab
