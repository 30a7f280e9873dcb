#pragma once

// Dense complex linear algebra and quantum-state primitives.
//
// Conventions used throughout rsplab:
//   * basis vectors are indexed 0..d-1 (the textbook |k>, k = 1..d, maps to k-1);
//   * composite spaces are ordered with subsystem A as the major index, so the
//     product basis vector |i>|k> sits at position i*d_B + k.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rsplab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kStateTolerance = 1e-9;

/// Raised when a protocol-level precondition fails (no RSP solution, zero
/// probability outcome, state outside a protocol's sub-ensemble).
class RspError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unit-norm vector of amplitudes.
class PureState {
 public:
  /// Throws std::invalid_argument unless |amplitudes| = 1 within 1e-9.
  explicit PureState(ComplexVector amplitudes);

  /// Scales a nonzero vector to unit norm.
  static PureState normalized(const ComplexVector& v);
  static PureState basis(int d, int k);

  int dim() const { return static_cast<int>(amps_.size()); }
  const ComplexVector& amplitudes() const { return amps_; }
  Complex operator[](int k) const { return amps_(k); }

  /// |phi><phi|
  ComplexMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  ComplexVector amps_;
};

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityOperator {
 public:
  /// Validates Hermiticity (max |M - M^dag| <= 1e-9), unit trace (1e-9) and
  /// minimum eigenvalue >= -1e-9. The stored matrix is the Hermitian part.
  explicit DensityOperator(const ComplexMatrix& m);

  static DensityOperator from_pure(const PureState& phi);
  static DensityOperator maximally_mixed(int d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  ComplexMatrix m_;
};

class UnitaryOperator {
 public:
  /// Throws std::invalid_argument unless ||U^dag U - I||_F <= 1e-9.
  explicit UnitaryOperator(ComplexMatrix m);

  static UnitaryOperator identity(int d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  ComplexMatrix adjoint() const { return m_.adjoint(); }

 private:
  ComplexMatrix m_;
};

// Seeded pseudo-random source. `split(i)` derives an independent stream for
// sample i, so batch drivers can fan out without sharing engine state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t index) const;

  double uniform();
  double normal();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

enum class Subsystem { A, B };

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// Partial trace of an arbitrary operator on C^{d_a} (x) C^{d_b}, keeping
/// `keep`. Throws std::invalid_argument on dimension mismatch.
ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem keep, int d_a,
                            int d_b);
DensityOperator partial_trace(const DensityOperator& rho, Subsystem keep,
                              int d_a, int d_b);

/// (1/sqrt(d)) sum_k |k>|k>, a state of dimension d*d. Requires d >= 2.
PureState max_entangled(int d);

/// d i.i.d. standard complex Gaussians, normalized.
PureState haar_random_state(int d, Rng& rng);
PureState haar_random_state(int d, std::uint64_t seed);

/// QR of a complex Ginibre matrix with the R-diagonal phases divided out.
UnitaryOperator haar_random_unitary(int d, Rng& rng);

/// tr(a^dag b). Throws std::invalid_argument on shape mismatch.
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Re tr(rho sigma). A value of 1 certifies both are the same pure state.
double overlap_trace(const DensityOperator& rho, const DensityOperator& sigma);

/// Entropy in bits, with 0 log 0 := 0.
double von_neumann_entropy(const DensityOperator& rho);

/// tr(rho^2)
double purity(const DensityOperator& rho);

/// <phi| rho |phi>
double fidelity(const PureState& phi, const DensityOperator& rho);

/// Eigenvalues of the Hermitian part of `m`, ascending.
RealVector hermitian_eigenvalues(const ComplexMatrix& m);

}  // namespace rsplab
