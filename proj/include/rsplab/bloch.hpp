#pragma once

// Qubit (d = 2) specialization of the RSP equation.
//
// A qubit unitary u acts on Bloch vectors through the rotation R defined by
//   u^dag sigma_i u = sum_j R_{ji} sigma_j,
// so the state u^dag|phi> has Bloch vector R chi and the RSP equation reduces
// to  sum_m p_m R_m chi = 0.  Note R(u v) = R(v) R(u). Pauli matrices are the
// standard ones, |0> being the +1 eigenvector of sigma_z.

#include "rsplab/protocol.hpp"
#include "rsplab/qmath.hpp"
#include "rsplab/rsp_eq.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace rsplab {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

struct BlochVector {
  Vector3 chi = Vector3::Zero();

  double norm() const { return chi.norm(); }
};

/// Real 3x3 special-orthogonal matrix (R^T R = I and det R = 1 within 1e-9).
class RotationMatrix {
 public:
  explicit RotationMatrix(const Matrix3& r);
  static RotationMatrix identity() { return RotationMatrix(Matrix3::Identity()); }
  /// Rodrigues formula for a right-handed rotation by `angle` about `axis`.
  static RotationMatrix axis_angle(const Vector3& axis, double angle);

  const Matrix3& matrix() const { return r_; }
  Vector3 operator*(const Vector3& v) const { return r_ * v; }

 private:
  Matrix3 r_;
};

/// sigma_x, sigma_y, sigma_z
const std::array<ComplexMatrix, 3>& pauli_matrices();

/// chi_i = tr(rho sigma_i). Throws std::invalid_argument unless dim = 2.
BlochVector bloch_from_density(const DensityOperator& rho);
BlochVector bloch_from_state(const PureState& phi);
/// (I + chi . sigma) / 2. Requires |chi| <= 1.
DensityOperator density_from_bloch(const BlochVector& b);
/// A pure state with Bloch vector chi/|chi|.
PureState state_from_bloch(const BlochVector& b);

/// R_{ji} = tr(sigma_j u^dag sigma_i u) / 2.
RotationMatrix rotation_from_unitary(const UnitaryOperator& u);
std::vector<RotationMatrix> rotations_from_unitaries(std::span<const UnitaryOperator> unitaries);

/// ||sum_m p_m R_m chi||
double reduced_residual(std::span<const RotationMatrix> rotations, const RealVector& p,
                        const BlochVector& chi);

/// Bloch-side feasibility: min ||sum p_m R_m chi|| over the simplex. The
/// tolerance is compared against the Bloch residual.
FeasibilityResult solve_reduced(std::span<const RotationMatrix> rotations, const BlochVector& chi,
                                double tol);

/// Rotation axis (unit, sign-normalized so its largest-magnitude component is
/// positive) or nullopt for the identity. Half-turns use the dominant
/// eigenvector of (R + I)/2.
std::optional<Vector3> rotation_axis(const RotationMatrix& r);

/// Result of fixing the S R_m T freedom.
struct CanonicalForm {
  RotationMatrix s = RotationMatrix::identity();
  RotationMatrix t = RotationMatrix::identity();
  std::vector<RotationMatrix> rotations;  // S R_m T
  bool second_degenerate = false;  // R_2 R_1^T = I, x-axis constraint vacuous
  bool third_degenerate = false;   // R_3 axis unconstrained or already fixed

  /// State that plays the role of chi in the transformed equation: T^T chi.
  BlochVector remap(const BlochVector& chi) const;
};

/// Chooses S, T with S R_1 T = I, S R_2 T a rotation about x, and S R_3 T a
/// rotation about an axis in the xy plane. Constraints apply up to min(n, 3).
CanonicalForm canonicalize(std::span<const RotationMatrix> rotations);

struct N3Matrix {
  Matrix3 m;  // columns: chi, Rx(pi) chi, Ry(pi) chi
  double determinant = 0.0;
};

/// The reduced n = 3 system for the canonical rotations {I, Rx(pi), Ry(pi)};
/// its determinant is 4 chi_x chi_y chi_z.
N3Matrix n3_matrix(const BlochVector& chi);

/// {I, Rx(pi), Ry(pi)}
std::vector<RotationMatrix> canonical_n3_rotations();

inline constexpr double kEquatorTolerance = 1e-9;

/// d = 2, n = 2 protocol {I, sigma_z} with p = (1/2, 1/2), valid on the
/// equator chi_z = 0. Its probability rule throws RspError("state outside
/// sub-ensemble") when |chi_z| > 1e-9.
RspProtocol equatorial_protocol();

}  // namespace rsplab
