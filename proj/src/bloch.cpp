#include "rsplab/bloch.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace rsplab {

namespace {

constexpr double kRotationTolerance = 1e-9;

Vector3 normalize_sign(Vector3 v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0.0 ? Vector3(-v) : v;
}

// Unit vector orthogonal to `a`, built from the basis direction least aligned with it.
Vector3 any_orthogonal(const Vector3& a) {
  Eigen::Index k = 0;
  a.cwiseAbs().minCoeff(&k);
  Vector3 e = Vector3::Unit(k);
  return normalize_sign((e - e.dot(a) * a).normalized());
}

}  // namespace

RotationMatrix::RotationMatrix(const Matrix3& r) : r_(r) {
  if ((r.transpose() * r - Matrix3::Identity()).norm() > kRotationTolerance) {
    throw std::invalid_argument("RotationMatrix: matrix is not orthogonal");
  }
  if (std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw std::invalid_argument("RotationMatrix: determinant is not +1");
  }
}

RotationMatrix RotationMatrix::axis_angle(const Vector3& axis, double angle) {
  const Vector3 n = axis.normalized();
  Matrix3 k;
  k << 0.0, -n.z(), n.y(),
       n.z(), 0.0, -n.x(),
       -n.y(), n.x(), 0.0;
  return RotationMatrix(Matrix3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k);
}

const std::array<ComplexMatrix, 3>& pauli_matrices() {
  static const std::array<ComplexMatrix, 3> paulis = [] {
    using namespace std::complex_literals;
    std::array<ComplexMatrix, 3> s;
    for (auto& m : s) m.resize(2, 2);
    s[0] << 0.0, 1.0, 1.0, 0.0;
    s[1] << 0.0, -1.0i, 1.0i, 0.0;
    s[2] << 1.0, 0.0, 0.0, -1.0;
    return s;
  }();
  return paulis;
}

BlochVector bloch_from_density(const DensityOperator& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("bloch_from_density: dimension must be 2");
  const auto& s = pauli_matrices();
  BlochVector b;
  for (int i = 0; i < 3; ++i) b.chi(i) = (rho.matrix() * s[i]).trace().real();
  return b;
}

BlochVector bloch_from_state(const PureState& phi) {
  return bloch_from_density(DensityOperator::from_pure(phi));
}

DensityOperator density_from_bloch(const BlochVector& b) {
  if (b.norm() > 1.0 + kStateTolerance) throw std::invalid_argument("density_from_bloch: |chi| > 1");
  const auto& s = pauli_matrices();
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  for (int i = 0; i < 3; ++i) m += b.chi(i) * s[i];
  return DensityOperator(0.5 * m);
}

PureState state_from_bloch(const BlochVector& b) {
  const double r = b.norm();
  if (!(r > 0.0)) throw std::invalid_argument("state_from_bloch: zero Bloch vector");
  const Vector3 n = b.chi / r;
  // cos(theta/2)|0> + e^{i varphi} sin(theta/2)|1>
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double varphi = std::atan2(n.y(), n.x());
  ComplexVector v(2);
  v << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), varphi);
  return PureState::normalized(v);
}

RotationMatrix rotation_from_unitary(const UnitaryOperator& u) {
  if (u.dim() != 2) throw std::invalid_argument("rotation_from_unitary: dimension must be 2");
  const auto& s = pauli_matrices();
  Matrix3 r;
  for (int i = 0; i < 3; ++i) {
    const ComplexMatrix conj = u.adjoint() * s[i] * u.matrix();
    for (int j = 0; j < 3; ++j) r(j, i) = 0.5 * (s[j] * conj).trace().real();
  }
  return RotationMatrix(r);
}

std::vector<RotationMatrix> rotations_from_unitaries(std::span<const UnitaryOperator> unitaries) {
  std::vector<RotationMatrix> out;
  out.reserve(unitaries.size());
  for (const auto& u : unitaries) out.push_back(rotation_from_unitary(u));
  return out;
}

double reduced_residual(std::span<const RotationMatrix> rotations, const RealVector& p,
                        const BlochVector& chi) {
  check_probability_vector(p, rotations.size());
  Vector3 sum = Vector3::Zero();
  for (std::size_t m = 0; m < rotations.size(); ++m) sum += p(static_cast<Eigen::Index>(m)) * (rotations[m] * chi.chi);
  return sum.norm();
}

FeasibilityResult solve_reduced(std::span<const RotationMatrix> rotations, const BlochVector& chi,
                                double tol) {
  if (rotations.empty()) throw std::invalid_argument("solve_reduced: no rotations");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_reduced: tolerance must be positive");
  RealMatrix a(3, static_cast<Eigen::Index>(rotations.size()));
  for (std::size_t m = 0; m < rotations.size(); ++m) a.col(static_cast<Eigen::Index>(m)) = rotations[m] * chi.chi;
  SimplexFit fit = fit_on_simplex(a, RealVector::Zero(3));

  FeasibilityResult r;
  r.tolerance = tol;
  r.min_residual = fit.residual;
  r.best_probabilities = fit.p;
  if (fit.residual <= tol) {
    r.status = FeasibilityStatus::Feasible;
    r.probabilities = std::move(fit.p);
  }
  return r;
}

std::optional<Vector3> rotation_axis(const RotationMatrix& rot) {
  const Matrix3& r = rot.matrix();
  if ((r - Matrix3::Identity()).norm() <= kRotationTolerance) return std::nullopt;
  const Vector3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (skew.norm() > 1e-7) return normalize_sign(skew.normalized());
  // Half-turn: (R + I)/2 is the projector onto the axis.
  const Matrix3 proj = 0.25 * (r + r.transpose()) + 0.5 * Matrix3::Identity();
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(proj);
  return normalize_sign(eig.eigenvectors().col(2).normalized());
}

BlochVector CanonicalForm::remap(const BlochVector& chi) const {
  return BlochVector{t.matrix().transpose() * chi.chi};
}

CanonicalForm canonicalize(std::span<const RotationMatrix> rotations) {
  CanonicalForm out;
  if (rotations.empty()) return out;
  const Matrix3 r1_inv = rotations[0].matrix().transpose();

  std::optional<Vector3> first_axis;
  std::optional<Vector3> second_axis;
  if (rotations.size() >= 2) {
    first_axis = rotation_axis(RotationMatrix(rotations[1].matrix() * r1_inv));
    out.second_degenerate = !first_axis.has_value();
  }
  if (rotations.size() >= 3) {
    second_axis = rotation_axis(RotationMatrix(rotations[2].matrix() * r1_inv));
  }

  Matrix3 s = Matrix3::Identity();
  if (first_axis) {
    const Vector3 row1 = *first_axis;
    Vector3 row2;
    const Vector3 perp = second_axis ? Vector3(*second_axis - second_axis->dot(row1) * row1) : Vector3::Zero();
    if (second_axis && perp.norm() > kRotationTolerance) {
      row2 = normalize_sign(perp.normalized());
    } else {
      out.third_degenerate = rotations.size() >= 3;
      row2 = any_orthogonal(row1);
    }
    s.row(0) = row1.transpose();
    s.row(1) = row2.transpose();
    s.row(2) = row1.cross(row2).transpose();
  } else if (second_axis) {
    // R_2 gives no constraint; put R_3's axis on x.
    const Vector3 row1 = *second_axis;
    const Vector3 row2 = any_orthogonal(row1);
    s.row(0) = row1.transpose();
    s.row(1) = row2.transpose();
    s.row(2) = row1.cross(row2).transpose();
  } else if (rotations.size() >= 3) {
    out.third_degenerate = true;
  }

  out.s = RotationMatrix(s);
  out.t = RotationMatrix(r1_inv * s.transpose());
  out.rotations.reserve(rotations.size());
  for (const auto& r : rotations) out.rotations.emplace_back(s * r.matrix() * out.t.matrix());
  return out;
}

std::vector<RotationMatrix> canonical_n3_rotations() {
  return {RotationMatrix::identity(), RotationMatrix::axis_angle(Vector3::UnitX(), std::numbers::pi),
          RotationMatrix::axis_angle(Vector3::UnitY(), std::numbers::pi)};
}

N3Matrix n3_matrix(const BlochVector& chi) {
  const double x = chi.chi.x(), y = chi.chi.y(), z = chi.chi.z();
  N3Matrix out;
  out.m << x, x, -x,
           y, -y, y,
           z, -z, -z;
  const Matrix3& m = out.m;
  // Cofactor expansion along the first row.
  out.determinant = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                    m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                    m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  return out;
}

RspProtocol equatorial_protocol() {
  std::vector<UnitaryOperator> us{UnitaryOperator::identity(2), pauli_unitaries()[3]};
  StateDependentRule rule;
  rule.closed_form = [](const PureState& phi) -> RealVector {
    const double chi_z = std::norm(phi[0]) - std::norm(phi[1]);
    if (std::abs(chi_z) > kEquatorTolerance) throw RspError("state outside sub-ensemble");
    return RealVector::Constant(2, 0.5);
  };
  return RspProtocol(std::move(us), std::move(rule));
}

}  // namespace rsplab
