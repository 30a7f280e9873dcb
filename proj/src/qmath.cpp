#include "rsplab/qmath.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsplab {

namespace {

std::string describe_dims(const ComplexMatrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

}  // namespace

PureState::PureState(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw std::invalid_argument("PureState: empty amplitude vector");
  const double norm = amps_.norm();
  if (std::abs(norm * norm - 1.0) > kStateTolerance) {
    throw std::invalid_argument("PureState: amplitudes are not normalized");
  }
}

PureState PureState::normalized(const ComplexVector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("PureState: zero vector");
  return PureState(v / norm);
}

PureState PureState::basis(int d, int k) {
  if (d < 1 || k < 0 || k >= d) throw std::invalid_argument("PureState::basis: index out of range");
  ComplexVector v = ComplexVector::Zero(d);
  v(k) = 1.0;
  return PureState(std::move(v));
}

DensityOperator::DensityOperator(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument("DensityOperator: matrix must be square, got " + describe_dims(m));
  }
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kStateTolerance) throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
  m_ = 0.5 * (m + m.adjoint());
  if (std::abs(m_.trace().real() - 1.0) > kStateTolerance) {
    throw std::invalid_argument("DensityOperator: trace is not 1");
  }
  if (hermitian_eigenvalues(m_).minCoeff() < -kStateTolerance) {
    throw std::invalid_argument("DensityOperator: matrix is not positive semidefinite");
  }
}

DensityOperator DensityOperator::from_pure(const PureState& phi) {
  return DensityOperator(phi.projector());
}

DensityOperator DensityOperator::maximally_mixed(int d) {
  if (d < 1) throw std::invalid_argument("maximally_mixed: d must be positive");
  return DensityOperator(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

UnitaryOperator::UnitaryOperator(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw std::invalid_argument("UnitaryOperator: matrix must be square, got " + describe_dims(m_));
  }
  const auto dev = (m_.adjoint() * m_ - ComplexMatrix::Identity(m_.rows(), m_.cols())).norm();
  if (dev > kStateTolerance) throw std::invalid_argument("UnitaryOperator: matrix is not unitary");
}

UnitaryOperator UnitaryOperator::identity(int d) {
  return UnitaryOperator(ComplexMatrix::Identity(d, d));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double Rng::uniform() { return uniform_(engine_); }
double Rng::normal() { return normal_(engine_); }

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem keep, int d_a, int d_b) {
  if (d_a < 1 || d_b < 1 || m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(d_a) * d_b) {
    throw std::invalid_argument("partial_trace: operator is " + describe_dims(m) +
                                " but subsystem dimensions are " + std::to_string(d_a) + "x" +
                                std::to_string(d_b));
  }
  if (keep == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(d_a, d_a);
    for (int i = 0; i < d_a; ++i)
      for (int j = 0; j < d_a; ++j) out(i, j) = m.block(i * d_b, j * d_b, d_b, d_b).trace();
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(d_b, d_b);
  for (int i = 0; i < d_a; ++i) out += m.block(i * d_b, i * d_b, d_b, d_b);
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, Subsystem keep, int d_a, int d_b) {
  return DensityOperator(partial_trace(rho.matrix(), keep, d_a, d_b));
}

PureState max_entangled(int d) {
  if (d < 2) throw std::invalid_argument("max_entangled: d must be at least 2");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d) * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) v(k * d + k) = amp;
  return PureState(std::move(v));
}

PureState haar_random_state(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("haar_random_state: d must be positive");
  ComplexVector v(d);
  for (int k = 0; k < d; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(k) = Complex(re, im);
  }
  return PureState::normalized(v);
}

PureState haar_random_state(int d, std::uint64_t seed) {
  Rng rng(seed);
  return haar_random_state(d, rng);
}

UnitaryOperator haar_random_unitary(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("haar_random_unitary: d must be positive");
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return UnitaryOperator(std::move(q));
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hs_inner: shape mismatch " + describe_dims(a) + " vs " + describe_dims(b));
  }
  return (a.adjoint() * b).trace();
}

double overlap_trace(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("overlap_trace: dimension mismatch");
  return (rho.matrix() * sigma.matrix()).trace().real();
}

RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double von_neumann_entropy(const DensityOperator& rho) {
  const RealVector ev = hermitian_eigenvalues(rho.matrix());
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double lambda = ev(i);
    if (lambda > 1e-15) s -= lambda * std::log2(lambda);
  }
  return std::max(s, 0.0);
}

double purity(const DensityOperator& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

double fidelity(const PureState& phi, const DensityOperator& rho) {
  if (phi.dim() != rho.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Complex f = phi.amplitudes().dot(rho.matrix() * phi.amplitudes());
  return f.real();
}

}  // namespace rsplab
