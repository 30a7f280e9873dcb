#include "rsplab/rsp_eq.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace rsplab {

namespace {

int dimension_of(std::span<const UnitaryOperator> unitaries) {
  if (unitaries.empty()) throw std::invalid_argument("unitary family is empty");
  const int d = unitaries.front().dim();
  for (const auto& u : unitaries) {
    if (u.dim() != d) throw std::invalid_argument("unitary family has mixed dimensions");
  }
  return d;
}

double residual_of(const RealMatrix& a, const RealVector& b, const RealVector& p) {
  return (a * p - b).norm();
}

// Least squares on the affine hull {q : sum q = 1} of the columns in `mask`.
// Returns nullopt when the minimizer leaves the nonnegative orthant.
std::optional<RealVector> fit_on_support(const RealMatrix& a, const RealVector& b, unsigned mask) {
  const int n = static_cast<int>(a.cols());
  std::vector<int> cols;
  for (int j = 0; j < n; ++j)
    if (mask & (1u << j)) cols.push_back(j);
  const int k = static_cast<int>(cols.size());

  RealVector q(k);
  if (k == 1) {
    q(0) = 1.0;
  } else {
    RealMatrix as(a.rows(), k);
    for (int c = 0; c < k; ++c) as.col(c) = a.col(cols[c]);
    // q = q0 + N z, with q0 the barycenter and N spanning {sum = 0}.
    const RealVector q0 = RealVector::Constant(k, 1.0 / k);
    RealMatrix null_basis = RealMatrix::Zero(k, k - 1);
    for (int c = 0; c < k - 1; ++c) {
      null_basis(c, c) = 1.0;
      null_basis(k - 1, c) = -1.0;
    }
    const RealMatrix reduced = as * null_basis;
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(reduced);
    cod.setThreshold(1e-12);
    const RealVector z = cod.solve(b - as * q0);
    q = q0 + null_basis * z;
  }
  if (q.minCoeff() < -kProbabilityEntryTolerance) return std::nullopt;

  RealVector p = RealVector::Zero(n);
  for (int c = 0; c < k; ++c) p(cols[c]) = std::max(q(c), 0.0);
  p /= p.sum();
  return p;
}

SimplexFit enumerate_supports(const RealMatrix& a, const RealVector& b) {
  const int n = static_cast<int>(a.cols());
  SimplexFit best;
  best.residual = std::numeric_limits<double>::infinity();
  const unsigned full = (1u << n) - 1u;
  // Smaller supports first; ties keep the sparsest solution.
  for (int size = 1; size <= n; ++size) {
    for (unsigned mask = 1; mask <= full; ++mask) {
      if (std::popcount(mask) != size) continue;
      auto p = fit_on_support(a, b, mask);
      if (!p) continue;
      const double r = residual_of(a, b, *p);
      if (r < best.residual - 1e-15) {
        best.residual = r;
        best.p = std::move(*p);
      }
    }
  }
  return best;
}

SimplexFit projected_gradient(const RealMatrix& a, const RealVector& b) {
  constexpr int kMaxIterations = 100000;
  constexpr double kRelativeConvergence = 1e-12;

  const int n = static_cast<int>(a.cols());
  const RealMatrix ata = a.transpose() * a;
  const RealVector atb = a.transpose() * b;
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(ata, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;

  auto objective = [&](const RealVector& p) { return 0.5 * (a * p - b).squaredNorm(); };

  // FISTA with function-value restart.
  RealVector p = RealVector::Constant(n, 1.0 / n);
  RealVector y = p;
  double t = 1.0;
  double f_prev = objective(p);
  for (int it = 0; it < kMaxIterations; ++it) {
    const RealVector grad = ata * y - atb;
    RealVector next = project_to_simplex(y - step * grad);
    const double f_next = objective(next);
    const double change = (next - p).norm();
    if (f_next > f_prev) {
      // Restart momentum from the last iterate.
      y = p;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - p);
    t = t_next;
    p = std::move(next);
    f_prev = f_next;
    if (change <= kRelativeConvergence * std::max(1.0, p.norm()) || f_prev < 1e-32) break;
  }

  SimplexFit fit{p, residual_of(a, b, p)};

  // Polish on the detected support when it is small enough to solve exactly.
  unsigned mask = 0;
  int support = 0;
  for (int j = 0; j < n && j < 32; ++j) {
    if (p(j) > 1e-10) {
      mask |= (1u << j);
      ++support;
    }
  }
  if (n <= 32 && support > 0) {
    if (auto polished = fit_on_support(a, b, mask)) {
      const double r = residual_of(a, b, *polished);
      if (r < fit.residual) fit = SimplexFit{std::move(*polished), r};
    }
  }
  return fit;
}

}  // namespace

void check_probability_vector(const RealVector& p, std::size_t n) {
  if (static_cast<std::size_t>(p.size()) != n) {
    throw std::invalid_argument("probability vector has length " + std::to_string(p.size()) +
                                ", expected " + std::to_string(n));
  }
  if (n == 0) throw std::invalid_argument("probability vector is empty");
  if (p.minCoeff() < -kProbabilityEntryTolerance) {
    throw std::invalid_argument("probability vector has a negative entry");
  }
  if (std::abs(p.sum() - 1.0) > kProbabilitySumTolerance) {
    throw std::invalid_argument("probability vector does not sum to 1");
  }
}

RealVector project_to_simplex(const RealVector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

SimplexFit fit_on_simplex(const RealMatrix& a, const RealVector& b) {
  if (a.cols() == 0) throw std::invalid_argument("fit_on_simplex: no columns");
  if (a.rows() != b.size()) throw std::invalid_argument("fit_on_simplex: row count mismatch");
  if (a.cols() <= kEnumerationLimit) return enumerate_supports(a, b);
  return projected_gradient(a, b);
}

double rsp_residual(std::span<const UnitaryOperator> unitaries, const RealVector& p,
                    const PureState& phi) {
  const int d = dimension_of(unitaries);
  if (phi.dim() != d) throw std::invalid_argument("rsp_residual: state dimension mismatch");
  check_probability_vector(p, unitaries.size());
  ComplexMatrix sum = -ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  for (std::size_t m = 0; m < unitaries.size(); ++m) {
    const ComplexVector v = unitaries[m].adjoint() * phi.amplitudes();
    sum += p(static_cast<Eigen::Index>(m)) * (v * v.adjoint());
  }
  return sum.norm();
}

RealVector hermitian_coordinates(const ComplexMatrix& h) {
  const Eigen::Index d = h.rows();
  RealVector out(d * d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) out(k++) = h(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      out(k++) = std::numbers::sqrt2 * h(i, j).real();
      out(k++) = std::numbers::sqrt2 * h(i, j).imag();
    }
  }
  return out;
}

RealMatrix rsp_constraint_matrix(std::span<const UnitaryOperator> unitaries, const PureState& phi) {
  const int d = dimension_of(unitaries);
  if (phi.dim() != d) throw std::invalid_argument("rsp_constraint_matrix: state dimension mismatch");
  RealMatrix a(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(unitaries.size()));
  for (std::size_t m = 0; m < unitaries.size(); ++m) {
    const ComplexVector v = unitaries[m].adjoint() * phi.amplitudes();
    a.col(static_cast<Eigen::Index>(m)) = hermitian_coordinates(v * v.adjoint());
  }
  return a;
}

FeasibilityResult solve_probabilities(std::span<const UnitaryOperator> unitaries,
                                      const PureState& phi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_probabilities: tolerance must be positive");
  const int d = dimension_of(unitaries);
  const RealMatrix a = rsp_constraint_matrix(unitaries, phi);
  const RealVector b = hermitian_coordinates(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  SimplexFit fit = fit_on_simplex(a, b);

  FeasibilityResult result;
  result.tolerance = tol;
  result.min_residual = fit.residual;
  result.best_probabilities = fit.p;
  if (fit.residual <= tol) {
    result.status = FeasibilityStatus::Feasible;
    result.probabilities = std::move(fit.p);
  }
  return result;
}

PureState sample_state(Sampler sampler, int d, std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng(seed).split(index);
  switch (sampler) {
    case Sampler::Haar:
      return haar_random_state(d, rng);
    case Sampler::Equatorial: {
      if (d != 2) throw std::invalid_argument("equatorial sampler requires d = 2");
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      ComplexVector v(2);
      v << 1.0, std::polar(1.0, angle);
      return PureState(v / std::numbers::sqrt2);
    }
  }
  throw std::invalid_argument("unknown sampler");
}

namespace {

// Smallest |chi_i| of the Bloch vector of a qubit state.
double min_bloch_component(const PureState& phi) {
  const Complex a = phi[0];
  const Complex b = phi[1];
  const Complex cross = std::conj(a) * b;
  const double x = 2.0 * cross.real();
  const double y = 2.0 * cross.imag();
  const double z = std::norm(a) - std::norm(b);
  return std::min({std::abs(x), std::abs(y), std::abs(z)});
}

}  // namespace

ScanReport feasibility_scan(std::span<const UnitaryOperator> unitaries, const ScanOptions& options) {
  if (options.count < 1) throw std::invalid_argument("feasibility_scan: count must be at least 1");
  const int d = dimension_of(unitaries);
  if (options.generic_margin > 0.0 && d != 2) {
    throw std::invalid_argument("feasibility_scan: generic-state filter is defined for d = 2 only");
  }

  ScanReport report;
  report.n = static_cast<int>(unitaries.size());
  report.d = d;
  report.seed = options.seed;

  const std::uint64_t max_attempts = 100ull * static_cast<std::uint64_t>(options.count);
  int feasible = 0;
  double worst = -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t index = 0; report.count < options.count && index < max_attempts; ++index) {
    PureState phi = sample_state(options.sampler, d, options.seed, index);
    if (options.generic_margin > 0.0 && min_bloch_component(phi) <= options.generic_margin) {
      ++report.excluded;
      continue;
    }
    const FeasibilityResult r = solve_probabilities(unitaries, phi, options.tol);
    ++report.count;
    if (r.feasible()) ++feasible;
    best = std::min(best, r.min_residual);
    if (r.min_residual > worst) {
      worst = r.min_residual;
      report.worst_state = phi;
    }
  }
  if (report.count > 0) {
    report.feasible_fraction = static_cast<double>(feasible) / report.count;
    report.max_residual = worst;
    report.min_residual = best;
  }
  return report;
}

XMatrix build_x_matrix(std::span<const UnitaryOperator> unitaries, const RealVector& p) {
  const int d = dimension_of(unitaries);
  check_probability_vector(p, unitaries.size());
  XMatrix x;
  x.n = static_cast<int>(unitaries.size());
  x.d = d;
  x.entries.resize(x.n, static_cast<Eigen::Index>(d) * d);
  for (int m = 0; m < x.n; ++m) {
    const double scale = std::sqrt(d * std::max(p(m), 0.0));
    const ComplexMatrix& u = unitaries[m].matrix();
    for (int l = 0; l < d; ++l)
      for (int j = 0; j < d; ++j) x.entries(m, l * d + j) = scale * u(l, j);
  }
  return x;
}

ObliviousBoundReport oblivious_bound_report(std::span<const UnitaryOperator> unitaries,
                                            const RealVector& p) {
  constexpr double kIdentityTolerance = 1e-8;
  const XMatrix x = build_x_matrix(unitaries, p);
  const int d = x.d;
  const int d2 = d * d;

  ObliviousBoundReport report;
  report.n = x.n;
  report.d = d;
  report.gram = x.entries.adjoint() * x.entries;
  report.gram_deviation = (report.gram - ComplexMatrix::Identity(d2, d2)).norm();
  report.is_identity = report.gram_deviation <= kIdentityTolerance;
  report.bound_satisfied = x.n >= d2;

  if (report.is_identity && x.n == d2) {
    const ComplexMatrix outer = x.entries * x.entries.adjoint();
    report.xx_dagger_deviation = (outer - ComplexMatrix::Identity(x.n, x.n)).norm();
    report.uniform_deviation = (p.array() - 1.0 / d2).abs().maxCoeff();
    double trace_dev = 0.0;
    for (int m = 0; m < x.n; ++m) {
      for (int k = 0; k < x.n; ++k) {
        const Complex tr = hs_inner(unitaries[m].matrix(), unitaries[k].matrix());
        const double expected = (m == k) ? static_cast<double>(d) : 0.0;
        trace_dev = std::max(trace_dev, std::abs(tr - expected));
      }
    }
    report.trace_condition_deviation = trace_dev;
  }
  return report;
}

int completeness_rank(std::span<const UnitaryOperator> unitaries, const PureState& phi) {
  const int d = dimension_of(unitaries);
  if (phi.dim() != d) throw std::invalid_argument("completeness_rank: state dimension mismatch");
  ComplexMatrix cols(d, static_cast<Eigen::Index>(unitaries.size()));
  for (std::size_t m = 0; m < unitaries.size(); ++m) {
    cols.col(static_cast<Eigen::Index>(m)) = unitaries[m].adjoint() * phi.amplitudes();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(cols);
  const RealVector sv = svd.singularValues();
  return static_cast<int>((sv.array() > 1e-9).count());
}

}  // namespace rsplab
