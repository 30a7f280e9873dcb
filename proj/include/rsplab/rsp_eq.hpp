#pragma once

// The RSP equation  sum_m p_m u_m^dag |phi><phi| u_m = I/d  as an executable
// object: residuals, feasibility over the probability simplex, the X-matrix
// (oblivious case) analysis and the message-count lower bounds.

#include "rsplab/qmath.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rsplab {

inline constexpr double kDefaultFeasibilityTolerance = 1e-7;

/// Tolerances on probability vectors: entries >= -1e-12, sum 1 within 1e-9.
inline constexpr double kProbabilityEntryTolerance = 1e-12;
inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Throws std::invalid_argument if `p` is not on the simplex (within the
/// tolerances above).
void check_probability_vector(const RealVector& p, std::size_t n);

// ---------------------------------------------------------------------------
// Least squares over the probability simplex:  min ||A p - b||_2, p >= 0,
// sum p = 1. For up to kEnumerationLimit columns every support subset is
// tried (exact); beyond that an accelerated projected-gradient iteration is
// used.

inline constexpr int kEnumerationLimit = 8;

struct SimplexFit {
  RealVector p;
  double residual = 0.0;
};

SimplexFit fit_on_simplex(const RealMatrix& a, const RealVector& b);

/// Euclidean projection onto {p >= 0, sum p = 1}.
RealVector project_to_simplex(const RealVector& v);

// ---------------------------------------------------------------------------

enum class FeasibilityStatus { Feasible, Infeasible };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  std::optional<RealVector> probabilities;  // present iff Feasible
  RealVector best_probabilities;            // the minimizer, always present
  double min_residual = 0.0;
  double tolerance = kDefaultFeasibilityTolerance;

  bool feasible() const { return status == FeasibilityStatus::Feasible; }
};

/// ||sum_m p_m u_m^dag |phi><phi| u_m - I/d||_F
double rsp_residual(std::span<const UnitaryOperator> unitaries, const RealVector& p,
                    const PureState& phi);

/// The d^2 real coordinates of a Hermitian matrix (diagonal, then sqrt(2)
/// times real and imaginary parts of the strict upper triangle), chosen so the
/// Euclidean norm of the coordinates equals the Frobenius norm of the matrix.
RealVector hermitian_coordinates(const ComplexMatrix& h);

/// Column m is hermitian_coordinates(u_m^dag |phi><phi| u_m).
RealMatrix rsp_constraint_matrix(std::span<const UnitaryOperator> unitaries, const PureState& phi);

FeasibilityResult solve_probabilities(std::span<const UnitaryOperator> unitaries,
                                      const PureState& phi,
                                      double tol = kDefaultFeasibilityTolerance);

// ---------------------------------------------------------------------------
// Sampled feasibility scans.

enum class Sampler { Haar, Equatorial };

struct ScanOptions {
  Sampler sampler = Sampler::Haar;
  int count = 100;
  double tol = kDefaultFeasibilityTolerance;
  std::uint64_t seed = 0;
  // d = 2 only: skip states whose Bloch vector lies within `generic_margin`
  // of the measure-zero set chi_x chi_y chi_z = 0. Zero disables the filter.
  double generic_margin = 0.0;
};

struct ScanReport {
  int n = 0;
  int d = 0;
  int count = 0;     // states actually solved
  int excluded = 0;  // states skipped by the generic-state filter
  double feasible_fraction = 0.0;
  double max_residual = 0.0;
  double min_residual = 0.0;
  std::optional<PureState> worst_state;  // largest minimal residual
  std::uint64_t seed = 0;
};

/// Draws one state for sample index `index`; depends only on (seed, index).
PureState sample_state(Sampler sampler, int d, std::uint64_t seed, std::uint64_t index);

ScanReport feasibility_scan(std::span<const UnitaryOperator> unitaries, const ScanOptions& options);

// ---------------------------------------------------------------------------
// Oblivious-case analysis.

/// X_{m; l*d+j} = sqrt(d p_m) <l|u_m|j>, an n x d^2 matrix.
struct XMatrix {
  int n = 0;
  int d = 0;
  ComplexMatrix entries;

  RealVector row_norms_squared() const { return entries.rowwise().squaredNorm(); }
};

XMatrix build_x_matrix(std::span<const UnitaryOperator> unitaries, const RealVector& p);

struct ObliviousBoundReport {
  int n = 0;
  int d = 0;
  ComplexMatrix gram;            // X^dag X
  double gram_deviation = 0.0;   // ||X^dag X - I||_F
  bool is_identity = false;      // gram_deviation <= 1e-8
  bool bound_satisfied = false;  // n >= d^2
  // Filled only when is_identity and n == d^2.
  std::optional<double> xx_dagger_deviation;      // ||X X^dag - I_n||_F
  std::optional<double> uniform_deviation;        // max |p_m - 1/d^2|
  std::optional<double> trace_condition_deviation;  // max |tr u_m^dag u_m' - d delta|
};

ObliviousBoundReport oblivious_bound_report(std::span<const UnitaryOperator> unitaries,
                                            const RealVector& p);

/// Rank (singular values > 1e-9) of the d x n matrix with columns u_m^dag|phi>.
int completeness_rank(std::span<const UnitaryOperator> unitaries, const PureState& phi);

}  // namespace rsplab
