#pragma once

#include "qeo/eigensolver.hpp"
#include "qeo/lattice.hpp"
#include "qeo/trig_field.hpp"

#include <numbers>
#include <vector>

namespace qeo {

/// Periodic approximation baseline for the 1D photonic quasicrystal
/// alpha(x) = 1/2 (cos(s x) + cos(s beta x)) + 1, beta = (sqrt 5 - 1) / 2.
///
/// beta is replaced by a rational m / (2L); the coefficient becomes periodic and
/// the problem is solved on one supercell with the same Fourier machinery as the
/// projection method, in one torus dimension.

enum class NumeratorRule { Floor, Nearest };

/// Which periodic coefficient replaces alpha.
///   AsPrinted:  cos(s x) + cos(s r x) + 1  (no 1/2; takes negative values)
///   HalfScaled: 1/2 (cos(s x) + cos(s r x)) + 1
enum class PamCoefficient { AsPrinted, HalfScaled };

inline constexpr double kGoldenConjugate = 0.6180339887498948482;  // (sqrt 5 - 1) / 2

struct RationalApproximation {
  long long L = 0;
  long long numerator = 0;    // m, applied to (sqrt 5 - 1) L
  double e_def = 0.0;         // |beta - m / (2L)|
  double e_scaled = 0.0;      // |(sqrt 5 - 1) L - m| = 2L e_def
  long long reduced_num = 0;  // p in m / (2L) = p / q, lowest terms
  long long reduced_den = 0;  // q
};

RationalApproximation diophantine_error(long long L, NumeratorRule rule = NumeratorRule::Nearest);

/// Denominators L <= Lmax at which e_def reaches a new strict minimum.
std::vector<long long> best_denominators(long long Lmax, NumeratorRule rule = NumeratorRule::Nearest);

struct PamOptions {
  NumeratorRule rule = NumeratorRule::Nearest;
  PamCoefficient variant = PamCoefficient::HalfScaled;
  /// Physical frequency of the first lattice (2 pi matches P = 2 pi (1, beta)).
  double frequency_scale = 2.0 * std::numbers::pi;
  double tol = 1e-10;
};

/// The supercell problem: torus dimension 1, P = s / q, parent
/// A(y) = c (cos(q y) + cos(p y)) + 1, discretized with q N modes so the
/// frequency cutoff matches the projection method at the same N.
struct PamProblem {
  RationalApproximation approx;
  TrigField coefficient;
  ProjectionMatrix P;
  int modes;
};

PamProblem pam_problem(long long L, int N, const PamOptions& opts = {});

/// Smallest m eigenpairs of the supercell operator (dense real symmetric
/// factorization). Residuals are verified through the FFT apply.
EigenResult pam_solve(const PamProblem& problem, int m, double tol = 1e-10);
/// Every supercell eigenpair with eigenvalue <= upper.
EigenResult pam_solve_below(const PamProblem& problem, double upper, double tol = 1e-10);
EigenResult pam_solve(long long L, int N, int m, const PamOptions& opts = {});

/// Carries a projection-method coefficient vector on K_N^2 to supercell
/// indices through k -> q k_1 + p k_2 (the rational collapse of P k).
/// The result is L2-normalized; modes landing outside the supercell set are dropped.
CoefficientField collapse_to_supercell(const CoefficientField& pm_vector,
                                       const RationalApproximation& approx, int modes);

struct PamComparisonRow {
  double pm = 0.0;
  double pam = 0.0;
  double abs_diff = 0.0;
  double rel_diff = 0.0;
};

struct PamComparison {
  std::vector<PamComparisonRow> rows;
  double pm_seconds = 0.0;
  double pam_seconds = 0.0;
};

/// Pairs pm[j] with pam[j] for j < m; callers pass results already tracked to
/// the same states. Throws std::invalid_argument when either side has fewer
/// than m converged pairs.
PamComparison compare_pm_pam(const EigenResult& pm, const EigenResult& pam, int m);

}  // namespace qeo
