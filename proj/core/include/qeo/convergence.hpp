#pragma once

#include "qeo/eigensolver.hpp"
#include "qeo/experiment.hpp"
#include "qeo/pam.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qeo {

using ProgressFn = std::function<void(const std::string&)>;

/// Zero-padded copy of u on K_{N2}^n; every mode keeps its frequency.
/// Throws std::invalid_argument when N2 < N1.
CoefficientField embed_coefficients(const CoefficientField& u, int N2);

/// |<a, b>| / (|a| |b|) after embedding both on the larger grid.
double overlap(const CoefficientField& a, const CoefficientField& b);

struct TrackingResult {
  std::vector<int> match;         // current index per tracked reference state
  std::vector<double> overlaps;   // |<embed(u_N), u_ref>| per state
  std::vector<bool> ambiguous;    // overlap < kAmbiguousOverlap

  static constexpr double kAmbiguousOverlap = 0.5;
  bool any_ambiguous() const noexcept;
};

/// Greedy maximum-overlap assignment, largest overlaps first, each current
/// index used at most once. `states` selects reference indices (all by default).
TrackingResult track_eigenpairs(const EigenResult& reference, const EigenResult& current,
                                std::optional<std::vector<int>> states = std::nullopt);

/// min over phi of ||e^{i phi} embed(u_N) - u_ref||_2 for L2-unit inputs,
/// evaluated directly at the optimal phase phi = arg <u_N, u_ref>.
/// Throws std::invalid_argument on a zero vector.
double eigenfunction_error(const CoefficientField& u_ref, const CoefficientField& u_N);

/// Index of the constant mode state (gamma = 1, u = e_0) in r, if present.
std::optional<int> constant_state(const EigenResult& r, double tol = 1e-8);

struct StateRecord {
  int index = -1;              // position in the solve at this N
  double eigenvalue = 0.0;
  double shifted = 0.0;        // gamma - 1, eigenvalue of the operator without the +u term
  double eigenvalue_error = 0.0;
  double eigenfunction_error = 0.0;
  double overlap = 0.0;
  bool ambiguous = false;
  double residual = 0.0;
  bool converged = false;
};

struct ConvergenceRecord {
  int N = 0;
  std::vector<StateRecord> states;
  double seconds = 0.0;
  int iterations = 0;
  int pairs = 0;
};

struct ConvergenceStudy {
  std::string name;
  int coarse_N = 0;
  int reference_N = 0;
  double reference_tol = 0.0;        // tolerance the reference solve actually used
  std::vector<double> reference_eigenvalues;
  std::vector<double> coarse_eigenvalues;
  std::vector<double> coarse_to_reference_overlaps;
  EigenResult reference;            // tracked states only, in state order
  std::vector<ConvergenceRecord> records;
};

/// Picks the lowest numPairs states at the coarsest N (skipping the constant
/// state when configured) and follows them through every N in ascending
/// order up to referenceN, each grid tracked from the previous one. Errors
/// are recorded against the reference. Solves that miss the tolerance are
/// recorded with converged = false.
ConvergenceStudy run_convergence_study(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Solve at N with enough pairs that `targets` (tracked by overlap) match
/// unambiguously and sit well inside the computed window; pair counts double
/// until they do or the whole space is computed. `start` (any grid up to N)
/// warm-starts the iterative solver.
struct TrackedSolve {
  EigenResult result;
  TrackingResult tracking;
};
TrackedSolve solve_tracked(const ExperimentConfig& cfg, int N, const EigenResult& targets,
                           int initial_pairs, double tol, const ProgressFn& progress = {},
                           const std::vector<CoefficientField>& start = {});

struct ConditionRow {
  int N = 0;
  ConditionNumbers cond;
  double seconds = 0.0;
};

/// cond(Q) and cond(M Q) per N, dense. Throws DenseSizeError past the guard.
std::vector<ConditionRow> run_condition_report(const ExperimentConfig& cfg,
                                               const std::vector<int>& grid_sizes,
                                               bool include_one_norm = false,
                                               const ProgressFn& progress = {});

struct PamStudyRow {
  RationalApproximation approx;
  PamCoefficient variant = PamCoefficient::HalfScaled;
  int N = 0;
  std::vector<double> pam_eigenvalues;   // tracked states
  std::vector<double> gamma_errors;      // |gamma_PM - gamma_PAM| per state
  std::vector<double> overlaps;
  double pm_seconds = 0.0;
  double pam_seconds = 0.0;
};

/// PM reference states (Example 1 layout, n = 2) against PAM supercells.
/// Each PAM state is found by overlap with the collapsed PM eigenfunction
/// among all supercell eigenpairs below (1 + margin) max gamma_PM.
std::vector<PamStudyRow> run_pam_study(const EigenResult& pm_reference, double pm_seconds,
                                       const std::vector<long long>& Ls, int N,
                                       const PamOptions& opts, double margin = 0.1,
                                       const ProgressFn& progress = {});

}  // namespace qeo
