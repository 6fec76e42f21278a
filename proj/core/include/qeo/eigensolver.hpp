#pragma once

#include "qeo/spectral_operator.hpp"
#include "qeo/trig_field.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace qeo {

enum class Normalization { L2, H1P };
enum class SolveMode { Dense, Iterative };
enum class PreconditionerKind { Diagonal, Factorized };

/// Diagonal M minimizing ||M Q - I||_F over all diagonal matrices:
/// M_ii = q_ii / ||e_i^T Q||_2^2.
struct DiagonalPreconditioner {
  std::vector<double> entries;
};

DiagonalPreconditioner build_preconditioner(const SpectralOperator& op);

/// Exact Q^-1 through a sparse LDL^T factorization of the assembled operator.
/// Q has one nonzero per coefficient mode in each row, so this stays cheap for
/// coefficients with few Fourier terms on low-dimensional tori.
class FactorizedPreconditioner {
public:
  explicit FactorizedPreconditioner(const SpectralOperator& op);
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& R) const;
  std::size_t size() const noexcept { return size_; }

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::size_t size_ = 0;
};

struct SolveOptions {
  int pairs = 1;
  double tol = 1e-10;
  int max_iterations = 2000;
  int block_size = 0;  // 0 selects pairs + 4
  std::uint64_t seed = 0;
  SolveMode mode = SolveMode::Iterative;
  Normalization normalization = Normalization::L2;
  PreconditionerKind preconditioner = PreconditionerKind::Diagonal;
};

/// Ascending eigenpairs of Q. Residuals ||Q u - gamma u||_2 refer to the
/// L2-unit eigenvector, whatever normalization the stored vectors carry.
struct EigenResult {
  std::vector<double> eigenvalues;
  std::vector<CoefficientField> eigenvectors;
  std::vector<double> residual_norms;
  std::vector<bool> converged;
  int iterations = 0;
  Normalization normalization = Normalization::L2;
  double seconds = 0.0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  bool all_converged() const noexcept;
};

/// Full Hermitian eigendecomposition of the assembled matrix.
/// Throws std::invalid_argument if Q is not Hermitian to 1e-12 (relative, Frobenius).
EigenResult solve_dense(const SpectralOperator& op, const SolveOptions& opts);

/// Preconditioned block eigensolver (LOBPCG) built on the matrix-free apply.
/// Never throws on non-convergence: unconverged pairs are flagged instead.
/// `start` seeds the leading block columns (each of size op.size()); the rest are random.
EigenResult solve_iterative(const SpectralOperator& op, const DiagonalPreconditioner& M,
                            const SolveOptions& opts, std::span<const CoefficientField> start = {});
EigenResult solve_iterative(const SpectralOperator& op, const FactorizedPreconditioner& M,
                            const SolveOptions& opts, std::span<const CoefficientField> start = {});

/// Dispatches on opts.mode, building the opts.preconditioner kind when needed.
EigenResult solve(const SpectralOperator& op, const SolveOptions& opts);

/// Scales u to unit L2 (Parseval) or H^1_P norm and rotates its phase so the
/// largest-magnitude coefficient is real and positive.
void normalize(CoefficientField& u, const ProjectionMatrix& P, Normalization mode);

/// ||Q u - gamma u||_2 / ||u||_2 through an independent apply.
double residual_norm(const SpectralOperator& op, const CoefficientField& u, double gamma);

struct ConditionNumbers {
  double cond_Q = 0.0;   // 2-norm
  double cond_MQ = 0.0;  // 2-norm
  double cond1_Q = 0.0;  // 1-norm, only when requested
  double cond1_MQ = 0.0;
};

/// 2-norm condition numbers of Q and M Q (dense mode only). The 1-norm
/// variants cost an extra LU inverse each and are computed on request.
ConditionNumbers condition_numbers(const SpectralOperator& op, const DiagonalPreconditioner& M,
                                   bool include_one_norm = false);

/// ||D Q - I||_F for an arbitrary diagonal D (dense mode only).
double preconditioner_residual(const SpectralOperator& op, const std::vector<double>& diagonal);

}  // namespace qeo
