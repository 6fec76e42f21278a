#include "qeo/eigensolver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace qeo {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CoefficientField to_field(const FrequencyIndexSet& set, const VectorXcd& v) {
  return CoefficientField(set, std::vector<Complex>(v.data(), v.data() + v.size()));
}

MatrixXcd hermitian_part(const MatrixXcd& H) { return 0.5 * (H + H.adjoint()); }

// Orthonormalizes the columns of B (and applies the same transform to AB) by
// eigendecomposition of the Gram matrix, dropping numerically dependent
// directions.
// Orthonormalizing transform for the columns of B, dropping near-dependent directions.
MatrixXcd svqb_transform(const MatrixXcd& B) {
  const MatrixXcd G = hermitian_part(B.adjoint() * B);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
  const VectorXd& s = es.eigenvalues();
  const double smax = s.maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-14 * smax && s[i] > 0.0) keep.push_back(i);
  MatrixXcd T(B.cols(), static_cast<Index>(keep.size()));
  for (Index c = 0; c < T.cols(); ++c)
    T.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(s[keep[c]]);
  return T;
}

void svqb(MatrixXcd& B, MatrixXcd& AB) {
  if (B.cols() == 0) return;
  const MatrixXcd T = svqb_transform(B);
  B = B * T;
  AB = AB * T;
}

// Removes the span of the orthonormal block X from B, twice for stability.
void project_out(const MatrixXcd& X, MatrixXcd& B) {
  for (int pass = 0; pass < 2; ++pass) B -= X * (X.adjoint() * B);
}

// Records the L2-unit vector u with its Rayleigh quotient. The quotient comes from
// the energy form rather than the Ritz value, whose rounding error scales with ||Q||.
void push_pair(const SpectralOperator& op, VectorXcd u, double ritz, const SolveOptions& opts,
               EigenResult& res) {
  u /= u.norm();
  const double gamma = op.coefficient().is_real() ? op.energy(u) : ritz;
  const double r = (op.apply(u) - gamma * u).norm();
  res.eigenvalues.push_back(gamma);
  res.eigenvectors.push_back(to_field(op.index_set(), u));
  res.residual_norms.push_back(r);
  res.converged.push_back(r <= opts.tol);
}

void finish_pairs(const SpectralOperator& op, const SolveOptions& opts, EigenResult& res) {
  std::vector<std::size_t> order(res.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return res.eigenvalues[a] < res.eigenvalues[b]; });
  EigenResult sorted;
  for (std::size_t j : order) {
    sorted.eigenvalues.push_back(res.eigenvalues[j]);
    sorted.eigenvectors.push_back(std::move(res.eigenvectors[j]));
    sorted.residual_norms.push_back(res.residual_norms[j]);
    sorted.converged.push_back(res.converged[j]);
  }
  res.eigenvalues = std::move(sorted.eigenvalues);
  res.eigenvectors = std::move(sorted.eigenvectors);
  res.residual_norms = std::move(sorted.residual_norms);
  res.converged = std::move(sorted.converged);
  for (auto& u : res.eigenvectors) normalize(u, op.projection(), opts.normalization);
  res.normalization = opts.normalization;
}

}  // namespace

bool EigenResult::all_converged() const noexcept {
  return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

DiagonalPreconditioner build_preconditioner(const SpectralOperator& op) {
  const auto diag = op.diagonal();
  const auto rows = op.row_norms_squared();
  DiagonalPreconditioner M;
  M.entries.resize(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (!(rows[i] > 0.0))
      throw std::domain_error("build_preconditioner: zero row norm at mode " + std::to_string(i));
    M.entries[i] = diag[i] / rows[i];
    if (!std::isfinite(M.entries[i]))
      throw std::domain_error("build_preconditioner: non-finite entry at mode " + std::to_string(i));
  }
  return M;
}

EigenResult solve_dense(const SpectralOperator& op, const SolveOptions& opts) {
  if (opts.pairs < 1 || !(opts.tol > 0.0)) throw std::invalid_argument("solve_dense: need pairs >= 1, tol > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const MatrixXcd& Q = op.matrix();
  const double qn = Q.norm();
  if ((Q - Q.adjoint()).norm() > 1e-12 * qn)
    throw std::invalid_argument("solve_dense: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian_part(Q));
  if (es.info() != Eigen::Success) throw std::runtime_error("solve_dense: eigendecomposition failed");

  const Index m = std::min<Index>(opts.pairs, Q.rows());
  EigenResult res;
  for (Index j = 0; j < m; ++j) push_pair(op, es.eigenvectors().col(j), es.eigenvalues()[j], opts, res);
  finish_pairs(op, opts, res);
  res.seconds = seconds_since(t0);
  return res;
}

struct FactorizedPreconditioner::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Complex>, Eigen::Lower> ldlt;
};

FactorizedPreconditioner::FactorizedPreconditioner(const SpectralOperator& op)
    : size_(op.size()) {
  auto impl = std::make_shared<Impl>();
  impl->ldlt.compute(op.sparse_matrix());
  if (impl->ldlt.info() != Eigen::Success)
    throw std::runtime_error("FactorizedPreconditioner: factorization failed");
  impl_ = std::move(impl);
}

MatrixXcd FactorizedPreconditioner::apply(const MatrixXcd& R) const { return impl_->ldlt.solve(R); }

namespace {

using BlockPreconditioner = std::function<MatrixXcd(const MatrixXcd&)>;

EigenResult lobpcg(const SpectralOperator& op, const BlockPreconditioner& precondition,
                   const SolveOptions& opts, std::span<const CoefficientField> start);

}  // namespace

EigenResult solve_iterative(const SpectralOperator& op, const DiagonalPreconditioner& M,
                            const SolveOptions& opts, std::span<const CoefficientField> start) {
  if (static_cast<std::size_t>(M.entries.size()) != op.size())
    throw std::invalid_argument("solve_iterative: preconditioner size mismatch");
  const VectorXd T = Eigen::Map<const VectorXd>(M.entries.data(), static_cast<Index>(op.size()));
  return lobpcg(
      op, [&T](const MatrixXcd& R) -> MatrixXcd { return T.asDiagonal() * R; }, opts, start);
}

EigenResult solve_iterative(const SpectralOperator& op, const FactorizedPreconditioner& M,
                            const SolveOptions& opts, std::span<const CoefficientField> start) {
  if (M.size() != op.size())
    throw std::invalid_argument("solve_iterative: preconditioner size mismatch");
  return lobpcg(op, [&M](const MatrixXcd& R) { return M.apply(R); }, opts, start);
}

namespace {

EigenResult lobpcg(const SpectralOperator& op, const BlockPreconditioner& precondition,
                   const SolveOptions& opts, std::span<const CoefficientField> start) {
  if (opts.pairs < 1 || !(opts.tol > 0.0))
    throw std::invalid_argument("solve_iterative: need pairs >= 1, tol > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const Index D = static_cast<Index>(op.size());

  const Index m = std::min<Index>(opts.pairs, D);
  Index b = opts.block_size > 0 ? opts.block_size : m + 4;
  b = std::clamp<Index>(b, m, D);

  EigenResult res;

  // The three-block basis [X W P] needs room; tiny problems go straight to a
  // full decomposition of the operator built from unit vectors.
  if (3 * b >= D) {
    const MatrixXcd Q = hermitian_part(op.apply_block(MatrixXcd::Identity(D, D)));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Q);
    for (Index j = 0; j < m; ++j) push_pair(op, es.eigenvectors().col(j), es.eigenvalues()[j], opts, res);
    finish_pairs(op, opts, res);
    res.seconds = seconds_since(t0);
    return res;
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXcd X(D, b);
  for (Index c = 0; c < b; ++c)
    for (Index r = 0; r < D; ++r) X(r, c) = Complex(normal(rng), normal(rng));
  for (Index c = 0; c < std::min<Index>(b, static_cast<Index>(start.size())); ++c) {
    if (start[c].size() != op.size())
      throw std::invalid_argument("solve_iterative: start vector size mismatch");
    X.col(c) = Eigen::Map<const VectorXcd>(start[c].coeffs().data(), D);
  }

  MatrixXcd AX = op.apply_block(X);
  svqb(X, AX);
  if (X.cols() < b) throw std::runtime_error("solve_iterative: degenerate initial block");

  VectorXd lambda(b);
  {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian_part(X.adjoint() * AX));
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    lambda = es.eigenvalues();
  }

  MatrixXcd P(D, 0);
  std::vector<Index> p_owner;  // which X column each P column was built for
  std::vector<double> rnorm(b, std::numeric_limits<double>::infinity());
  int iter = 0;
  int since_refresh = 0;
  [[maybe_unused]] double previous_lowest = lambda[0];
  // Stop once the worst wanted residual has not halved for this many
  // iterations: the tolerance is below the attainable floor.
  constexpr int kStallWindow = 150;
  // Residuals below this are rounding noise and are not expanded further.
  const auto diag = op.diagonal();
  const double floor =
      std::numeric_limits<double>::epsilon() * *std::max_element(diag.begin(), diag.end());
  const double limit = std::max(opts.tol, floor);
  double best_worst = std::numeric_limits<double>::infinity();
  int last_improvement = 0;

  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    MatrixXcd R = AX - X * lambda.asDiagonal();
    for (Index c = 0; c < b; ++c) rnorm[c] = R.col(c).norm();

    const bool wanted_done =
        std::all_of(rnorm.begin(), rnorm.begin() + m, [&](double r) { return r <= limit; });
    if (wanted_done || ++since_refresh >= 25) {
      // AX is carried by linear recombination; recompute it before trusting
      // a convergence decision and periodically against drift.
      AX = op.apply_block(X);
      since_refresh = 0;
      R = AX - X * lambda.asDiagonal();
      for (Index c = 0; c < b; ++c) rnorm[c] = R.col(c).norm();
      if (std::all_of(rnorm.begin(), rnorm.begin() + m, [&](double r) { return r <= limit; }))
        break;
    }

    const double worst = *std::max_element(rnorm.begin(), rnorm.begin() + m);
    if (worst < 0.5 * best_worst) {
      best_worst = worst;
      last_improvement = iter;
    } else if (iter - last_improvement > kStallWindow) {
      AX = op.apply_block(X);
      break;
    }

    std::vector<Index> active;
    for (Index c = 0; c < b; ++c)
      if (rnorm[c] > limit) active.push_back(c);
    if (active.empty()) break;

    const Index na = static_cast<Index>(active.size());
    MatrixXcd RA(D, na);
    for (Index a = 0; a < na; ++a) RA.col(a) = R.col(active[a]);

    std::vector<Index> p_keep;
    for (Index c = 0; c < P.cols(); ++c)
      if (std::find(active.begin(), active.end(), p_owner[c]) != active.end()) p_keep.push_back(c);

    const Index np = static_cast<Index>(p_keep.size());
    MatrixXcd B(D, na + np);
    B.leftCols(na) = precondition(RA);
    for (Index c = 0; c < np; ++c) B.col(na + c) = P.col(p_keep[c]);

    // A B is recomputed rather than carried through the projections: near
    // convergence the projected block is tiny and the carried product is noise.
    for (int pass = 0; pass < 2; ++pass) {
      project_out(X, B);
      if (B.cols() > 0) B = B * svqb_transform(B);
    }
    const MatrixXcd AB = op.apply_block(B);

    const Index nb = B.cols();
    MatrixXcd Z(D, b + nb), AZ(D, b + nb);
    Z << X, B;
    AZ << AX, AB;
    const MatrixXcd H = hermitian_part(Z.adjoint() * AZ);
    const MatrixXcd G = hermitian_part(Z.adjoint() * Z);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> ges(H, G);
    if (ges.info() != Eigen::Success) break;

    const MatrixXcd C = ges.eigenvectors().leftCols(b);
    lambda = ges.eigenvalues().head(b);
    const MatrixXcd CB = C.bottomRows(nb);
    X = Z * C;
    AX = AZ * C;
    P = B * CB;
    p_owner.resize(b);
    for (Index c = 0; c < b; ++c) p_owner[c] = c;

    // Rayleigh-Ritz over a basis that contains the previous X cannot raise the
    // smallest Ritz value.
    assert(lambda[0] <= previous_lowest + 1e-9 * std::max(1.0, std::abs(previous_lowest)));
    previous_lowest = lambda[0];
  }

  // Independent verification of each returned pair.
  for (Index j = 0; j < m; ++j) push_pair(op, X.col(j), lambda[j], opts, res);
  res.iterations = std::min(iter, opts.max_iterations);
  finish_pairs(op, opts, res);
  res.seconds = seconds_since(t0);
  return res;
}

}  // namespace

EigenResult solve(const SpectralOperator& op, const SolveOptions& opts) {
  if (opts.mode == SolveMode::Dense) return solve_dense(op, opts);
  if (opts.preconditioner == PreconditionerKind::Factorized)
    return solve_iterative(op, FactorizedPreconditioner(op), opts);
  return solve_iterative(op, build_preconditioner(op), opts);
}

void normalize(CoefficientField& u, const ProjectionMatrix& P, Normalization mode) {
  const double norm = mode == Normalization::L2 ? l2_norm(u) : sobolev_norm(u, P, 1.0);
  if (!(norm > 0.0)) throw std::invalid_argument("normalize: zero vector");
  std::size_t imax = 0;
  double amax = -1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  const Complex rot = std::conj(u[imax]) / (amax * norm);
  for (Complex& c : u.coeffs()) c *= rot;
  u[imax] = Complex(u[imax].real(), 0.0);
}

double residual_norm(const SpectralOperator& op, const CoefficientField& u, double gamma) {
  const VectorXcd v = Eigen::Map<const VectorXcd>(u.coeffs().data(), static_cast<Index>(u.size()));
  return (op.apply(v) - gamma * v).norm() / v.norm();
}

ConditionNumbers condition_numbers(const SpectralOperator& op, const DiagonalPreconditioner& M,
                                   bool include_one_norm) {
  const MatrixXcd& Q = op.matrix();
  if (static_cast<Index>(M.entries.size()) != Q.rows())
    throw std::invalid_argument("condition_numbers: preconditioner size mismatch");
  const VectorXd m = Eigen::Map<const VectorXd>(M.entries.data(), Q.rows());

  ConditionNumbers out;
  {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian_part(Q), Eigen::EigenvaluesOnly);
    const VectorXd a = es.eigenvalues().cwiseAbs();
    out.cond_Q = a.maxCoeff() / a.minCoeff();
  }
  const MatrixXcd MQ = m.asDiagonal() * Q;
  {
    // Singular values of MQ are square roots of the eigenvalues of (MQ)^H (MQ).
    const MatrixXcd gram = hermitian_part(MQ.adjoint() * MQ);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    const VectorXd s = es.eigenvalues();
    out.cond_MQ = std::sqrt(s.maxCoeff() / s.minCoeff());
  }
  if (include_one_norm) {
    auto one_norm = [](const MatrixXcd& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); };
    out.cond1_Q = one_norm(Q) * one_norm(Q.partialPivLu().inverse());
    out.cond1_MQ = one_norm(MQ) * one_norm(MQ.partialPivLu().inverse());
  }
  return out;
}

double preconditioner_residual(const SpectralOperator& op, const std::vector<double>& diagonal) {
  const MatrixXcd& Q = op.matrix();
  if (static_cast<Index>(diagonal.size()) != Q.rows())
    throw std::invalid_argument("preconditioner_residual: size mismatch");
  const VectorXd dv = Eigen::Map<const VectorXd>(diagonal.data(), Q.rows());
  const MatrixXcd DQ = dv.asDiagonal() * Q;
  return (DQ - MatrixXcd::Identity(Q.rows(), Q.cols())).norm();
}

}  // namespace qeo
