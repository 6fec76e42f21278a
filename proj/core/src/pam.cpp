#include "qeo/pam.hpp"

#include "qeo/spectral_operator.hpp"

#include <Eigen/Dense>

#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qeo {

RationalApproximation diophantine_error(long long L, NumeratorRule rule) {
  if (L < 1) throw std::invalid_argument("diophantine_error: L must be positive");
  const long double two_beta = std::sqrt(5.0L) - 1.0L;
  const long double x = two_beta * static_cast<long double>(L);
  const long double m = rule == NumeratorRule::Floor ? std::floor(x) : std::nearbyint(x);

  RationalApproximation r;
  r.L = L;
  r.numerator = static_cast<long long>(m);
  const long double scaled = std::fabs(x - m);
  r.e_scaled = static_cast<double>(scaled);
  r.e_def = static_cast<double>(scaled / (2.0L * L));
  const long long den = 2 * L;
  const long long g = std::gcd(r.numerator, den);
  r.reduced_num = r.numerator / g;
  r.reduced_den = den / g;
  return r;
}

std::vector<long long> best_denominators(long long Lmax, NumeratorRule rule) {
  if (Lmax < 1) throw std::invalid_argument("best_denominators: Lmax must be positive");
  std::vector<long long> records;
  double best = std::numeric_limits<double>::infinity();
  for (long long L = 1; L <= Lmax; ++L) {
    const double e = diophantine_error(L, rule).e_def;
    if (e < best) {
      best = e;
      records.push_back(L);
    }
  }
  return records;
}

PamProblem pam_problem(long long L, int N, const PamOptions& opts) {
  if (N < 3) throw std::invalid_argument("pam_problem: N must be at least 3");
  const RationalApproximation approx = diophantine_error(L, opts.rule);
  const long long q = approx.reduced_den;
  const long long p = approx.reduced_num;
  const long long modes = q * N;
  if (modes > std::numeric_limits<int>::max() / 2)
    throw std::invalid_argument("pam_problem: supercell too large");

  const double c = opts.variant == PamCoefficient::AsPrinted ? 1.0 : 0.5;
  TrigField A(1);
  A.add_term({0}, 1.0);
  A.add_cosine({static_cast<int>(q)}, c);
  A.add_cosine({static_cast<int>(p)}, c);

  ProjectionMatrix P(1, 1, {opts.frequency_scale / static_cast<double>(q)});
  return PamProblem{approx, std::move(A), std::move(P), static_cast<int>(modes)};
}

namespace {

// Z <- H(0) H(1) ... H(D-2) Z for the reflectors dsytrd('L') leaves below the
// subdiagonal of a. Applied one reflector at a time (matrix-vector work only):
// the blocked LAPACK back-transformation goes through DTRMM, which some
// OpenBLAS builds (0.3.20 on SkylakeX) compute incorrectly.
void back_transform(const Eigen::MatrixXd& a, const std::vector<double>& tau, Eigen::MatrixXd& z) {
  const Eigen::Index D = a.rows();
  Eigen::VectorXd v(D);
  Eigen::RowVectorXd wt(z.cols());
  for (Eigen::Index i = D - 2; i >= 0; --i) {
    const double t = tau[static_cast<std::size_t>(i)];
    if (t == 0.0) continue;
    const Eigen::Index len = D - i - 1;
    v.head(len) = a.col(i).tail(len);
    v[0] = 1.0;
    auto rows = z.bottomRows(len);
    wt.noalias() = v.head(len).transpose() * rows;
    rows.noalias() -= (t * v.head(len)) * wt;
  }
}

// range 'I' takes pairs 1..m; range 'V' takes every eigenvalue <= upper.
EigenResult pam_dense_solve(const PamProblem& problem, char range, int m, double upper,
                            double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto op = SpectralOperator::matrix_free(problem.coefficient, problem.P, problem.modes);
  const std::size_t D = op.size();
  if (range == 'I' && (m < 1 || static_cast<std::size_t>(m) > D))
    throw std::invalid_argument("pam_solve: pair count out of range");
  if (range == 'V') m = static_cast<int>(D);

  // The coefficient is a cosine series, so A~ is real and Q is real symmetric.
  const auto& set = op.index_set();
  const int Nd = set.grid_size();
  std::vector<double> spectrum(Nd);
  for (std::size_t i = 0; i < D; ++i) {
    const int k = set.delinearize(i)[0];
    spectrum[static_cast<std::size_t>(((k % Nd) + Nd) % Nd)] = op.coefficient_spectrum()[i].real();
  }
  Eigen::MatrixXd a(D, D);
  for (std::size_t j = 0; j < D; ++j) {
    for (std::size_t i = j; i < D; ++i) {
      const long long diff = static_cast<long long>(i) - static_cast<long long>(j);
      double q = spectrum[static_cast<std::size_t>(((diff % Nd) + Nd) % Nd)] * op.frequency(i, 0) *
                 op.frequency(j, 0);
      if (i == j) q += 1.0;
      a(i, j) = q;  // lower triangle
    }
  }

  const auto Dl = static_cast<lapack_int>(D);
  std::vector<double> diag(D), off(D > 1 ? D - 1 : 1), tau(D > 1 ? D - 1 : 1);
  lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', Dl, a.data(), Dl, diag.data(), off.data(), tau.data());
  if (info != 0) throw std::runtime_error("pam_solve: dsytrd failed, info=" + std::to_string(info));

  std::vector<double> w(D);
  std::vector<lapack_int> block(D), split(D);
  lapack_int found = 0, nsplit = 0;
  info = LAPACKE_dstebz(range, 'B', Dl, -std::numeric_limits<double>::max(), upper, 1, m,
                        2.0 * LAPACKE_dlamch('S'), diag.data(), off.data(), &found, &nsplit, w.data(),
                        block.data(), split.data());
  if (info != 0) throw std::runtime_error("pam_solve: dstebz failed, info=" + std::to_string(info));

  Eigen::MatrixXd z(D, std::max<lapack_int>(found, 1));
  if (found > 0) {
    std::vector<lapack_int> failed(found);
    info = LAPACKE_dstein(LAPACK_COL_MAJOR, Dl, diag.data(), off.data(), found, w.data(), block.data(),
                          split.data(), z.data(), Dl, failed.data());
    if (info < 0) throw std::runtime_error("pam_solve: dstein failed, info=" + std::to_string(info));
    back_transform(a, tau, z);
  }
  // dstebz groups eigenvalues by split block; restore global ascending order.
  std::vector<lapack_int> order(static_cast<std::size_t>(found));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](lapack_int x, lapack_int y) { return w[x] < w[y]; });

  EigenResult res;
  for (lapack_int j : order) {
    std::vector<Complex> v(D);
    for (std::size_t i = 0; i < D; ++i) v[i] = z(static_cast<Eigen::Index>(i), j);
    CoefficientField u(set, std::move(v));
    const double r = residual_norm(op, u, w[j]);
    normalize(u, problem.P, Normalization::L2);
    res.eigenvalues.push_back(w[j]);
    res.eigenvectors.push_back(std::move(u));
    res.residual_norms.push_back(r);
    res.converged.push_back(r <= tol);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

EigenResult pam_solve(const PamProblem& problem, int m, double tol) {
  return pam_dense_solve(problem, 'I', m, 0.0, tol);
}

EigenResult pam_solve_below(const PamProblem& problem, double upper, double tol) {
  return pam_dense_solve(problem, 'V', 0, upper, tol);
}

EigenResult pam_solve(long long L, int N, int m, const PamOptions& opts) {
  return pam_solve(pam_problem(L, N, opts), m, opts.tol);
}

CoefficientField collapse_to_supercell(const CoefficientField& pm_vector,
                                       const RationalApproximation& approx, int modes) {
  if (pm_vector.dim() != 2)
    throw std::invalid_argument("collapse_to_supercell: expected a two-dimensional torus vector");
  FrequencyIndexSet target(modes, 1);
  CoefficientField out(target);
  const auto& set = pm_vector.index_set();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const MultiIndex k = set.delinearize(i);
    const long long j = approx.reduced_den * k[0] + approx.reduced_num * k[1];
    const int jj = static_cast<int>(j);
    if (j == jj && target.contains(std::span<const int>(&jj, 1)))
      out[target.linearize(std::span<const int>(&jj, 1))] += pm_vector[i];
  }
  const double nrm = l2_norm(out);
  if (nrm > 0.0)
    for (Complex& c : out.coeffs()) c /= nrm;
  return out;
}

PamComparison compare_pm_pam(const EigenResult& pm, const EigenResult& pam, int m) {
  auto converged_prefix = [m](const EigenResult& r) {
    if (r.size() < static_cast<std::size_t>(m)) return false;
    for (int j = 0; j < m; ++j)
      if (!r.converged[j]) return false;
    return true;
  };
  if (!converged_prefix(pm) || !converged_prefix(pam))
    throw std::invalid_argument("compare_pm_pam: fewer than " + std::to_string(m) +
                                " converged pairs");
  PamComparison out;
  out.pm_seconds = pm.seconds;
  out.pam_seconds = pam.seconds;
  for (int j = 0; j < m; ++j) {
    PamComparisonRow row;
    row.pm = pm.eigenvalues[j];
    row.pam = pam.eigenvalues[j];
    row.abs_diff = std::abs(row.pm - row.pam);
    row.rel_diff = row.abs_diff / std::abs(row.pm);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace qeo
