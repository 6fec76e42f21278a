#pragma once

#include "qeo/fft.hpp"
#include "qeo/lattice.hpp"
#include "qeo/trig_field.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qeo {

enum class OperatorMode { Dense, MatrixFree };

/// Largest mode count for which a dense matrix is assembled by default.
inline constexpr std::size_t kDefaultDenseLimit = std::size_t{1} << 14;

/// Thrown when a dense operation is requested above the configured size limit.
class DenseSizeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Discretization of the shifted form a_p(U, V) = (A P grad U, P grad V)_N + (U, V)_N
/// on the Fourier modes K_N^n.
///
/// In coefficient space this is the Hermitian matrix
///
///   Q_ij = A~_{(k_i - k_j) mod N} (P k_i).(P k_j) + delta_ij
///
/// where A~ are the pseudospectral (sampled + DFT) coefficients of the parent
/// coefficient A. Vectors are indexed in FrequencyIndexSet linearize order.
///
/// `apply` always uses the FFT route: 2d transforms of size N^n. A dense
/// operator additionally stores Q for direct factorization.
class SpectralOperator {
public:
  static SpectralOperator matrix_free(TrigField coefficient, ProjectionMatrix P, int N);
  /// Throws DenseSizeError when N^n exceeds dense_limit.
  static SpectralOperator dense(TrigField coefficient, ProjectionMatrix P, int N,
                                std::size_t dense_limit = kDefaultDenseLimit);

  OperatorMode mode() const noexcept { return dense_ ? OperatorMode::Dense : OperatorMode::MatrixFree; }
  const FrequencyIndexSet& index_set() const noexcept { return index_set_; }
  const ProjectionMatrix& projection() const noexcept { return P_; }
  const TrigField& coefficient() const noexcept { return coefficient_; }
  const CoefficientField& coefficient_spectrum() const noexcept { return spectrum_; }
  std::size_t size() const noexcept { return index_set_.size(); }

  /// (P k_i)_l for mode i and physical direction l.
  double frequency(std::size_t i, int l) const noexcept { return freq_[i * d_ + l]; }
  double frequency_norm_sq(std::size_t i) const noexcept;

  /// The assembled matrix. Throws std::logic_error on a matrix-free operator.
  const Eigen::MatrixXcd& matrix() const;

  /// Q in compressed column form; row i holds one entry per nonzero A~ mode.
  Eigen::SparseMatrix<Complex> sparse_matrix() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;
  CoefficientField apply(const CoefficientField& u) const;
  /// Y = Q X, column by column.
  Eigen::MatrixXcd apply_block(const Eigen::MatrixXcd& X) const;
  /// Re(u^H Q u) summed as ||u||^2 + sum over grid points of A |grad u|^2, which
  /// keeps relative accuracy near machine precision when A is positive.
  double energy(const Eigen::VectorXcd& u) const;

  /// q_ii = Re(A~_0) |P k_i|^2 + 1.
  std::vector<double> diagonal() const;
  /// sum_j |Q_ij|^2. Dense: read from the matrix. Matrix-free: FFT convolutions.
  std::vector<double> row_norms_squared() const;
  /// sum_j |Q_ij|^2 by direct O(N^2n) summation without storing Q.
  std::vector<double> row_norms_squared_direct() const;

  /// Matrix Market coordinate complex general export of Q (dense mode only).
  void write_matrix_market(std::ostream& os) const;

private:
  SpectralOperator(TrigField coefficient, ProjectionMatrix P, int N);
  Complex entry(std::size_t i, std::size_t j) const;
  void assemble();

  TrigField coefficient_;
  ProjectionMatrix P_;
  FrequencyIndexSet index_set_;
  CoefficientField spectrum_;
  int d_;
  std::vector<double> freq_;           // size * d, row-major
  std::vector<std::size_t> slot_;      // linearize index -> FFT slot
  std::vector<int> residues_;          // k_j mod N, size * n
  std::vector<Complex> spectrum_fft_;  // A~ in FFT slot order
  std::vector<Complex> grid_values_;   // A(y_j) in grid order
  std::shared_ptr<const FftPlan> plan_;
  std::optional<Eigen::MatrixXcd> dense_;
};

/// Builds the dense operator; same contract as SpectralOperator::dense.
SpectralOperator assemble_dense(const TrigField& coefficient, const ProjectionMatrix& P, int N,
                                std::size_t dense_limit = kDefaultDenseLimit);

}  // namespace qeo
