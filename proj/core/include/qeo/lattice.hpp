#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qeo {

/// Integer frequency on the n-torus, k = (k_1, ..., k_n).
using MultiIndex = std::vector<int>;

/// Real d x n matrix P mapping torus frequencies to physical ones, lambda = P k.
///
/// Construction checks that P has full row rank d. Rational independence of
/// the columns is what makes the trace quasiperiodic, but floating point
/// cannot certify it, so it is carried only as a declared flag.
class ProjectionMatrix {
public:
  ProjectionMatrix(int d, int n, std::vector<double> row_major,
                   bool declared_rationally_independent = true);

  int physical_dim() const noexcept { return d_; }
  int torus_dim() const noexcept { return n_; }
  double operator()(int row, int col) const { return entries_[row * n_ + col]; }
  std::span<const double> entries() const noexcept { return entries_; }
  bool declared_rationally_independent() const noexcept { return declared_independent_; }

  /// lambda = P k. Throws std::invalid_argument on length mismatch.
  std::vector<double> frequency(std::span<const int> k) const;
  double frequency_norm_sq(std::span<const int> k) const;

  /// Numerical rank via column-pivoted QR with relative tolerance.
  static int numerical_rank(int d, int n, std::span<const double> row_major,
                            double tol = 1e-10);

private:
  int d_;
  int n_;
  std::vector<double> entries_;
  bool declared_independent_;
};

/// The truncated lattice K_N^n with a fixed row-major enumeration (k_1 slowest).
///
/// Each component ranges over [-floor(N/2), N - floor(N/2) - 1]: the half-open
/// [-N/2, N/2) for even N and the symmetric [-(N-1)/2, (N-1)/2] for odd N.
class FrequencyIndexSet {
public:
  FrequencyIndexSet(int N, int n);

  int grid_size() const noexcept { return N_; }
  int dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  int lower() const noexcept { return -(N_ / 2); }
  int upper() const noexcept { return N_ - N_ / 2 - 1; }

  bool contains(std::span<const int> k) const noexcept;

  /// Linear index sum_j (k_j + floor(N/2)) N^(n-j). Throws std::out_of_range.
  std::size_t linearize(std::span<const int> k) const;
  MultiIndex delinearize(std::size_t i) const;
  MultiIndex operator[](std::size_t i) const { return delinearize(i); }

  /// Position of k in an unshifted FFT array (k_j mod N per axis, row-major).
  std::size_t fft_position(std::span<const int> k) const;

  bool operator==(const FrequencyIndexSet& other) const noexcept {
    return N_ == other.N_ && n_ == other.n_;
  }

private:
  int N_;
  int n_;
  std::size_t size_;
};

/// Representative of m in the canonical range of K_N^1.
int wrap_component(long long m, int N) noexcept;

/// (kV - kU) mod N, componentwise, reduced into the canonical range of K_N^n.
MultiIndex wrap_mod(std::span<const int> kV, std::span<const int> kU, int N);

/// Unshifted FFT-order linear position of an arbitrary integer index (k_j mod N).
std::size_t fft_slot(std::span<const int> k, int N);

}  // namespace qeo
