#pragma once

#include <complex>
#include <memory>
#include <span>

namespace qeo {

/// In-place n-dimensional complex FFT of extent N along every axis.
///
/// Data is row-major with the first axis slowest and frequencies in unshifted
/// order (index k_j mod N). `forward` computes sum_j x_j exp(-i k.y_j) and
/// `backward` computes sum_k x_k exp(+i k.y_j); neither normalizes.
///
/// A plan is immutable once built and may be executed concurrently on
/// distinct buffers.
class FftPlan {
public:
  FftPlan(int N, int n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int grid_size() const noexcept { return N_; }
  int dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }

  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

private:
  struct Impl;
  int N_ = 0;
  int n_ = 0;
  std::size_t size_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qeo
