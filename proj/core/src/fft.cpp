#include "qeo/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <vector>

namespace qeo {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftPlan::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

FftPlan::FftPlan(int N, int n) : N_(N), n_(n), size_(1), impl_(std::make_unique<Impl>()) {
  if (N <= 0 || n <= 0) throw std::invalid_argument("FftPlan: N and n must be positive");
  std::vector<int> dims(n, N);
  for (int j = 0; j < n; ++j) size_ *= static_cast<std::size_t>(N);

  std::vector<std::complex<double>> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  impl_->fwd = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_FORWARD, flags);
  impl_->bwd = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_BACKWARD, flags);
  if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("FftPlan: FFTW planning failed");
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != size_) throw std::invalid_argument("FftPlan::forward: size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->fwd, buf, buf);
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
  if (data.size() != size_) throw std::invalid_argument("FftPlan::backward: size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->bwd, buf, buf);
}

}  // namespace qeo
