#include "qeo/lattice.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace qeo {

ProjectionMatrix::ProjectionMatrix(int d, int n, std::vector<double> row_major,
                                   bool declared_rationally_independent)
    : d_(d), n_(n), entries_(std::move(row_major)),
      declared_independent_(declared_rationally_independent) {
  if (d < 1 || n < d)
    throw std::invalid_argument("ProjectionMatrix: need n >= d >= 1, got d=" +
                                std::to_string(d) + " n=" + std::to_string(n));
  if (entries_.size() != static_cast<std::size_t>(d) * n)
    throw std::invalid_argument("ProjectionMatrix: expected " + std::to_string(d * n) +
                                " entries, got " + std::to_string(entries_.size()));
  if (numerical_rank(d, n, entries_) != d)
    throw std::invalid_argument("ProjectionMatrix: rank is less than d");
}

int ProjectionMatrix::numerical_rank(int d, int n, std::span<const double> row_major,
                                     double tol) {
  Eigen::MatrixXd m(d, n);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = row_major[r * n + c];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

std::vector<double> ProjectionMatrix::frequency(std::span<const int> k) const {
  if (k.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("frequency: multi-index has length " +
                                std::to_string(k.size()) + ", expected " + std::to_string(n_));
  std::vector<double> lambda(d_, 0.0);
  for (int r = 0; r < d_; ++r)
    for (int c = 0; c < n_; ++c) lambda[r] += entries_[r * n_ + c] * k[c];
  return lambda;
}

double ProjectionMatrix::frequency_norm_sq(std::span<const int> k) const {
  double s = 0.0;
  for (double v : frequency(k)) s += v * v;
  return s;
}

FrequencyIndexSet::FrequencyIndexSet(int N, int n) : N_(N), n_(n), size_(1) {
  if (N <= 0 || n <= 0)
    throw std::invalid_argument("FrequencyIndexSet: N and n must be positive");
  for (int j = 0; j < n; ++j) size_ *= static_cast<std::size_t>(N);
}

bool FrequencyIndexSet::contains(std::span<const int> k) const noexcept {
  if (k.size() != static_cast<std::size_t>(n_)) return false;
  for (int kj : k)
    if (kj < lower() || kj > upper()) return false;
  return true;
}

std::size_t FrequencyIndexSet::linearize(std::span<const int> k) const {
  if (!contains(k)) throw std::out_of_range("linearize: multi-index outside K_N^n");
  std::size_t idx = 0;
  for (int kj : k) idx = idx * N_ + static_cast<std::size_t>(kj - lower());
  return idx;
}

MultiIndex FrequencyIndexSet::delinearize(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("delinearize: linear index out of range");
  MultiIndex k(n_);
  for (int j = n_ - 1; j >= 0; --j) {
    k[j] = static_cast<int>(i % N_) + lower();
    i /= N_;
  }
  return k;
}

std::size_t FrequencyIndexSet::fft_position(std::span<const int> k) const {
  if (!contains(k)) throw std::out_of_range("fft_position: multi-index outside K_N^n");
  return fft_slot(k, N_);
}

int wrap_component(long long m, int N) noexcept {
  const long long lo = -(N / 2);
  long long r = (m - lo) % N;
  if (r < 0) r += N;
  return static_cast<int>(r + lo);
}

MultiIndex wrap_mod(std::span<const int> kV, std::span<const int> kU, int N) {
  if (kV.size() != kU.size()) throw std::invalid_argument("wrap_mod: length mismatch");
  MultiIndex out(kV.size());
  for (std::size_t j = 0; j < kV.size(); ++j)
    out[j] = wrap_component(static_cast<long long>(kV[j]) - kU[j], N);
  return out;
}

std::size_t fft_slot(std::span<const int> k, int N) {
  std::size_t idx = 0;
  for (int kj : k) {
    int r = kj % N;
    if (r < 0) r += N;
    idx = idx * N + static_cast<std::size_t>(r);
  }
  return idx;
}

}  // namespace qeo
