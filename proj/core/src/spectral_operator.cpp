#include "qeo/spectral_operator.hpp"

#include "number_format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qeo {

SpectralOperator::SpectralOperator(TrigField coefficient, ProjectionMatrix P, int N)
    : coefficient_(std::move(coefficient)), P_(std::move(P)),
      index_set_(N, P_.torus_dim()), spectrum_(index_set_), d_(P_.physical_dim()) {
  if (coefficient_.dim() != P_.torus_dim())
    throw std::invalid_argument("SpectralOperator: coefficient dimension does not match P");

  const std::size_t D = index_set_.size();
  const int n = index_set_.dim();
  freq_.resize(D * d_);
  slot_.resize(D);
  residues_.resize(D * n);
  for (std::size_t i = 0; i < D; ++i) {
    const MultiIndex k = index_set_.delinearize(i);
    const auto lambda = P_.frequency(k);
    for (int l = 0; l < d_; ++l) freq_[i * d_ + l] = lambda[l];
    slot_[i] = fft_slot(k, N);
    for (int a = 0; a < n; ++a) residues_[i * n + a] = ((k[a] % N) + N) % N;
  }

  GridSamples samples = sample_on_grid(coefficient_, N);
  spectrum_ = forward_dft(samples);
  grid_values_ = std::move(samples.values);
  spectrum_fft_.assign(D, Complex{});
  for (std::size_t i = 0; i < D; ++i) spectrum_fft_[slot_[i]] = spectrum_[i];
  plan_ = std::make_shared<const FftPlan>(N, n);
}

SpectralOperator SpectralOperator::matrix_free(TrigField coefficient, ProjectionMatrix P, int N) {
  return SpectralOperator(std::move(coefficient), std::move(P), N);
}

SpectralOperator SpectralOperator::dense(TrigField coefficient, ProjectionMatrix P, int N,
                                         std::size_t dense_limit) {
  FrequencyIndexSet probe(N, P.torus_dim());
  if (probe.size() > dense_limit)
    throw DenseSizeError("dense assembly refused: " + std::to_string(probe.size()) +
                         " modes exceed the dense limit of " + std::to_string(dense_limit) +
                         "; use the matrix-free operator");
  SpectralOperator op(std::move(coefficient), std::move(P), N);
  op.assemble();
  return op;
}

SpectralOperator assemble_dense(const TrigField& coefficient, const ProjectionMatrix& P, int N,
                                std::size_t dense_limit) {
  return SpectralOperator::dense(coefficient, P, N, dense_limit);
}

double SpectralOperator::frequency_norm_sq(std::size_t i) const noexcept {
  double s = 0.0;
  for (int l = 0; l < d_; ++l) s += freq_[i * d_ + l] * freq_[i * d_ + l];
  return s;
}

Complex SpectralOperator::entry(std::size_t i, std::size_t j) const {
  const int N = index_set_.grid_size();
  const int n = index_set_.dim();
  std::size_t s = 0;
  for (int a = 0; a < n; ++a) {
    int r = residues_[i * n + a] - residues_[j * n + a];
    if (r < 0) r += N;
    s = s * N + static_cast<std::size_t>(r);
  }
  double w = 0.0;
  for (int l = 0; l < d_; ++l) w += freq_[i * d_ + l] * freq_[j * d_ + l];
  Complex q = spectrum_fft_[s] * w;
  if (i == j) q += 1.0;
  return q;
}

void SpectralOperator::assemble() {
  const auto D = static_cast<Eigen::Index>(size());
  Eigen::MatrixXcd Q(D, D);
  for (Eigen::Index j = 0; j < D; ++j)
    for (Eigen::Index i = 0; i < D; ++i) Q(i, j) = entry(i, j);
  dense_ = std::move(Q);
}

const Eigen::MatrixXcd& SpectralOperator::matrix() const {
  if (!dense_) throw std::logic_error("SpectralOperator::matrix: operator is matrix-free");
  return *dense_;
}

Eigen::SparseMatrix<Complex> SpectralOperator::sparse_matrix() const {
  const std::size_t D = size();
  const int N = index_set_.grid_size();
  const int n = index_set_.dim();
  double amax = 0.0;
  for (const Complex& a : spectrum_fft_) amax = std::max(amax, std::abs(a));
  // Nonzero A~ modes as residue vectors.
  std::vector<std::vector<int>> modes;
  std::vector<Complex> values;
  for (std::size_t s = 0; s < D; ++s) {
    if (std::abs(spectrum_fft_[s]) <= 1e-15 * amax) continue;
    std::vector<int> r(n);
    std::size_t t = s;
    for (int a = n - 1; a >= 0; --a) {
      r[a] = static_cast<int>(t % N);
      t /= N;
    }
    modes.push_back(std::move(r));
    values.push_back(spectrum_fft_[s]);
  }
  std::vector<std::size_t> index_of_slot(D);
  for (std::size_t i = 0; i < D; ++i) index_of_slot[slot_[i]] = i;

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(D * (modes.size() + 1));
  for (std::size_t i = 0; i < D; ++i) {
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex(1.0));
    for (std::size_t m = 0; m < modes.size(); ++m) {
      std::size_t s = 0;
      for (int a = 0; a < n; ++a) {
        int r = residues_[i * n + a] - modes[m][a];
        if (r < 0) r += N;
        s = s * N + static_cast<std::size_t>(r);
      }
      const std::size_t j = index_of_slot[s];
      double w = 0.0;
      for (int l = 0; l < d_; ++l) w += freq_[i * d_ + l] * freq_[j * d_ + l];
      if (w != 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), values[m] * w);
    }
  }
  Eigen::SparseMatrix<Complex> Q(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
  Q.setFromTriplets(triplets.begin(), triplets.end());
  return Q;
}

Eigen::VectorXcd SpectralOperator::apply(const Eigen::VectorXcd& u) const {
  const std::size_t D = size();
  if (static_cast<std::size_t>(u.size()) != D)
    throw std::invalid_argument("SpectralOperator::apply: vector length mismatch");

  const double scale = 1.0 / static_cast<double>(D);
  Eigen::VectorXcd out = u;
  std::vector<Complex> work(D);
  for (int l = 0; l < d_; ++l) {
    for (std::size_t i = 0; i < D; ++i) work[slot_[i]] = freq_[i * d_ + l] * u[i];
    plan_->backward(work);
    for (std::size_t g = 0; g < D; ++g) work[g] *= grid_values_[g];
    plan_->forward(work);
    for (std::size_t i = 0; i < D; ++i) out[i] += freq_[i * d_ + l] * scale * work[slot_[i]];
  }
  return out;
}

CoefficientField SpectralOperator::apply(const CoefficientField& u) const {
  if (!(u.index_set() == index_set_))
    throw std::invalid_argument("SpectralOperator::apply: index set mismatch");
  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(u.coeffs().data(), u.size());
  Eigen::VectorXcd r = apply(v);
  return CoefficientField(index_set_, std::vector<Complex>(r.data(), r.data() + r.size()));
}

Eigen::MatrixXcd SpectralOperator::apply_block(const Eigen::MatrixXcd& X) const {
  Eigen::MatrixXcd Y(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) Y.col(c) = apply(Eigen::VectorXcd(X.col(c)));
  return Y;
}

double SpectralOperator::energy(const Eigen::VectorXcd& u) const {
  const std::size_t D = size();
  if (static_cast<std::size_t>(u.size()) != D)
    throw std::invalid_argument("SpectralOperator::energy: vector length mismatch");
  long double acc = 0.0L;
  std::vector<Complex> work(D);
  for (int l = 0; l < d_; ++l) {
    for (std::size_t i = 0; i < D; ++i) work[slot_[i]] = freq_[i * d_ + l] * u[i];
    plan_->backward(work);
    for (std::size_t g = 0; g < D; ++g) acc += grid_values_[g].real() * std::norm(work[g]);
  }
  return u.squaredNorm() + static_cast<double>(acc / static_cast<long double>(D));
}

std::vector<double> SpectralOperator::diagonal() const {
  const double a0 = spectrum_.at(MultiIndex(index_set_.dim(), 0)).real();
  std::vector<double> diag(size());
  for (std::size_t i = 0; i < size(); ++i) diag[i] = a0 * frequency_norm_sq(i) + 1.0;
  return diag;
}

std::vector<double> SpectralOperator::row_norms_squared() const {
  const std::size_t D = size();
  std::vector<double> rows(D, 0.0);
  if (dense_) {
    for (std::size_t i = 0; i < D; ++i)
      rows[i] = dense_->row(static_cast<Eigen::Index>(i)).squaredNorm();
    return rows;
  }

  // |Q_ij|^2 = |A~_{ki-kj}|^2 (sum_l a_l b_l)^2 + delta_ij (2 Re(A~_0) |a|^2 + 1),
  // with a = P k_i, b = P k_j. Expanding the square turns each (l, m) pair into a
  // circular convolution of |A~|^2 with b_l b_m.
  const double scale = 1.0 / static_cast<double>(D);
  std::vector<Complex> power(D);
  for (std::size_t s = 0; s < D; ++s) power[s] = std::norm(spectrum_fft_[s]);
  plan_->backward(power);

  std::vector<Complex> work(D);
  for (int l = 0; l < d_; ++l) {
    for (int m = l; m < d_; ++m) {
      for (std::size_t j = 0; j < D; ++j)
        work[slot_[j]] = freq_[j * d_ + l] * freq_[j * d_ + m];
      plan_->backward(work);
      for (std::size_t g = 0; g < D; ++g) work[g] *= power[g];
      plan_->forward(work);
      const double mult = (l == m) ? 1.0 : 2.0;
      for (std::size_t i = 0; i < D; ++i)
        rows[i] += mult * freq_[i * d_ + l] * freq_[i * d_ + m] * scale * work[slot_[i]].real();
    }
  }
  const double a0 = spectrum_.at(MultiIndex(index_set_.dim(), 0)).real();
  for (std::size_t i = 0; i < D; ++i) rows[i] += 2.0 * a0 * frequency_norm_sq(i) + 1.0;
  return rows;
}

std::vector<double> SpectralOperator::row_norms_squared_direct() const {
  const std::size_t D = size();
  std::vector<double> rows(D, 0.0);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) rows[i] += std::norm(entry(i, j));
  return rows;
}

void SpectralOperator::write_matrix_market(std::ostream& os) const {
  const Eigen::MatrixXcd& Q = matrix();
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < Q.cols(); ++j)
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
      if (Q(i, j) != Complex{}) ++nnz;
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << Q.rows() << ' ' << Q.cols() << ' ' << nnz << '\n';
  for (Eigen::Index j = 0; j < Q.cols(); ++j)
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
      if (Q(i, j) != Complex{})
        os << i + 1 << ' ' << j + 1 << ' ' << detail::sci(Q(i, j).real()) << ' '
           << detail::sci(Q(i, j).imag()) << '\n';
}

}  // namespace qeo
