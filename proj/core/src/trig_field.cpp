#include "qeo/trig_field.hpp"

#include "number_format.hpp"
#include "qeo/fft.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace qeo {

TrigField::TrigField(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("TrigField: dimension must be positive");
}

TrigField TrigField::constant(int n, Complex c) {
  TrigField f(n);
  f.add_term(MultiIndex(n, 0), c);
  return f;
}

TrigField& TrigField::add_term(const MultiIndex& k, Complex c) {
  if (k.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("TrigField::add_term: multi-index length mismatch");
  auto [it, inserted] = terms_.try_emplace(k, c);
  if (!inserted) it->second += c;
  if (it->second == Complex{}) terms_.erase(it);
  return *this;
}

TrigField& TrigField::add_cosine(const MultiIndex& k, double amplitude) {
  MultiIndex neg(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
  add_term(k, 0.5 * amplitude);
  add_term(neg, 0.5 * amplitude);
  return *this;
}

Complex TrigField::coefficient(const MultiIndex& k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? Complex{} : it->second;
}

bool TrigField::is_real(double tol) const {
  for (const auto& [k, c] : terms_) {
    MultiIndex neg(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
    if (std::abs(coefficient(neg) - std::conj(c)) > tol * std::max(1.0, std::abs(c))) return false;
  }
  return true;
}

int TrigField::max_abs_mode() const {
  int m = 0;
  for (const auto& [k, c] : terms_)
    for (int kj : k) m = std::max(m, std::abs(kj));
  return m;
}

Complex TrigField::evaluate(std::span<const double> y) const {
  if (y.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("TrigField::evaluate: point dimension mismatch");
  Complex sum{};
  for (const auto& [k, c] : terms_) {
    double phase = 0.0;
    for (int j = 0; j < n_; ++j) phase += k[j] * y[j];
    sum += c * std::polar(1.0, phase);
  }
  return sum;
}

CoefficientField::CoefficientField(FrequencyIndexSet index_set)
    : index_set_(index_set), coeffs_(index_set.size()) {}

CoefficientField::CoefficientField(FrequencyIndexSet index_set, std::vector<Complex> coeffs)
    : index_set_(index_set), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != index_set_.size())
    throw std::invalid_argument("CoefficientField: coefficient count does not match index set");
}

Complex CoefficientField::at(std::span<const int> k) const {
  if (!index_set_.contains(k)) return {};
  return coeffs_[index_set_.linearize(k)];
}

GridSamples sample_on_grid(const TrigField& field, int N) {
  if (N <= 0) throw std::invalid_argument("sample_on_grid: N must be positive");
  const int n = field.dim();
  FrequencyIndexSet grid(N, n);
  GridSamples out{N, n, std::vector<Complex>(grid.size())};

  const double h = 2.0 * std::numbers::pi / N;
  std::vector<int> j(n, 0);
  for (std::size_t lin = 0; lin < grid.size(); ++lin) {
    std::size_t rem = lin;
    for (int a = n - 1; a >= 0; --a) {
      j[a] = static_cast<int>(rem % N);
      rem /= N;
    }
    Complex sum{};
    for (const auto& [k, c] : field.terms()) {
      // k.j reduced mod N keeps the phase argument small and exact.
      long long kj = 0;
      for (int a = 0; a < n; ++a) kj += static_cast<long long>(k[a]) * j[a];
      long long r = kj % N;
      if (r < 0) r += N;
      sum += c * std::polar(1.0, h * static_cast<double>(r));
    }
    out.values[lin] = sum;
  }
  return out;
}

CoefficientField forward_dft(const GridSamples& samples) {
  FrequencyIndexSet set(samples.N, samples.n);
  if (samples.values.size() != set.size())
    throw std::invalid_argument("forward_dft: sample count does not match N^n");
  std::vector<Complex> work = samples.values;
  FftPlan plan(samples.N, samples.n);
  plan.forward(work);
  const double scale = 1.0 / static_cast<double>(set.size());
  CoefficientField out(set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const MultiIndex k = set.delinearize(i);
    out[i] = work[fft_slot(k, samples.N)] * scale;
  }
  return out;
}

GridSamples inverse_dft(const CoefficientField& coeffs) {
  const auto& set = coeffs.index_set();
  std::vector<Complex> work(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    work[fft_slot(set.delinearize(i), set.grid_size())] = coeffs[i];
  FftPlan plan(set.grid_size(), set.dim());
  plan.backward(work);
  return GridSamples{set.grid_size(), set.dim(), std::move(work)};
}

Complex mean_value(const TrigField& field) {
  return field.coefficient(MultiIndex(field.dim(), 0));
}

Complex qp_evaluate(const TrigField& field, const ProjectionMatrix& P, std::span<const double> x) {
  if (field.dim() != P.torus_dim() || x.size() != static_cast<std::size_t>(P.physical_dim()))
    throw std::invalid_argument("qp_evaluate: dimension mismatch");
  Complex sum{};
  for (const auto& [k, c] : field.terms()) {
    const auto lambda = P.frequency(k);
    double phase = 0.0;
    for (std::size_t r = 0; r < lambda.size(); ++r) phase += lambda[r] * x[r];
    sum += c * std::polar(1.0, phase);
  }
  return sum;
}

Complex parent_trace(const TrigField& field, const ProjectionMatrix& P, std::span<const double> x) {
  if (field.dim() != P.torus_dim() || x.size() != static_cast<std::size_t>(P.physical_dim()))
    throw std::invalid_argument("parent_trace: dimension mismatch");
  std::vector<double> y(P.torus_dim(), 0.0);
  for (int c = 0; c < P.torus_dim(); ++c)
    for (int r = 0; r < P.physical_dim(); ++r) y[c] += P(r, c) * x[r];
  return field.evaluate(y);
}

Complex line_mean_estimate(const TrigField& field, const ProjectionMatrix& P, double T,
                           int samples) {
  if (!(T > 0.0) || samples < 2)
    throw std::invalid_argument("line_mean_estimate: need T > 0 and samples >= 2");
  const int d = P.physical_dim();
  const double h = 2.0 * T / (samples - 1);
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  Complex sum{};
  double weight_total = 0.0;
  while (true) {
    double w = 1.0;
    for (int r = 0; r < d; ++r) {
      x[r] = -T + h * idx[r];
      if (idx[r] == 0 || idx[r] == samples - 1) w *= 0.5;
    }
    sum += w * qp_evaluate(field, P, x);
    weight_total += w;
    int r = d - 1;
    while (r >= 0 && ++idx[r] == samples) idx[r--] = 0;
    if (r < 0) break;
  }
  return sum / weight_total;
}

CoefficientField truncate(const TrigField& field, int N) {
  FrequencyIndexSet set(N, field.dim());
  CoefficientField out(set);
  for (const auto& [k, c] : field.terms())
    if (set.contains(k)) out[set.linearize(k)] = c;
  return out;
}

CoefficientField truncate(const CoefficientField& coeffs, int N) {
  FrequencyIndexSet set(N, coeffs.dim());
  CoefficientField out(set);
  const auto& src = coeffs.index_set();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const MultiIndex k = src.delinearize(i);
    if (set.contains(k)) out[set.linearize(k)] = coeffs[i];
  }
  return out;
}

CoefficientField interpolate(const TrigField& field, int N) {
  return forward_dft(sample_on_grid(field, N));
}

namespace {

double sobolev_weight(const ProjectionMatrix& P, std::span<const int> k, double s) {
  return std::pow(1.0 + P.frequency_norm_sq(k), s);
}

void check_dims(int field_dim, const ProjectionMatrix& P) {
  if (field_dim != P.torus_dim())
    throw std::invalid_argument("sobolev norm: torus dimension does not match P");
}

}  // namespace

double sobolev_norm(const CoefficientField& coeffs, const ProjectionMatrix& P, double s) {
  check_dims(coeffs.dim(), P);
  const auto& set = coeffs.index_set();
  double acc = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double a = std::norm(coeffs[i]);
    if (a != 0.0) acc += sobolev_weight(P, set.delinearize(i), s) * a;
  }
  return std::sqrt(acc);
}

double sobolev_norm(const TrigField& field, const ProjectionMatrix& P, double s) {
  check_dims(field.dim(), P);
  double acc = 0.0;
  for (const auto& [k, c] : field.terms()) acc += sobolev_weight(P, k, s) * std::norm(c);
  return std::sqrt(acc);
}

double sobolev_seminorm(const CoefficientField& coeffs, const ProjectionMatrix& P, double s) {
  check_dims(coeffs.dim(), P);
  const auto& set = coeffs.index_set();
  double acc = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double a = std::norm(coeffs[i]);
    if (a == 0.0) continue;
    const double lam2 = P.frequency_norm_sq(set.delinearize(i));
    if (lam2 > 0.0) acc += std::pow(lam2, s) * a;
  }
  return std::sqrt(acc);
}

double sobolev_distance(const TrigField& field, const CoefficientField& approx,
                        const ProjectionMatrix& P, double s) {
  check_dims(field.dim(), P);
  const auto& set = approx.index_set();
  double acc = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const MultiIndex k = set.delinearize(i);
    const double a = std::norm(field.coefficient(k) - approx[i]);
    if (a != 0.0) acc += sobolev_weight(P, k, s) * a;
  }
  for (const auto& [k, c] : field.terms())
    if (!set.contains(k)) acc += sobolev_weight(P, k, s) * std::norm(c);
  return std::sqrt(acc);
}

double l2_norm(const CoefficientField& coeffs) {
  double acc = 0.0;
  for (const Complex& c : coeffs.coeffs()) acc += std::norm(c);
  return std::sqrt(acc);
}

void write_coefficients_csv(std::ostream& os, const CoefficientField& coeffs) {
  const auto& set = coeffs.index_set();
  for (int j = 1; j <= set.dim(); ++j) os << "k_" << j << ',';
  os << "re,im\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (int kj : set.delinearize(i)) os << kj << ',';
    os << detail::sci(coeffs[i].real()) << ',' << detail::sci(coeffs[i].imag()) << '\n';
  }
}

}  // namespace qeo
