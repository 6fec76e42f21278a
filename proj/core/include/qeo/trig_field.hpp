#pragma once

#include "qeo/lattice.hpp"

#include <complex>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace qeo {

using Complex = std::complex<double>;

/// Periodic parent field on T^n as a finite trigonometric polynomial
/// F(y) = sum_k F_k exp(i k.y). Zero coefficients are never stored.
///
/// The quasiperiodic trace is f(x) = F(P^T x); its Fourier-Bohr coefficient
/// at frequency P k is F_k, so everything the solver needs about f is read
/// off this map.
class TrigField {
public:
  explicit TrigField(int n);

  static TrigField constant(int n, Complex c);

  /// Adds c to the coefficient at k (entries that cancel to zero are erased).
  TrigField& add_term(const MultiIndex& k, Complex c);
  /// Adds amplitude * cos(k.y), i.e. amplitude/2 at +k and -k.
  TrigField& add_cosine(const MultiIndex& k, double amplitude);

  int dim() const noexcept { return n_; }
  const std::map<MultiIndex, Complex>& terms() const noexcept { return terms_; }
  Complex coefficient(const MultiIndex& k) const;

  /// Conjugate symmetry F_{-k} = conj(F_k), i.e. the field is real valued.
  bool is_real(double tol = 1e-14) const;
  /// Largest |k_j| over all stored terms.
  int max_abs_mode() const;

  /// Parent evaluation F(y).
  Complex evaluate(std::span<const double> y) const;

private:
  int n_;
  std::map<MultiIndex, Complex> terms_;
};

/// Samples on the uniform grid y_j = 2 pi j / N, j in [0, N)^n, row-major in j.
struct GridSamples {
  int N = 0;
  int n = 0;
  std::vector<Complex> values;
};

/// Coefficients on K_N^n in FrequencyIndexSet linearize order.
class CoefficientField {
public:
  explicit CoefficientField(FrequencyIndexSet index_set);
  CoefficientField(FrequencyIndexSet index_set, std::vector<Complex> coeffs);

  const FrequencyIndexSet& index_set() const noexcept { return index_set_; }
  int grid_size() const noexcept { return index_set_.grid_size(); }
  int dim() const noexcept { return index_set_.dim(); }
  std::size_t size() const noexcept { return coeffs_.size(); }

  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  Complex operator[](std::size_t i) const { return coeffs_[i]; }

  /// Coefficient at k, or zero when k lies outside K_N^n.
  Complex at(std::span<const int> k) const;

private:
  FrequencyIndexSet index_set_;
  std::vector<Complex> coeffs_;
};

GridSamples sample_on_grid(const TrigField& field, int N);

/// c_k = N^-n sum_j g(y_j) exp(-i k.y_j), k in K_N^n.
CoefficientField forward_dft(const GridSamples& samples);
/// g(y_j) = sum_k c_k exp(i k.y_j).
GridSamples inverse_dft(const CoefficientField& coeffs);

/// Constant term F_0, which is also the mean value of the quasiperiodic trace.
Complex mean_value(const TrigField& field);

/// f(x) = sum_k F_k exp(i (P k).x), evaluated from the physical frequencies.
Complex qp_evaluate(const TrigField& field, const ProjectionMatrix& P, std::span<const double> x);
/// f(x) = F(P^T x), evaluated through the parent function.
Complex parent_trace(const TrigField& field, const ProjectionMatrix& P, std::span<const double> x);

/// Trapezoidal box average of f over [-T, T]^d with `samples` nodes per axis.
Complex line_mean_estimate(const TrigField& field, const ProjectionMatrix& P, double T,
                           int samples);

/// Keeps exactly the modes inside K_N^n.
CoefficientField truncate(const TrigField& field, int N);
CoefficientField truncate(const CoefficientField& coeffs, int N);

/// Pseudospectral coefficients: forward_dft(sample_on_grid(field, N)).
CoefficientField interpolate(const TrigField& field, int N);

/// (sum_k (1 + |P k|^2)^s |c_k|^2)^(1/2). s = 0 gives the Parseval L2 norm.
double sobolev_norm(const CoefficientField& coeffs, const ProjectionMatrix& P, double s);
double sobolev_norm(const TrigField& field, const ProjectionMatrix& P, double s);
/// (sum_k |P k|^(2s) |c_k|^2)^(1/2); the P k = 0 modes contribute nothing.
double sobolev_seminorm(const CoefficientField& coeffs, const ProjectionMatrix& P, double s);
/// H^s_P norm of (field - approx), with approx extended by zero outside K_N^n.
double sobolev_distance(const TrigField& field, const CoefficientField& approx,
                        const ProjectionMatrix& P, double s);

double l2_norm(const CoefficientField& coeffs);

/// CSV with columns k_1..k_n,re,im in linearize order.
void write_coefficients_csv(std::ostream& os, const CoefficientField& coeffs);

}  // namespace qeo
