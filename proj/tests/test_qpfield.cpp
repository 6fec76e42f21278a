#include "qeo/experiment.hpp"
#include "qeo/trig_field.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace qeo;

namespace {

const double kPi = std::numbers::pi;
const double kBeta = (std::sqrt(5.0) - 1.0) / 2.0;

TrigField example1_parent() {
  TrigField f(2);
  f.add_cosine({1, 0}, 0.5).add_cosine({0, 1}, 0.5).add_term({0, 0}, 1.0);
  return f;
}

ProjectionMatrix example1_projection() { return ProjectionMatrix(1, 2, {2 * kPi, 2 * kPi * kBeta}); }

// Direct O(N^2n) DFT, independent of FFTW.
std::vector<Complex> direct_dft(const GridSamples& g) {
  FrequencyIndexSet set(g.N, g.n);
  std::vector<Complex> out(set.size());
  const double scale = std::pow(static_cast<double>(g.N), -g.n);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const MultiIndex k = set[i];
    Complex acc = 0.0;
    for (std::size_t j = 0; j < g.values.size(); ++j) {
      std::size_t rest = j;
      double phase = 0.0;
      for (int a = g.n - 1; a >= 0; --a) {
        const int ja = static_cast<int>(rest % g.N);
        rest /= g.N;
        phase += k[a] * 2.0 * kPi * ja / g.N;
      }
      acc += g.values[j] * std::polar(1.0, -phase);
    }
    out[i] = acc * scale;
  }
  return out;
}

GridSamples random_samples(int N, int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  GridSamples g;
  g.N = N;
  g.n = n;
  g.values.resize(static_cast<std::size_t>(std::pow(N, n)));
  for (auto& v : g.values) v = Complex(nd(rng), nd(rng));
  return g;
}

// Real field with coefficients exp(-c |k|_1) for |k_j| <= K.
TrigField decaying_field(int n, int K, double c) {
  TrigField f(n);
  FrequencyIndexSet box(2 * K + 1, n);
  for (std::size_t i = 0; i < box.size(); ++i) {
    const MultiIndex k = box[i];
    int l1 = 0;
    for (int v : k) l1 += std::abs(v);
    f.add_term(k, std::exp(-c * l1));
  }
  return f;
}

}  // namespace

TEST_CASE("trig field canonical form") {
  TrigField f(1);
  f.add_term({1}, 2.0).add_term({1}, -2.0);
  CHECK(f.terms().empty());
  f.add_cosine({2}, 3.0);
  CHECK(f.coefficient({2}) == Complex(1.5));
  CHECK(f.coefficient({-2}) == Complex(1.5));
  CHECK(f.is_real());
  f.add_term({3}, Complex(0, 1));
  CHECK_FALSE(f.is_real());
  CHECK(f.max_abs_mode() == 3);
}

TEST_CASE("sample_on_grid") {
  const auto one = sample_on_grid(TrigField::constant(1, 1.0), 4);
  for (auto v : one.values) CHECK(std::abs(v - 1.0) < 1e-15);

  TrigField c(1);
  c.add_cosine({1}, 1.0);
  const auto s = sample_on_grid(c, 4);
  const double expect[] = {1, 0, -1, 0};
  for (int j = 0; j < 4; ++j) CHECK(std::abs(s.values[j] - expect[j]) < 1e-15);

  const std::vector<double> origin{0.0, 0.0};
  CHECK(std::abs(example1_parent().evaluate(origin) - 2.0) < 1e-15);
  CHECK(std::abs(sample_on_grid(example1_parent(), 8).values[0] - 2.0) < 1e-15);
}

TEST_CASE("forward dft simple fields") {
  const auto c0 = forward_dft(sample_on_grid(TrigField::constant(1, 1.0), 8));
  for (std::size_t i = 0; i < c0.size(); ++i)
    CHECK(std::abs(c0[i] - (c0.index_set()[i][0] == 0 ? 1.0 : 0.0)) < 1e-15);

  TrigField c(1);
  c.add_cosine({1}, 1.0);
  const auto cc = forward_dft(sample_on_grid(c, 8));
  for (std::size_t i = 0; i < cc.size(); ++i) {
    const int k = cc.index_set()[i][0];
    CHECK(std::abs(cc[i] - (std::abs(k) == 1 ? 0.5 : 0.0)) < 1e-15);
  }
}

TEST_CASE("forward dft matches a direct sum") {
  std::mt19937 rng(3);
  for (int n : {1, 2, 3}) {
    for (int N : {3, 4, 5}) {
      const auto g = random_samples(N, n, rng);
      const auto fast = forward_dft(g);
      const auto slow = direct_dft(g);
      for (std::size_t i = 0; i < slow.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-13);
    }
  }
}

TEST_CASE("dft round trip") {
  std::mt19937 rng(11);
  for (int n : {1, 2, 3}) {
    for (int N : {4, 8, 16}) {
      const auto g = random_samples(N, n, rng);
      const auto back = inverse_dft(forward_dft(g));
      double err = 0.0, norm = 0.0;
      for (std::size_t j = 0; j < g.values.size(); ++j) {
        err += std::norm(back.values[j] - g.values[j]);
        norm += std::norm(g.values[j]);
      }
      CHECK(std::sqrt(err / norm) < 1e-12);
    }
  }
}

TEST_CASE("aliasing identity") {
  for (int N : {4, 5, 8}) {
    TrigField f(1);
    f.add_term({N}, 1.0);
    const auto c = interpolate(f, N);
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(std::abs(c[i] - (c.index_set()[i][0] == 0 ? 1.0 : 0.0)) < 1e-14);

    TrigField g(1);
    g.add_cosine({N + 1}, 1.0);
    const auto d = interpolate(g, N);
    for (std::size_t i = 0; i < d.size(); ++i)
      CHECK(std::abs(d[i] - (std::abs(d.index_set()[i][0]) == 1 ? 0.5 : 0.0)) < 1e-14);
  }
  // Discrete orthogonality in several dimensions: exp(i l.y) lands on l mod N.
  const int N = 4;
  for (MultiIndex l : {MultiIndex{5, -3}, MultiIndex{-2, 7}, MultiIndex{1, 1}}) {
    TrigField f(2);
    f.add_term(l, 1.0);
    const auto c = interpolate(f, N);
    const MultiIndex w{wrap_component(l[0], N), wrap_component(l[1], N)};
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(std::abs(c[i] - (c.index_set()[i] == w ? 1.0 : 0.0)) < 1e-14);
  }
}

TEST_CASE("mean value") {
  CHECK(std::abs(mean_value(example1_parent()) - 1.0) < 1e-15);
  TrigField c(1);
  c.add_cosine({1}, 1.0);
  CHECK(std::abs(mean_value(c)) == 0.0);
  CHECK(std::abs(mean_value(builtin_example(3).coefficient) - 8.0) < 1e-15);
}

TEST_CASE("quasiperiodic evaluation") {
  const auto F = example1_parent();
  const auto P = example1_projection();
  const std::vector<double> x0{0.0};
  CHECK(std::abs(qp_evaluate(F, P, x0) - 2.0) < 1e-14);
  const std::vector<double> x1{1.0};
  const double expect = 0.5 * (std::cos(2 * kPi) + std::cos(2 * kPi * kBeta)) + 1.0;
  CHECK(std::abs(qp_evaluate(F, P, x1) - expect) < 1e-13);
  CHECK(std::abs(parent_trace(F, P, x1) - expect) < 1e-13);

  const auto one = TrigField::constant(2, 1.0);
  const std::vector<double> x2{12.3};
  CHECK(std::abs(qp_evaluate(one, P, x2) - 1.0) < 1e-15);

  // Both evaluation routes agree on a 3D example.
  const auto ex3 = builtin_example(3);
  const auto P3 = ex3.projection();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 30; ++t) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    CHECK(std::abs(qp_evaluate(ex3.coefficient, P3, x) - parent_trace(ex3.coefficient, P3, x)) < 1e-12);
  }
}

TEST_CASE("line mean estimate") {
  const auto P = example1_projection();
  CHECK(std::abs(line_mean_estimate(TrigField::constant(2, 1.0), P, 50.0, 101) - 1.0) < 1e-14);

  TrigField c(1);
  c.add_cosine({1}, 1.0);
  const ProjectionMatrix P1(1, 1, {1.0});
  const double T = 1e3;
  const Complex est = line_mean_estimate(c, P1, T, 200001);
  CHECK(std::abs(est) < 1e-3);
  CHECK(std::abs(est.real() - std::sin(T) / T) < 1e-6);

  const auto F = example1_parent();
  const double e2 = std::abs(line_mean_estimate(F, P, 1e2, 20001) - 1.0);
  const double e3 = std::abs(line_mean_estimate(F, P, 1e3, 200001) - 1.0);
  const double e4 = std::abs(line_mean_estimate(F, P, 1e4, 2000001) - 1.0);
  CHECK(e3 < e2);
  CHECK(e4 < e3);
}

TEST_CASE("truncate") {
  const auto F = example1_parent();
  const auto t = truncate(F, 4);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == F.coefficient(t.index_set()[i]));

  TrigField edge(1);
  edge.add_term({4}, 1.0);
  const auto z = truncate(edge, 4);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == Complex(0.0));

  const auto G = decaying_field(2, 5, 0.3);
  for (int N : {3, 4, 7}) {
    const auto c = truncate(G, N);
    const FrequencyIndexSet& s = c.index_set();
    for (std::size_t i = 0; i < c.size(); ++i) {
      const MultiIndex k = s[i];
      bool inside = true;
      for (int v : k) inside = inside && v >= -(N / 2) && v <= N - N / 2 - 1;
      CHECK(c[i] == (inside ? G.coefficient(k) : Complex(0.0)));
    }
    const auto twice = truncate(truncate(G, 11), N);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(twice[i] == c[i]);
  }
}

TEST_CASE("interpolate equals truncate for band-limited fields") {
  const auto F = example1_parent();
  for (int N : {4, 8}) {
    const auto a = interpolate(F, N);
    const auto b = truncate(F, N);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-15);
  }
}

TEST_CASE("norms") {
  const auto P = example1_projection();
  TrigField single(2);
  single.add_term({1, 2}, 1.0);
  const double lam2 = P.frequency_norm_sq(MultiIndex{1, 2});
  CHECK(sobolev_norm(single, P, 1.0) == doctest::Approx(std::sqrt(1.0 + lam2)).epsilon(1e-14));
  // Coefficients 1 at 0 and 1/4 at +-e1, +-e2: 1 + 4/16.
  CHECK(sobolev_norm(example1_parent(), P, 0.0) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-14));

  std::mt19937 rng(2);
  std::normal_distribution<double> nd;
  CoefficientField c(FrequencyIndexSet(6, 2));
  double sq = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = Complex(nd(rng), nd(rng));
    sq += std::norm(c[i]);
  }
  CHECK(sobolev_norm(c, P, 0.0) == doctest::Approx(std::sqrt(sq)).epsilon(1e-14));
  CHECK(l2_norm(c) == doctest::Approx(std::sqrt(sq)).epsilon(1e-14));
  CHECK(sobolev_seminorm(c, P, 0.0) <= sobolev_norm(c, P, 0.0) + 1e-12);
}

TEST_CASE("truncation and interpolation errors decay spectrally") {
  for (int n : {1, 2}) {
    const auto F = decaying_field(n, 40, 1.5);
    const ProjectionMatrix P = n == 1 ? ProjectionMatrix(1, 1, {1.0}) : ProjectionMatrix(1, 2, {1.0, kBeta});
    for (int N : {4, 8, 16}) {
      const double t1 = sobolev_distance(F, truncate(F, N), P, 1.0);
      const double t2 = sobolev_distance(F, truncate(F, 2 * N), P, 1.0);
      CHECK(t2 <= 0.1 * t1);
      const double i1 = sobolev_distance(F, interpolate(F, N), P, 1.0);
      const double i2 = sobolev_distance(F, interpolate(F, 2 * N), P, 1.0);
      CHECK(i2 <= 0.1 * i1);
    }
  }
}

TEST_CASE("real fields stay conjugate symmetric") {
  const auto F = decaying_field(2, 4, 0.7);
  REQUIRE(F.is_real());
  for (int N : {4, 5, 8}) {
    for (const auto& c : {interpolate(F, N), truncate(F, N)}) {
      const FrequencyIndexSet& s = c.index_set();
      for (std::size_t i = 0; i < c.size(); ++i) {
        MultiIndex k = s[i];
        MultiIndex mk{-k[0], -k[1]};
        if (!s.contains(mk)) continue;
        CHECK(std::abs(c[s.linearize(mk)] - std::conj(c[i])) < 1e-14);
      }
    }
  }
}

TEST_CASE("coefficient csv") {
  CoefficientField c(FrequencyIndexSet(2, 1), {Complex(1, 2), Complex(3, -4)});
  std::ostringstream os;
  write_coefficients_csv(os, c);
  const std::string s = os.str();
  CHECK(s.rfind("k_1,re,im\n", 0) == 0);
  CHECK(s.find("-1,") != std::string::npos);
}
