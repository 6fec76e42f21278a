#include "qeo/experiment.hpp"
#include "qeo/spectral_operator.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace qeo;

namespace {

const double kPi = std::numbers::pi;

// Q_ij = A~_{k_i - k_j} (P k_i).(P k_j) + delta_ij, with A~ from a direct
// sampled DFT of the parent field.
Eigen::MatrixXcd brute_force_q(const TrigField& A, const ProjectionMatrix& P, int N) {
  const int n = A.dim();
  FrequencyIndexSet set(N, n);
  const std::size_t M = set.size();
  std::vector<std::vector<double>> y(M, std::vector<double>(n));
  std::vector<Complex> samples(M);
  for (std::size_t j = 0; j < M; ++j) {
    std::size_t rest = j;
    for (int a = n - 1; a >= 0; --a) {
      y[j][a] = 2.0 * kPi * static_cast<double>(rest % N) / N;
      rest /= N;
    }
    samples[j] = A.evaluate(y[j]);
  }
  auto Atilde = [&](const MultiIndex& k) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      double ph = 0.0;
      for (int a = 0; a < n; ++a) ph += k[a] * y[j][a];
      acc += samples[j] * std::polar(1.0, -ph);
    }
    return acc / static_cast<double>(M);
  };
  Eigen::MatrixXcd Q(M, M);
  for (std::size_t i = 0; i < M; ++i) {
    const MultiIndex ki = set[i];
    const auto li = P.frequency(ki);
    for (std::size_t j = 0; j < M; ++j) {
      const MultiIndex kj = set[j];
      const auto lj = P.frequency(kj);
      MultiIndex diff(n);
      for (int a = 0; a < n; ++a) diff[a] = ki[a] - kj[a];
      double dot = 0.0;
      for (std::size_t r = 0; r < li.size(); ++r) dot += li[r] * lj[r];
      Q(i, j) = Atilde(diff) * dot + (i == j ? 1.0 : 0.0);
    }
  }
  return Q;
}

Eigen::VectorXcd random_vector(std::size_t M, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(M);
  for (std::size_t i = 0; i < M; ++i) v[i] = Complex(nd(rng), nd(rng));
  return v;
}

}  // namespace

TEST_CASE("dense assembly matches the double-sum oracle") {
  SUBCASE("n=1, A = cos y + 2") {
    TrigField A(1);
    A.add_cosine({1}, 1.0).add_term({0}, 2.0);
    ProjectionMatrix P(1, 1, {1.0});
    const auto op = assemble_dense(A, P, 4);
    CHECK((op.matrix() - brute_force_q(A, P, 4)).norm() < 1e-13);
    // k = 1 against k = 0 carries a zero gradient product.
    const FrequencyIndexSet& s = op.index_set();
    CHECK(std::abs(op.matrix()(s.linearize(MultiIndex{1}), s.linearize(MultiIndex{0}))) < 1e-15);
    // k = 1 against k = -1: A~_{2} aliases onto slot -2, which is zero.
    CHECK(std::abs(op.matrix()(s.linearize(MultiIndex{1}), s.linearize(MultiIndex{-1}))) < 1e-15);
    // k = -1 against k = -2: A~_1 (-1)(-2) = 1.
    CHECK(std::abs(op.matrix()(s.linearize(MultiIndex{-1}), s.linearize(MultiIndex{-2})) - 1.0) < 1e-14);
  }
  SUBCASE("paper examples") {
    for (int id : {1, 2, 3}) {
      const auto cfg = builtin_example(id);
      const int N = id == 3 ? 3 : 6;
      const auto op = assemble_dense(cfg.coefficient, cfg.projection(), N);
      const auto Q = brute_force_q(cfg.coefficient, cfg.projection(), N);
      CHECK((op.matrix() - Q).norm() <= 1e-12 * Q.norm());
    }
  }
}

TEST_CASE("two-mode case by hand") {
  // K_2 = {-1, 0}; samples 3 and 1 give A~_0 = 2 and A~_1 = 1.
  TrigField A(1);
  A.add_cosine({1}, 1.0).add_term({0}, 2.0);
  ProjectionMatrix P(1, 1, {1.0});
  const auto op = assemble_dense(A, P, 2);
  Eigen::Matrix2cd expect;
  expect << 3.0, 0.0, 0.0, 1.0;
  CHECK((op.matrix() - expect).norm() < 1e-14);
  const auto rn = op.row_norms_squared();
  CHECK(rn[0] == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(rn[1] == doctest::Approx(1.0).epsilon(1e-14));
  const auto mf = SpectralOperator::matrix_free(A, P, 2).row_norms_squared();
  CHECK(mf[0] == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(mf[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constant coefficient") {
  const double c = 2.5;
  ProjectionMatrix P(1, 2, {2 * kPi, 2 * kPi * 0.618});
  const auto A = TrigField::constant(2, c);
  const auto op = assemble_dense(A, P, 6);
  const auto mf = SpectralOperator::matrix_free(A, P, 6);
  const auto diag = op.diagonal();
  const auto rn = mf.row_norms_squared();
  std::mt19937 rng(1);
  const Eigen::VectorXcd u = random_vector(op.size(), rng);
  const Eigen::VectorXcd v = mf.apply(u);
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double q = c * P.frequency_norm_sq(op.index_set()[i]) + 1.0;
    CHECK(op.matrix()(i, i).real() == doctest::Approx(q).epsilon(1e-14));
    CHECK(diag[i] == doctest::Approx(q).epsilon(1e-14));
    CHECK(rn[i] == doctest::Approx(q * q).epsilon(1e-12));
    CHECK(std::abs(v[i] - q * u[i]) <= 1e-13 * std::abs(q * u[i]) + 1e-15);
  }
  const Eigen::MatrixXcd off = op.matrix() - Eigen::MatrixXcd(op.matrix().diagonal().asDiagonal());
  CHECK(off.norm() < 1e-13);
}

TEST_CASE("apply on the zero mode") {
  const auto cfg = builtin_example(1);
  const auto op = SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), 8);
  CoefficientField u(op.index_set());
  const std::size_t z = op.index_set().linearize(MultiIndex{0, 0});
  u[z] = 1.0;
  const auto v = op.apply(u);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - (i == z ? 1.0 : 0.0)) < 1e-14);
  CHECK(op.diagonal()[z] == 1.0);
}

TEST_CASE("matrix-free apply matches the dense matrix") {
  std::mt19937 rng(42);
  for (int id : {1, 2, 3}) {
    const auto cfg = builtin_example(id);
    for (int N : {4, 8}) {
      const auto op = assemble_dense(cfg.coefficient, cfg.projection(), N);
      for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXcd u = random_vector(op.size(), rng);
        const Eigen::VectorXcd a = op.matrix() * u;
        const Eigen::VectorXcd b = op.apply(u);
        CHECK((a - b).norm() <= 1e-12 * a.norm());
      }
    }
  }
}

TEST_CASE("hermitian and coercive for the examples") {
  for (int id : {1, 2}) {
    const auto cfg = builtin_example(id);
    const auto op = assemble_dense(cfg.coefficient, cfg.projection(), 8);
    const auto& Q = op.matrix();
    CHECK((Q - Q.adjoint()).norm() <= 1e-12 * Q.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-10);
  }
}

TEST_CASE("diagonal and row norms match the dense matrix") {
  for (int id : {1, 2}) {
    const auto cfg = builtin_example(id);
    const auto dense = assemble_dense(cfg.coefficient, cfg.projection(), 8);
    const auto mf = SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), 8);
    const auto& Q = dense.matrix();
    const auto diag = mf.diagonal();
    const auto rn = mf.row_norms_squared();
    const auto rd = mf.row_norms_squared_direct();
    for (std::size_t i = 0; i < Q.rows(); ++i) {
      CHECK(std::abs(diag[i] - Q(i, i).real()) <= 1e-12 * Q(i, i).real());
      const double ref = Q.row(i).squaredNorm();
      CHECK(std::abs(rn[i] - ref) <= 1e-10 * ref);
      CHECK(std::abs(rd[i] - ref) <= 1e-10 * ref);
    }
  }
}

TEST_CASE("sparse form matches the dense matrix") {
  for (int id : {1, 2, 3}) {
    const auto cfg = builtin_example(id);
    const int N = id == 3 ? 4 : 8;
    const auto op = assemble_dense(cfg.coefficient, cfg.projection(), N);
    const Eigen::MatrixXcd S(op.sparse_matrix());
    CHECK((S - op.matrix()).norm() <= 1e-13 * op.matrix().norm());
  }
}

TEST_CASE("apply_block is columnwise apply") {
  const auto cfg = builtin_example(2);
  const auto op = SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), 6);
  std::mt19937 rng(9);
  Eigen::MatrixXcd X(op.size(), 3);
  for (int c = 0; c < 3; ++c) X.col(c) = random_vector(op.size(), rng);
  const auto Y = op.apply_block(X);
  for (int c = 0; c < 3; ++c) CHECK((Y.col(c) - op.apply(Eigen::VectorXcd(X.col(c)))).norm() < 1e-12 * Y.col(c).norm());
}

TEST_CASE("dense guard and matrix-free access") {
  const auto cfg = builtin_example(3);
  CHECK_THROWS_AS(assemble_dense(cfg.coefficient, cfg.projection(), 12), DenseSizeError);
  const auto mf = SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), 4);
  CHECK(mf.mode() == OperatorMode::MatrixFree);
  CHECK_THROWS_AS(mf.matrix(), std::logic_error);
}

TEST_CASE("matrix market export") {
  TrigField A(1);
  A.add_cosine({1}, 1.0).add_term({0}, 2.0);
  const auto op = assemble_dense(A, ProjectionMatrix(1, 1, {1.0}), 4);
  std::ostringstream os;
  op.write_matrix_market(os);
  CHECK(os.str().rfind("%%MatrixMarket matrix coordinate complex general", 0) == 0);
}

TEST_CASE("energy is the quadratic form") {
  std::mt19937 rng(9);
  for (int id : {1, 2, 3}) {
    const auto cfg = builtin_example(id);
    const auto Q = brute_force_q(cfg.coefficient, cfg.projection(), 4);
    const auto op = SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), 4);
    for (int t = 0; t < 3; ++t) {
      const Eigen::VectorXcd u = random_vector(op.size(), rng);
      const double q = u.dot(Q * u).real();
      CHECK(op.energy(u) == doctest::Approx(q).epsilon(1e-12));
    }
  }
  // A single high mode: the sum has one positive term per grid point.
  const auto cfg = builtin_example(3);
  const auto op = SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), 16);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(op.size());
  const std::size_t i = op.index_set().linearize(MultiIndex{7, -8, 7, -8});
  e[i] = 1.0;
  CHECK(op.energy(e) == doctest::Approx(op.diagonal()[i]).epsilon(4e-16 * 16));
  CHECK_THROWS_AS(op.energy(Eigen::VectorXcd::Zero(3)), std::invalid_argument);
}
