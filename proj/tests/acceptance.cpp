// Acceptance suite: one PASS/FAIL line per criterion, details on the lines below it.
#include "qeo/convergence.hpp"
#include "qeo/experiment.hpp"
#include "qeo/pam.hpp"
#include "qeo/spectral_operator.hpp"
#include "qeo/trig_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qeo;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream log;

  void check(bool ok, const std::string& what) {
    log << "    " << (ok ? "ok   " : "MISS ") << what << '\n';
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Eigen::VectorXcd random_vector(std::size_t M, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(M);
  for (std::size_t i = 0; i < M; ++i) v[i] = Complex(nd(rng), nd(rng));
  return v;
}

// Criterion 5 and 6 share the Example 1 study.
std::optional<ConvergenceStudy> example1_study;

const ConvergenceStudy& example1() {
  if (!example1_study) example1_study = run_convergence_study(builtin_example(1));
  return *example1_study;
}

void dense_vs_matrix_free(Outcome& o) {
  std::mt19937 rng(20240601);
  for (int id : {1, 2, 3}) {
    const auto cfg = builtin_example(id);
    for (int N : {4, 8}) {
      const auto op = assemble_dense(cfg.coefficient, cfg.projection(), N);
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXcd u = random_vector(op.size(), rng);
        const Eigen::VectorXcd a = op.matrix() * u;
        worst = std::max(worst, (a - op.apply(u)).norm() / a.norm());
      }
      o.check(worst <= 1e-12, "example " + std::to_string(id) + " N=" + std::to_string(N) +
                                  " max relative difference " + fmt("%.3e", worst));
    }
  }
}

void hermitian_and_coercive(Outcome& o) {
  for (int id : {1, 2, 3}) {
    const auto cfg = builtin_example(id);
    for (int N : {4, 8, 16}) {
      if (std::pow(static_cast<double>(N), cfg.n) > static_cast<double>(kDefaultDenseLimit)) continue;
      const auto op = assemble_dense(cfg.coefficient, cfg.projection(), N);
      const auto& Q = op.matrix();
      const double herm = (Q - Q.adjoint()).norm() / Q.norm();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      o.check(herm <= 1e-12 && lmin >= 1.0 - 1e-8,
              "example " + std::to_string(id) + " N=" + std::to_string(N) + " asymmetry " +
                  fmt("%.2e", herm) + " lambda_min " + fmt("%.15f", lmin));
    }
  }
}

void condition_table(Outcome& o) {
  const std::vector<int> Ns{8, 16, 32, 64};
  const double mq[] = {4.16, 4.40, 4.76, 4.77};
  const auto rows = run_condition_report(builtin_example(1), Ns);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double rel = std::abs(rows[i].cond.cond_MQ - mq[i]) / mq[i];
    o.check(rel <= 0.05, "N=" + std::to_string(Ns[i]) + " cond(MQ) " + fmt("%.4f", rows[i].cond.cond_MQ) +
                             " vs " + fmt("%.2f", mq[i]) + " (cond(Q) " + fmt("%.4e", rows[i].cond.cond_Q) + ")");
  }
  bool grows = true;
  for (std::size_t i = 1; i < rows.size(); ++i) grows = grows && rows[i].cond.cond_Q > rows[i - 1].cond.cond_Q;
  o.check(grows, "cond(Q) increases with N");
  const double c64 = rows.back().cond.cond_Q;
  o.check(c64 >= 1e7, "cond(Q) at N=64 is " + fmt("%.4e", c64) + ", at least 1e7");
  o.check(c64 >= 3.8355e7 / 5 && c64 <= 3.8355e7 * 5, "cond(Q) at N=64 within a factor 5 of 3.8355e+07");
}

void table2(Outcome& o) {
  const double paper[3][5] = {{4.4322e-05, 4.2692e-07, 3.8024e-09, 3.2880e-11, 2.7711e-13},
                              {5.1589e-05, 4.6952e-07, 4.0744e-09, 3.4962e-11, 2.9132e-13},
                              {0.0499, 1.1096e-04, 7.6371e-07, 1.0143e-08, 1.8659e-13}};
  const auto study = run_convergence_study(builtin_example(3));
  o.log << "    reference N=" << study.reference_N << " tol " << fmt("%.0e", study.reference_tol) << '\n';
  for (int s = 0; s < 3; ++s) {
    for (std::size_t r = 0; r < study.records.size() && r < 5; ++r) {
      const auto& st = study.records[r].states[s];
      const double e = st.eigenvalue_error;
      const double p = paper[s][r];
      o.check(e <= 3 * p && e >= p / 3, "state " + std::to_string(s + 1) + " N=" +
                                            std::to_string(study.records[r].N) + " error " + fmt("%.4e", e) +
                                            " vs " + fmt("%.4e", p) + (st.converged ? "" : " (unconverged)"));
    }
    for (std::size_t r = 1; r < study.records.size() && r < 5; ++r) {
      const double prev = study.records[r - 1].states[s].eigenvalue_error;
      const double cur = study.records[r].states[s].eigenvalue_error;
      if (prev <= 1e-12) continue;  // already at the rounding floor
      o.check(cur <= prev / 10, "state " + std::to_string(s + 1) + " reduction N=" +
                                    std::to_string(study.records[r - 1].N) + "->" +
                                    std::to_string(study.records[r].N) + " factor " + fmt("%.1f", prev / cur));
    }
  }
}

void example1_monotone(Outcome& o) {
  const auto& study = example1();
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t r = 0; r < study.records.size(); ++r) {
      const auto& st = study.records[r].states[s];
      o.log << "    state " << s + 1 << " N=" << study.records[r].N << " eigenvalue error "
            << fmt("%.4e", st.eigenvalue_error) << " eigenfunction error " << fmt("%.4e", st.eigenfunction_error)
            << " overlap " << fmt("%.3f", st.overlap) << '\n';
    }
    for (std::size_t r = 1; r < study.records.size(); ++r) {
      const auto& a = study.records[r - 1].states[s];
      const auto& b = study.records[r].states[s];
      const std::string step = "state " + std::to_string(s + 1) + " N=" + std::to_string(study.records[r - 1].N) +
                               "->" + std::to_string(study.records[r].N);
      o.check(b.eigenvalue_error < a.eigenvalue_error, step + " eigenvalue error decreases");
      o.check(b.eigenfunction_error < a.eigenfunction_error, step + " eigenfunction error decreases");
    }
  }
}

void pam_table1(Outcome& o) {
  struct Ref {
    long long L;
    double e_d;
  };
  for (Ref r : {Ref{17, 1.3156e-02}, Ref{72, 3.1056e-03}, Ref{233, 3.8358e-03}, Ref{305, 7.3314e-04},
                Ref{377, 2.3752e-03}}) {
    const double e = diophantine_error(r.L).e_scaled;
    char a[32], b[32];
    std::snprintf(a, sizeof a, "%.4e", e);
    std::snprintf(b, sizeof b, "%.4e", r.e_d);
    o.check(std::string(a) == b, "L=" + std::to_string(r.L) + " e_scaled " + a + " vs " + b);
  }
  {
    const double e = diophantine_error(144).e_scaled;
    const bool outlier = std::abs(e - 6.2112e-02) > 1e-4 * 6.2112e-02;
    o.check(outlier, "L=144 e_scaled " + fmt("%.4e", e) + " flagged against the published 6.2112e-02");
  }

  const auto& study = example1();
  const EigenResult& pm = study.reference;
  const double t1[] = {1.7e-3, 2.4649e-4};
  for (auto variant : {PamCoefficient::HalfScaled, PamCoefficient::AsPrinted}) {
    PamOptions opts;
    opts.variant = variant;
    const auto rows = run_pam_study(pm, 0.0, {233, 305}, 16, opts);
    const bool primary = variant == PamCoefficient::HalfScaled;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double e = rows[i].gamma_errors[0];
      const std::string what = std::string(primary ? "half-scaled" : "as-printed (informational)") + " L=" +
                               std::to_string(rows[i].approx.L) + " gamma_1 error " + fmt("%.4e", e) + " vs " +
                               fmt("%.4e", t1[i]);
      if (primary)
        o.check(e <= 5 * t1[i] && e >= t1[i] / 5, what);
      else
        o.log << "    info " << what << '\n';
    }
  }

  // Fixed L: refining the supercell grid does not beat the Diophantine floor.
  std::vector<double> errs;
  for (int N : {16, 32, 64}) {
    const auto rows = run_pam_study(pm, 0.0, {17}, N, PamOptions{});
    errs.push_back(rows[0].gamma_errors[0]);
    o.log << "    L=17 N=" << N << " gamma_1 error " << fmt("%.4e", errs.back()) << '\n';
  }
  for (std::size_t i = 1; i < errs.size(); ++i)
    o.check(errs[i] >= 0.9 * errs[i - 1], "L=17 error does not improve when N doubles (" +
                                              fmt("%.4e", errs[i - 1]) + " -> " + fmt("%.4e", errs[i]) + ")");
}

void preconditioner_optimality(Outcome& o) {
  const auto cfg = builtin_example(1);
  const auto op = assemble_dense(cfg.coefficient, cfg.projection(), 8);
  const auto M = build_preconditioner(op);
  const double best = preconditioner_residual(op, M.entries);
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale(-6.0, 0.0);
  int violations = 0;
  double closest = INFINITY;
  for (int t = 0; t < 100; ++t) {
    const double eps = std::pow(10.0, scale(rng));
    auto D = M.entries;
    for (double& v : D) v += eps * std::abs(v) * nd(rng);
    const double r = preconditioner_residual(op, D);
    if (r < best) ++violations;
    closest = std::min(closest, r - best);
  }
  o.check(violations == 0, "||MQ - I||_F = " + fmt("%.12f", best) + ", 100 perturbations, " +
                               std::to_string(violations) + " smaller, min gap " + fmt("%.3e", closest));
}

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

void approximation_suite(Outcome& o) {
  for (int n : {1, 2}) {
    const auto F = decaying_field(n, 40, 1.5);
    const ProjectionMatrix P =
        n == 1 ? ProjectionMatrix(1, 1, {1.0}) : ProjectionMatrix(1, 2, {1.0, 0.5 * (std::sqrt(5.0) - 1.0)});
    for (int N : {4, 8, 16}) {
      const double t1 = sobolev_distance(F, truncate(F, N), P, 1.0);
      const double t2 = sobolev_distance(F, truncate(F, 2 * N), P, 1.0);
      const double i1 = sobolev_distance(F, interpolate(F, N), P, 1.0);
      const double i2 = sobolev_distance(F, interpolate(F, 2 * N), P, 1.0);
      const std::string tag = "n=" + std::to_string(n) + " N=" + std::to_string(N) + "->" + std::to_string(2 * N);
      o.check(t2 <= 0.1 * t1, tag + " truncation ratio " + fmt("%.3e", t2 / t1));
      o.check(i2 <= 0.1 * i1, tag + " interpolation ratio " + fmt("%.3e", i2 / i1));
    }
  }
  // exp(i l.y) sampled on the grid lands on l mod N with unit weight and nothing else.
  bool exact = true;
  for (int N : {4, 5, 8}) {
    for (MultiIndex l : {MultiIndex{N, 0}, MultiIndex{N + 1, -2 * N}, MultiIndex{-3, 7}}) {
      TrigField f(2);
      f.add_term(l, 1.0);
      const auto c = interpolate(f, N);
      const MultiIndex w{wrap_component(l[0], N), wrap_component(l[1], N)};
      for (std::size_t i = 0; i < c.size(); ++i)
        exact = exact && std::abs(c[i] - (c.index_set()[i] == w ? 1.0 : 0.0)) <= 1e-14;
    }
  }
  o.check(exact, "aliasing identity exact to 1e-14 on N in {4, 5, 8}");
}

void ergodic_mean(Outcome& o) {
  const auto cfg = builtin_example(1);
  const Complex m = line_mean_estimate(cfg.coefficient, cfg.projection(), 1e4, 2000001);
  const double err = std::abs(m - 1.0);
  o.check(err < 1e-2, "T=1e4 mean " + fmt("%.8f", m.real()) + " error " + fmt("%.3e", err));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "dense and matrix-free operators agree", dense_vs_matrix_free},
      {2, "Q is Hermitian and coercive", hermitian_and_coercive},
      {3, "condition numbers of Q and MQ", condition_table},
      {4, "3D eigenvalue convergence", table2},
      {5, "1D errors decrease monotonically", example1_monotone},
      {6, "periodic approximation baseline", pam_table1},
      {7, "diagonal preconditioner is Frobenius optimal", preconditioner_optimality},
      {8, "truncation, interpolation and aliasing", approximation_suite},
      {9, "ergodic mean of the 1D coefficient", ergodic_mean},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %d: %s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title);
    std::fputs(o.log.str().c_str(), stdout);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
