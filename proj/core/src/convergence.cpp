#include "qeo/convergence.hpp"

#include <algorithm>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace qeo {

namespace {

// sum_k conj(a_k) b_k over the modes both grids carry.
Complex inner(const CoefficientField& a, const CoefficientField& b) {
  const bool a_small = a.size() <= b.size();
  const CoefficientField& small = a_small ? a : b;
  const CoefficientField& large = a_small ? b : a;
  const auto& ss = small.index_set();
  const auto& ls = large.index_set();
  Complex s = 0.0;
  if (ss == ls) {
    for (std::size_t i = 0; i < small.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
  }
  for (std::size_t i = 0; i < small.size(); ++i) {
    const MultiIndex k = ss.delinearize(i);
    if (!ls.contains(k)) continue;
    const std::size_t j = ls.linearize(k);
    s += a_small ? std::conj(small[i]) * large[j] : std::conj(large[j]) * small[i];
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

EigenResult subset(const EigenResult& r, const std::vector<int>& idx) {
  EigenResult out;
  out.iterations = r.iterations;
  out.normalization = r.normalization;
  out.seconds = r.seconds;
  for (int i : idx) {
    out.eigenvalues.push_back(r.eigenvalues[i]);
    out.eigenvectors.push_back(r.eigenvectors[i]);
    out.residual_norms.push_back(r.residual_norms[i]);
    out.converged.push_back(r.converged[i]);
  }
  return out;
}

CoefficientField unit(CoefficientField u) {
  const double nrm = l2_norm(u);
  if (!(nrm > 0.0)) throw std::invalid_argument("zero eigenvector");
  for (Complex& c : u.coeffs()) c /= nrm;
  return u;
}

int default_pairs(const ExperimentConfig& cfg) {
  return cfg.solve_pairs > 0 ? cfg.solve_pairs : cfg.num_pairs + 5;
}

}  // namespace

CoefficientField embed_coefficients(const CoefficientField& u, int N2) {
  const int N1 = u.grid_size();
  if (N2 < N1) throw std::invalid_argument("embed_coefficients: target grid is smaller");
  if (N2 == N1) return u;
  const auto& from = u.index_set();
  CoefficientField out(FrequencyIndexSet(N2, u.dim()));
  for (std::size_t i = 0; i < u.size(); ++i)
    out[out.index_set().linearize(from.delinearize(i))] = u[i];
  return out;
}

double overlap(const CoefficientField& a, const CoefficientField& b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("overlap: zero vector");
  return std::abs(inner(a, b)) / (na * nb);
}

bool TrackingResult::any_ambiguous() const noexcept {
  return std::any_of(ambiguous.begin(), ambiguous.end(), [](bool b) { return b; });
}

TrackingResult track_eigenpairs(const EigenResult& reference, const EigenResult& current,
                                std::optional<std::vector<int>> states) {
  std::vector<int> idx;
  if (states) {
    idx = *states;
  } else {
    idx.resize(reference.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  const std::size_t S = idx.size();
  const std::size_t C = current.size();
  if (C < S) throw std::invalid_argument("track_eigenpairs: fewer current pairs than states");

  std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
  cand.reserve(S * C);
  for (std::size_t s = 0; s < S; ++s) {
    if (idx[s] < 0 || static_cast<std::size_t>(idx[s]) >= reference.size())
      throw std::out_of_range("track_eigenpairs: state index");
    for (std::size_t c = 0; c < C; ++c)
      cand.emplace_back(overlap(reference.eigenvectors[idx[s]], current.eigenvectors[c]), s, c);
  }
  // Largest overlaps first; ties go to the lower state, then the lower candidate.
  std::stable_sort(cand.begin(), cand.end(),
                   [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });

  TrackingResult t;
  t.match.assign(S, -1);
  t.overlaps.assign(S, 0.0);
  t.ambiguous.assign(S, false);
  std::vector<bool> used(C, false);
  std::size_t assigned = 0;
  for (const auto& [ov, s, c] : cand) {
    if (assigned == S) break;
    if (t.match[s] >= 0 || used[c]) continue;
    t.match[s] = static_cast<int>(c);
    t.overlaps[s] = ov;
    t.ambiguous[s] = ov < TrackingResult::kAmbiguousOverlap;
    used[c] = true;
    ++assigned;
  }
  return t;
}

double eigenfunction_error(const CoefficientField& u_ref, const CoefficientField& u_N) {
  if (!(l2_norm(u_ref) > 0.0) || !(l2_norm(u_N) > 0.0))
    throw std::invalid_argument("eigenfunction_error: zero vector");
  const int N = std::max(u_ref.grid_size(), u_N.grid_size());
  const CoefficientField a = embed_coefficients(u_ref, N);
  const CoefficientField b = embed_coefficients(u_N, N);
  const Complex c = inner(b, a);
  const Complex phase = std::abs(c) > 0.0 ? c / std::abs(c) : Complex(1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(phase * b[i] - a[i]);
  return std::sqrt(s);
}

std::optional<int> constant_state(const EigenResult& r, double tol) {
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (std::abs(r.eigenvalues[j] - 1.0) > tol) continue;
    const CoefficientField& u = r.eigenvectors[j];
    const MultiIndex zero(u.dim(), 0);
    if (std::abs(u.at(zero)) >= (1.0 - tol) * l2_norm(u)) return static_cast<int>(j);
  }
  return std::nullopt;
}

TrackedSolve solve_tracked(const ExperimentConfig& cfg, int N, const EigenResult& targets,
                           int initial_pairs, double tol, const ProgressFn& progress,
                           const std::vector<CoefficientField>& start) {
  const SpectralOperator op =
      cfg.solver.mode == SolveMode::Dense
          ? SpectralOperator::dense(cfg.coefficient, cfg.projection(), N)
          : SpectralOperator::matrix_free(cfg.coefficient, cfg.projection(), N);
  const int D = static_cast<int>(op.size());
  using Block = std::vector<CoefficientField>;
  std::function<EigenResult(const SolveOptions&, const Block&)> run;
  if (cfg.solver.mode == SolveMode::Dense) {
    run = [&op](const SolveOptions& o, const Block&) { return solve_dense(op, o); };
  } else if (cfg.solver.preconditioner == PreconditionerKind::Factorized) {
    run = [&op, M = FactorizedPreconditioner(op)](const SolveOptions& o, const Block& x0) {
      return solve_iterative(op, M, o, x0);
    };
  } else {
    run = [&op, M = build_preconditioner(op)](const SolveOptions& o, const Block& x0) {
      return solve_iterative(op, M, o, x0);
    };
  }
  // Coarser vectors are zero-padded onto this grid.
  Block x0;
  for (const CoefficientField& u : start)
    x0.push_back(embed_coefficients(u, N));

  int pairs = std::clamp(initial_pairs, static_cast<int>(targets.size()), D);
  for (;;) {
    SolveOptions opts = cfg.solver;
    opts.pairs = pairs;
    opts.tol = tol;
    // Wide windows need more guard vectors than the default four to keep the
    // top wanted pairs from stalling.
    if (opts.block_size == 0) opts.block_size = pairs + std::max(4, pairs / 4);
    EigenResult r = run(opts, x0);
    TrackingResult t = track_eigenpairs(targets, r);

    double top = 0.0;
    int last = 0;
    for (int j : t.match) {
      top = std::max(top, r.eigenvalues[j]);
      last = std::max(last, j);
    }
    const bool covered = !t.any_ambiguous() && last < pairs - 1 &&
                         r.eigenvalues.back() >= top + cfg.window_margin * std::abs(top);
    char buf[160];
    std::snprintf(buf, sizeof buf, " min overlap %.3f, window %.6g vs target %.6g",
                  t.overlaps.empty() ? 1.0 : *std::min_element(t.overlaps.begin(), t.overlaps.end()),
                  r.eigenvalues.back(), top);
    report(progress, "  N=" + std::to_string(N) + " pairs=" + std::to_string(pairs) +
                         " iterations=" + std::to_string(r.iterations) + " (" +
                         std::to_string(r.seconds) + " s)" + buf);
    if (covered || pairs >= D) return {std::move(r), std::move(t)};
    pairs = std::min(2 * pairs, D);
    x0 = std::move(r.eigenvectors);
  }
}

ConvergenceStudy run_convergence_study(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  ConvergenceStudy study;
  study.name = cfg.name;
  std::vector<int> Ns = cfg.grid_sizes;
  std::sort(Ns.begin(), Ns.end());
  Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
  study.coarse_N = Ns.front();
  study.reference_N = cfg.reference_N;

  const ProjectionMatrix P = cfg.projection();

  // Coarse-state selection.
  EigenResult coarse_sel;
  {
    const SpectralOperator op =
        cfg.solver.mode == SolveMode::Dense
            ? SpectralOperator::dense(cfg.coefficient, P, study.coarse_N)
            : SpectralOperator::matrix_free(cfg.coefficient, P, study.coarse_N);
    const int D = static_cast<int>(op.size());
    const int need = cfg.num_pairs + (cfg.skip_constant_state ? 1 : 0);
    if (need > D) throw std::invalid_argument("convergence: coarse grid has too few modes");
    int pairs = std::clamp(default_pairs(cfg), need, D);
    for (;;) {
      SolveOptions opts = cfg.solver;
      opts.pairs = pairs;
      EigenResult r = solve(op, opts);
      const std::optional<int> c0 = cfg.skip_constant_state ? constant_state(r) : std::nullopt;
      std::vector<int> chosen;
      for (int j = 0; j < static_cast<int>(r.size()); ++j)
        if ((!c0 || *c0 != j) && static_cast<int>(chosen.size()) < cfg.num_pairs) chosen.push_back(j);
      if (static_cast<int>(chosen.size()) == cfg.num_pairs || pairs >= D) {
        coarse_sel = subset(r, chosen);
        break;
      }
      pairs = std::min(2 * pairs, D);
    }
    for (CoefficientField& u : coarse_sel.eigenvectors) u = unit(std::move(u));
    study.coarse_eigenvalues = coarse_sel.eigenvalues;
    report(progress, "coarse N=" + std::to_string(study.coarse_N) + " states selected");
  }

  // Follow the states up the ladder of grids, each level tracked from the one below.
  std::vector<int> ladder = Ns;
  if (ladder.back() != cfg.reference_N) ladder.push_back(cfg.reference_N);
  std::vector<TrackedSolve> levels;
  EigenResult targets = coarse_sel;
  std::vector<CoefficientField> start;
  int pairs = default_pairs(cfg);
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    const int N = ladder[l];
    const bool is_reference = N == cfg.reference_N;
    double tol = is_reference ? cfg.reference_tol : cfg.solver.tol;
    const auto t0 = std::chrono::steady_clock::now();
    TrackedSolve ts = solve_tracked(cfg, N, targets, pairs, tol, progress, start);
    if (is_reference) {
      // The tolerance relaxes by 10x once if the tracked states miss it.
      const bool ok = std::all_of(ts.tracking.match.begin(), ts.tracking.match.end(),
                                  [&](int j) { return ts.result.converged[j]; });
      if (!ok) {
        tol *= 10.0;
        ts = solve_tracked(cfg, N, targets, static_cast<int>(ts.result.size()), tol, progress,
                           ts.result.eigenvectors);
      }
      study.reference_tol = tol;
    }
    ts.result.seconds = seconds_since(t0);
    // The count of states below a fixed level grows about linearly in N when
    // n = d + 1, so the next starting window scales with the one that sufficed here.
    if (l + 1 < ladder.size()) {
      double top = 0.0;
      for (int j : ts.tracking.match) top = std::max(top, ts.result.eigenvalues[j]);
      const auto needed = std::count_if(
          ts.result.eigenvalues.begin(), ts.result.eigenvalues.end(),
          [&](double g) { return g <= top + cfg.window_margin * std::abs(top); });
      const double grow = static_cast<double>(ladder[l + 1]) / N;
      pairs = std::max(default_pairs(cfg),
                       static_cast<int>(std::ceil(static_cast<double>(needed + 1) * grow)) + 4);
    }
    start = ts.result.eigenvectors;
    targets = subset(ts.result, ts.tracking.match);
    for (CoefficientField& u : targets.eigenvectors) u = unit(std::move(u));
    report(progress, "N=" + std::to_string(N) + " tracked");
    levels.push_back(std::move(ts));
  }

  study.reference = targets;
  study.reference.seconds = levels.back().result.seconds;
  study.reference_eigenvalues = study.reference.eigenvalues;
  for (std::size_t s = 0; s < coarse_sel.size(); ++s)
    study.coarse_to_reference_overlaps.push_back(
        overlap(coarse_sel.eigenvectors[s], study.reference.eigenvectors[s]));

  for (std::size_t l = 0; l < Ns.size(); ++l) {
    const TrackedSolve& ts = levels[l];
    ConvergenceRecord rec;
    rec.N = Ns[l];
    rec.seconds = ts.result.seconds;
    rec.iterations = ts.result.iterations;
    rec.pairs = static_cast<int>(ts.result.size());
    for (std::size_t s = 0; s < study.reference.size(); ++s) {
      const int j = ts.tracking.match[s];
      const CoefficientField u = unit(ts.result.eigenvectors[j]);
      StateRecord st;
      st.index = j;
      st.eigenvalue = ts.result.eigenvalues[j];
      st.shifted = st.eigenvalue - 1.0;
      st.eigenvalue_error = std::abs(study.reference.eigenvalues[s] - st.eigenvalue);
      st.eigenfunction_error = eigenfunction_error(study.reference.eigenvectors[s], u);
      st.overlap = overlap(u, study.reference.eigenvectors[s]);
      st.ambiguous = ts.tracking.ambiguous[s] || st.overlap < TrackingResult::kAmbiguousOverlap;
      st.residual = ts.result.residual_norms[j];
      st.converged = ts.result.converged[j];
      rec.states.push_back(st);
    }
    study.records.push_back(std::move(rec));
  }
  return study;
}

std::vector<ConditionRow> run_condition_report(const ExperimentConfig& cfg,
                                               const std::vector<int>& grid_sizes,
                                               bool include_one_norm, const ProgressFn& progress) {
  std::vector<ConditionRow> rows;
  for (int N : grid_sizes) {
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralOperator op = SpectralOperator::dense(cfg.coefficient, cfg.projection(), N);
    ConditionRow row;
    row.N = N;
    row.cond = condition_numbers(op, build_preconditioner(op), include_one_norm);
    row.seconds = seconds_since(t0);
    rows.push_back(row);
    report(progress, "condition N=" + std::to_string(N) + " done");
  }
  return rows;
}

std::vector<PamStudyRow> run_pam_study(const EigenResult& pm_reference, double pm_seconds,
                                       const std::vector<long long>& Ls, int N,
                                       const PamOptions& opts, double margin,
                                       const ProgressFn& progress) {
  if (pm_reference.size() == 0) throw std::invalid_argument("run_pam_study: no PM states");
  const double top =
      *std::max_element(pm_reference.eigenvalues.begin(), pm_reference.eigenvalues.end());
  std::vector<PamStudyRow> rows;
  for (long long L : Ls) {
    const PamProblem problem = pam_problem(L, N, opts);
    EigenResult targets;
    for (std::size_t s = 0; s < pm_reference.size(); ++s) {
      targets.eigenvalues.push_back(pm_reference.eigenvalues[s]);
      targets.eigenvectors.push_back(
          collapse_to_supercell(pm_reference.eigenvectors[s], problem.approx, problem.modes));
      targets.residual_norms.push_back(0.0);
      targets.converged.push_back(true);
    }
    EigenResult pam = pam_solve_below(problem, top + margin * std::abs(top), opts.tol);
    if (pam.size() < targets.size())
      pam = pam_solve(problem, static_cast<int>(targets.size()), opts.tol);
    const TrackingResult t = track_eigenpairs(targets, pam);

    PamStudyRow row;
    row.approx = problem.approx;
    row.variant = opts.variant;
    row.N = N;
    row.pm_seconds = pm_seconds;
    row.pam_seconds = pam.seconds;
    for (std::size_t s = 0; s < targets.size(); ++s) {
      const double g = pam.eigenvalues[t.match[s]];
      row.pam_eigenvalues.push_back(g);
      row.gamma_errors.push_back(std::abs(pm_reference.eigenvalues[s] - g));
      row.overlaps.push_back(t.overlaps[s]);
    }
    rows.push_back(std::move(row));
    report(progress, "PAM L=" + std::to_string(L) + " done");
  }
  return rows;
}

}  // namespace qeo
