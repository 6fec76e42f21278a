#pragma once

#include "qeo/convergence.hpp"
#include "qeo/eigensolver.hpp"
#include "qeo/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qeo {

/// Creates dir if needed and checks that a file can be written inside it.
/// Throws std::runtime_error otherwise.
void ensure_output_dir(const std::filesystem::path& dir);

/// One row per (N, state). Header only when records is empty.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> parse_convergence_csv(std::istream& is);

/// Two-column "N error" series, one file per state and quantity:
/// <stem>_state<s>_eigenvalue.dat and <stem>_state<s>_eigenfunction.dat.
std::vector<std::filesystem::path> write_plotdata(const std::filesystem::path& dir,
                                                  const std::string& stem,
                                                  const std::vector<ConvergenceRecord>& records);

/// index,eigenvalue,residual,iterations
void write_eigen_result_csv(std::ostream& os, const EigenResult& r);
/// eigen.csv plus eigenvector_<j>.csv per pair.
void write_eigen_result(const std::filesystem::path& dir, const EigenResult& r);

void write_condition_csv(std::ostream& os, const std::vector<ConditionRow>& rows);

/// L,e_def,e_scaled,gamma_err_1,gamma_err_2,cpu_pm_seconds,cpu_pam_seconds
void write_pam_csv(std::ostream& os, const std::vector<PamStudyRow>& rows);

/// Samples u(x) = sum_k u_k exp(i (P k).x) at x = t e_1, t uniform on [t0, t1].
struct TracePoint {
  double t = 0.0;
  Complex value;
};
std::vector<TracePoint> eigenfunction_trace(const CoefficientField& u, const ProjectionMatrix& P,
                                            double t0, double t1, int samples);
/// x,re,im,abs
void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace);

/// Config, solver settings and the error-metric definitions used in the CSVs.
void write_metadata_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                         const std::string& command, const std::string& extra_json = "{}");

}  // namespace qeo
