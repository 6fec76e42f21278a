#include "qeo/output.hpp"

#include "number_format.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qeo {

using detail::sci;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

constexpr const char* kConvergenceHeader =
    "N,state,index,eigenvalue,gamma_minus_one,eigenvalue_error,eigenfunction_error,overlap,"
    "ambiguous,residual,converged,seconds,iterations,pairs";

}  // namespace

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("output directory " + dir.string() + " is not usable");
  const fs::path probe = dir / ".qeo_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records) {
  os << kConvergenceHeader << '\n';
  for (const ConvergenceRecord& r : records) {
    for (std::size_t s = 0; s < r.states.size(); ++s) {
      const StateRecord& st = r.states[s];
      os << r.N << ',' << s + 1 << ',' << st.index << ',' << sci(st.eigenvalue) << ','
         << sci(st.shifted) << ',' << sci(st.eigenvalue_error) << ','
         << sci(st.eigenfunction_error) << ',' << sci(st.overlap) << ',' << int(st.ambiguous)
         << ',' << sci(st.residual) << ',' << int(st.converged) << ',' << sci(r.seconds) << ','
         << r.iterations << ',' << r.pairs << '\n';
    }
  }
}

std::vector<ConvergenceRecord> parse_convergence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kConvergenceHeader)
    throw std::invalid_argument("parse_convergence_csv: unexpected header");
  std::vector<ConvergenceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 14) throw std::invalid_argument("parse_convergence_csv: bad row '" + line + "'");
    const int N = std::stoi(c[0]);
    const std::size_t state = std::stoul(c[1]);
    if (out.empty() || out.back().N != N) {
      ConvergenceRecord r;
      r.N = N;
      r.seconds = std::stod(c[11]);
      r.iterations = std::stoi(c[12]);
      r.pairs = std::stoi(c[13]);
      out.push_back(r);
    }
    StateRecord st;
    st.index = std::stoi(c[2]);
    st.eigenvalue = std::stod(c[3]);
    st.shifted = std::stod(c[4]);
    st.eigenvalue_error = std::stod(c[5]);
    st.eigenfunction_error = std::stod(c[6]);
    st.overlap = std::stod(c[7]);
    st.ambiguous = c[8] == "1";
    st.residual = std::stod(c[9]);
    st.converged = c[10] == "1";
    if (state != out.back().states.size() + 1)
      throw std::invalid_argument("parse_convergence_csv: states out of order");
    out.back().states.push_back(st);
  }
  return out;
}

std::vector<fs::path> write_plotdata(const fs::path& dir, const std::string& stem,
                                     const std::vector<ConvergenceRecord>& records) {
  std::vector<fs::path> files;
  if (records.empty()) return files;
  const std::size_t S = records.front().states.size();
  for (std::size_t s = 0; s < S; ++s) {
    for (const bool eigenvalue : {true, false}) {
      const fs::path p = dir / (stem + "_state" + std::to_string(s + 1) +
                                (eigenvalue ? "_eigenvalue.dat" : "_eigenfunction.dat"));
      auto out = open_out(p);
      out << "# N " << (eigenvalue ? "eigenvalue_error" : "eigenfunction_error") << '\n';
      for (const ConvergenceRecord& r : records) {
        const StateRecord& st = r.states.at(s);
        out << r.N << ' ' << sci(eigenvalue ? st.eigenvalue_error : st.eigenfunction_error) << '\n';
      }
      files.push_back(p);
    }
  }
  return files;
}

void write_eigen_result_csv(std::ostream& os, const EigenResult& r) {
  os << "index,eigenvalue,residual,iterations\n";
  for (std::size_t j = 0; j < r.size(); ++j)
    os << j << ',' << sci(r.eigenvalues[j]) << ',' << sci(r.residual_norms[j]) << ','
       << r.iterations << '\n';
}

void write_eigen_result(const fs::path& dir, const EigenResult& r) {
  ensure_output_dir(dir);
  {
    auto out = open_out(dir / "eigen.csv");
    write_eigen_result_csv(out, r);
  }
  for (std::size_t j = 0; j < r.size(); ++j) {
    auto out = open_out(dir / ("eigenvector_" + std::to_string(j) + ".csv"));
    write_coefficients_csv(out, r.eigenvectors[j]);
  }
}

void write_condition_csv(std::ostream& os, const std::vector<ConditionRow>& rows) {
  os << "N,cond_Q,cond_MQ,cond1_Q,cond1_MQ,seconds\n";
  for (const ConditionRow& r : rows)
    os << r.N << ',' << sci(r.cond.cond_Q) << ',' << sci(r.cond.cond_MQ) << ','
       << sci(r.cond.cond1_Q) << ',' << sci(r.cond.cond1_MQ) << ',' << sci(r.seconds) << '\n';
}

void write_pam_csv(std::ostream& os, const std::vector<PamStudyRow>& rows) {
  os << "L,e_def,e_scaled,gamma_err_1,gamma_err_2,cpu_pm_seconds,cpu_pam_seconds\n";
  auto err = [](const PamStudyRow& r, std::size_t s) {
    return s < r.gamma_errors.size() ? sci(r.gamma_errors[s]) : std::string("nan");
  };
  for (const PamStudyRow& r : rows)
    os << r.approx.L << ',' << sci(r.approx.e_def) << ',' << sci(r.approx.e_scaled) << ','
       << err(r, 0) << ',' << err(r, 1) << ',' << sci(r.pm_seconds) << ',' << sci(r.pam_seconds)
       << '\n';
}

std::vector<TracePoint> eigenfunction_trace(const CoefficientField& u, const ProjectionMatrix& P,
                                            double t0, double t1, int samples) {
  if (samples < 2) throw std::invalid_argument("eigenfunction_trace: need at least 2 samples");
  if (P.torus_dim() != u.dim()) throw std::invalid_argument("eigenfunction_trace: dimension mismatch");
  const auto& set = u.index_set();
  // Only the first physical coordinate varies along the trace.
  std::vector<double> lambda(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const MultiIndex k = set.delinearize(i);
    double l = 0.0;
    for (int c = 0; c < P.torus_dim(); ++c) l += P(0, c) * k[c];
    lambda[i] = l;
  }
  std::vector<TracePoint> out(samples);
  for (int s = 0; s < samples; ++s) {
    const double t = t0 + (t1 - t0) * s / (samples - 1);
    Complex v = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] != Complex(0.0)) v += u[i] * std::polar(1.0, lambda[i] * t);
    out[s] = {t, v};
  }
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "x,re,im,abs\n";
  for (const TracePoint& p : trace)
    os << sci(p.t) << ',' << sci(p.value.real()) << ',' << sci(p.value.imag()) << ','
       << sci(std::abs(p.value)) << '\n';
}

void write_metadata_json(const fs::path& path, const ExperimentConfig& cfg,
                         const std::string& command, const std::string& extra_json) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = nlohmann::json::parse(to_json(cfg));
  j["metrics"] = {
      {"eigenvalue_error", "|gamma_ref - gamma_N| for the state tracked by eigenfunction overlap"},
      {"eigenfunction_error",
       "min over phase phi of ||exp(i phi) u_N - u_ref||_2 on Fourier coefficients, both L2-unit, "
       "u_N zero-padded to the reference grid"},
      {"overlap", "|<u_N, u_ref>| of L2-unit coefficient vectors"},
      {"gamma_minus_one", "eigenvalue of the operator without the identity shift"},
      {"condition_numbers", "2-norm (ratio of extreme singular values); 1-norm columns when requested"},
      {"pam_gamma_err", "|gamma_PM - gamma_PAM| for PAM states matched by collapsed-eigenfunction overlap"},
  };
  j["extra"] = nlohmann::json::parse(extra_json);
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace qeo
