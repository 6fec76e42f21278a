#include "qeo/experiment.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qeo {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TrigField sum_of_cosines(int n, double amplitude, double constant) {
  TrigField f(n);
  f.add_term(MultiIndex(n, 0), constant);
  for (int j = 0; j < n; ++j) {
    MultiIndex k(n, 0);
    k[j] = 1;
    f.add_cosine(k, amplitude);
  }
  return f;
}

}  // namespace

ProjectionMatrix ExperimentConfig::projection() const { return ProjectionMatrix(d, n, P); }

void ExperimentConfig::validate() const {
  if (d < 1 || n < d) throw std::invalid_argument("config: need 1 <= d <= n");
  if (P.size() != static_cast<std::size_t>(d) * n)
    throw std::invalid_argument("config: P must have d*n entries");
  if (coefficient.dim() != n) throw std::invalid_argument("config: coefficient dimension != n");
  if (!coefficient.is_real()) throw std::invalid_argument("config: coefficient must be real valued");
  if (grid_sizes.empty()) throw std::invalid_argument("config: empty N list");
  for (int N : grid_sizes)
    if (N < 2) throw std::invalid_argument("config: every N must be at least 2");
  if (reference_N < *std::max_element(grid_sizes.begin(), grid_sizes.end()))
    throw std::invalid_argument("config: referenceN must be >= max(N list)");
  if (num_pairs < 1) throw std::invalid_argument("config: numPairs must be positive");
  if (solve_pairs < 0) throw std::invalid_argument("config: solvePairs must be nonnegative");
  if (!(solver.tol > 0.0) || !(reference_tol > 0.0))
    throw std::invalid_argument("config: tolerances must be positive");
  (void)projection();  // rank check
}

ExperimentConfig builtin_example(int id) {
  ExperimentConfig cfg;
  cfg.solver.tol = 1e-10;
  switch (id) {
    case 1: {
      cfg.name = "example1";
      cfg.d = 1;
      cfg.n = 2;
      cfg.P = {kTwoPi, kTwoPi * 0.5 * (std::sqrt(5.0) - 1.0)};
      cfg.coefficient = sum_of_cosines(2, 0.5, 1.0);
      cfg.grid_sizes = {8, 16, 32};
      cfg.reference_N = 128;
      cfg.num_pairs = 2;
      cfg.solve_pairs = 16;
      cfg.reference_tol = 1e-10;
      cfg.solver.preconditioner = PreconditionerKind::Factorized;
      break;
    }
    case 2:
      return rotated_lattice_example(0.5 * std::numbers::pi, 0.2 * std::numbers::pi);
    case 3: {
      cfg.name = "example3";
      cfg.d = 3;
      cfg.n = 4;
      const double b = std::sqrt(5.0) - 1.0;
      cfg.P = {kTwoPi, 0, 0, 0, 0, kTwoPi, 0, 0, 0, 0, kTwoPi, kTwoPi * b};
      cfg.coefficient = sum_of_cosines(4, 1.0, 8.0);
      cfg.grid_sizes = {6, 8, 10, 12, 14};
      cfg.reference_N = 16;
      cfg.num_pairs = 3;
      cfg.solve_pairs = 8;
      break;
    }
    default:
      throw std::invalid_argument("builtin_example: unknown id " + std::to_string(id));
  }
  return cfg;
}

ExperimentConfig rotated_lattice_example(double scale, double theta) {
  ExperimentConfig cfg;
  cfg.name = "example2";
  cfg.d = 2;
  cfg.n = 3;
  cfg.P = {scale, 0.0, scale * std::cos(theta), 0.0, scale, scale * std::sin(theta)};
  cfg.coefficient = sum_of_cosines(3, 1.0, 6.0);
  cfg.grid_sizes = {8, 16, 32};
  cfg.reference_N = 64;
  cfg.num_pairs = 2;
  cfg.solve_pairs = 8;
  return cfg;
}

Normalization parse_normalization(const std::string& s) {
  if (s == "l2") return Normalization::L2;
  if (s == "h1p") return Normalization::H1P;
  throw std::invalid_argument("unknown normalization '" + s + "' (expected l2 or h1p)");
}

SolveMode parse_solve_mode(const std::string& s) {
  if (s == "dense") return SolveMode::Dense;
  if (s == "iterative") return SolveMode::Iterative;
  throw std::invalid_argument("unknown mode '" + s + "' (expected dense or iterative)");
}

PreconditionerKind parse_preconditioner(const std::string& s) {
  if (s == "diagonal") return PreconditionerKind::Diagonal;
  if (s == "factorized") return PreconditionerKind::Factorized;
  throw std::invalid_argument("unknown preconditioner '" + s + "' (expected diagonal or factorized)");
}

const char* to_string(PreconditionerKind p) noexcept {
  return p == PreconditionerKind::Diagonal ? "diagonal" : "factorized";
}

const char* to_string(Normalization n) noexcept { return n == Normalization::L2 ? "l2" : "h1p"; }
const char* to_string(SolveMode m) noexcept {
  return m == SolveMode::Dense ? "dense" : "iterative";
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    cfg.name = j.value("name", std::string("custom"));
    cfg.d = j.at("d").get<int>();
    cfg.n = j.at("n").get<int>();
    cfg.P = j.at("P").get<std::vector<double>>();
    cfg.coefficient = TrigField(cfg.n);
    for (const json& t : j.at("coefficient")) {
      const auto k = t.at("k").get<MultiIndex>();
      if (static_cast<int>(k.size()) != cfg.n)
        throw std::invalid_argument("config: coefficient index length != n");
      cfg.coefficient.add_term(k, Complex(t.value("re", 0.0), t.value("im", 0.0)));
    }
    cfg.grid_sizes = j.at("N").get<std::vector<int>>();
    cfg.reference_N = j.at("referenceN").get<int>();
    cfg.num_pairs = j.value("numPairs", 1);
    cfg.solve_pairs = j.value("solvePairs", 0);
    cfg.skip_constant_state = j.value("skipConstantState", true);
    cfg.window_margin = j.value("windowMargin", 0.1);
    cfg.reference_tol = j.value("referenceTol", 1e-12);
    cfg.output_dir = j.value("outputDir", std::string("."));
    cfg.solver.normalization = parse_normalization(j.value("normalization", std::string("l2")));
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.solver.tol = s.value("tol", cfg.solver.tol);
      cfg.solver.max_iterations = s.value("maxIterations", cfg.solver.max_iterations);
      cfg.solver.block_size = s.value("blockSize", cfg.solver.block_size);
      cfg.solver.seed = s.value("seed", cfg.solver.seed);
      cfg.solver.mode = parse_solve_mode(s.value("mode", std::string("iterative")));
      cfg.solver.preconditioner =
          parse_preconditioner(s.value("preconditioner", std::string("diagonal")));
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json terms = json::array();
  for (const auto& [k, c] : cfg.coefficient.terms())
    terms.push_back({{"k", k}, {"re", c.real()}, {"im", c.imag()}});
  json j = {
      {"name", cfg.name},
      {"d", cfg.d},
      {"n", cfg.n},
      {"P", cfg.P},
      {"coefficient", terms},
      {"N", cfg.grid_sizes},
      {"referenceN", cfg.reference_N},
      {"numPairs", cfg.num_pairs},
      {"solvePairs", cfg.solve_pairs},
      {"skipConstantState", cfg.skip_constant_state},
      {"windowMargin", cfg.window_margin},
      {"referenceTol", cfg.reference_tol},
      {"normalization", to_string(cfg.solver.normalization)},
      {"outputDir", cfg.output_dir},
      {"solver",
       {{"tol", cfg.solver.tol},
        {"maxIterations", cfg.solver.max_iterations},
        {"blockSize", cfg.solver.block_size},
        {"seed", cfg.solver.seed},
        {"mode", to_string(cfg.solver.mode)},
        {"preconditioner", to_string(cfg.solver.preconditioner)}}},
  };
  return j.dump(2);
}

}  // namespace qeo
