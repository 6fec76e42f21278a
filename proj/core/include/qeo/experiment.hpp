#pragma once

#include "qeo/eigensolver.hpp"
#include "qeo/lattice.hpp"
#include "qeo/trig_field.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qeo {

/// Everything needed to run one study: the quasiperiodic coefficient (as its
/// parent field), the projection, the grid sizes and the solver settings.
struct ExperimentConfig {
  std::string name;
  int d = 1;
  int n = 1;
  std::vector<double> P;  // row-major d x n
  TrigField coefficient{1};
  std::vector<int> grid_sizes;
  int reference_N = 0;
  int num_pairs = 1;         // tracked states
  int solve_pairs = 0;       // initial eigenpair count per solve; 0 picks a default
  bool skip_constant_state = true;
  double window_margin = 0.1;
  SolveOptions solver;
  double reference_tol = 1e-12;
  std::string output_dir = ".";

  ProjectionMatrix projection() const;
  /// Throws std::invalid_argument if any documented invariant fails.
  void validate() const;
};

/// Built-in studies: 1 (1D photonic quasicrystal, n = 2), 2 (2D, n = 3),
/// 3 (3D, n = 4). Throws std::invalid_argument for any other id.
ExperimentConfig builtin_example(int id);

/// Example 2 with an explicit lattice scale and rotation angle.
ExperimentConfig rotated_lattice_example(double scale, double theta);

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& cfg);

Normalization parse_normalization(const std::string& s);
SolveMode parse_solve_mode(const std::string& s);
PreconditionerKind parse_preconditioner(const std::string& s);
const char* to_string(PreconditionerKind p) noexcept;
const char* to_string(Normalization n) noexcept;
const char* to_string(SolveMode m) noexcept;

}  // namespace qeo
