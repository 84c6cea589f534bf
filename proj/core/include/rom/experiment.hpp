#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rom/bundle.hpp"
#include "rom/offline.hpp"

namespace rom {

struct SolverChoice {
  LinearSolverKind solver = LinearSolverKind::kDirect;
  std::string preconditioner = "none";  // none|offline-stokes|online-stokes|offline-ns|online-ns

  std::string label() const;
};

SolverChoice parse_solver_choice(const std::string& text);

// Flat experiment description. Values come from built-in defaults, then an
// optional key=value config file, then command-line overrides, in that order.
struct ExperimentConfig {
  int n = 32;
  int n_d = 2;
  double tau = 1e-4;
  double delta = 1e-8;
  int n_trial = 2000;
  int n_s = 10;
  std::uint64_t seed = 101;
  std::string strategy = "full-ks";
  std::vector<std::string> models = {"full", "reduced", "deim"};
  std::vector<SolverChoice> solvers = {SolverChoice{}};
  int n_deim = -1;  // <0: numerical rank of the snapshot matrix
  int ng_multiplier = 2;
  std::string index_method = "deim";
  double krylov_tol = 1e-9;
  int krylov_maxit = 500;
  int picard_maxit = 50;
  std::string bundle_dir = "bundle";
  std::string output = "results.csv";
  std::vector<int> ndeim_grid;  // empty: powers of two up to the snapshot count
  bool export_matrices = false;
  bool save_snapshots = false;

  void validate() const;
  std::string canonical_text() const;
  std::string hash() const;  // FNV-1a of canonical_text
};

// key=value text, one pair per line, '#' comments. Unknown keys and
// malformed values report file and line.
void apply_config_file(ExperimentConfig& config, const std::string& path);
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value, const std::string& where);

struct OfflineSummary {
  int rank = 0;
  int snapshot_count = 0;
  int n_deim = 0;
  int n_g = 0;
  int full_solves = 0;
  std::string bundle_dir;
};

OfflineSummary run_offline(const ExperimentConfig& config, std::ostream& log);
void run_online(const ExperimentConfig& config, std::ostream& log);
void run_figure_data(const ExperimentConfig& config, const std::string& sweep,
                     std::ostream& log);
bool run_verify(std::ostream& log);

}  // namespace rom
