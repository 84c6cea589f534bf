#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rom/deim.hpp"
#include "rom/online.hpp"
#include "rom/reduced_ops.hpp"
#include "rom/rng.hpp"

namespace rom {

// How the nonlinear snapshot matrix is filled during the sampling loop:
//  - kFullPerAcceptance: one column per retained full solve (the cheap set);
//  - kFullPerTrial: one column per trial, each from a dedicated full solve;
//  - kMixedPerTrial: one column per trial, from the full solution when one
//    was computed and from the current reduced solution otherwise.
enum class SnapshotStrategy { kFullPerAcceptance, kFullPerTrial, kMixedPerTrial };

std::string to_string(SnapshotStrategy strategy);
SnapshotStrategy parse_snapshot_strategy(const std::string& name);

struct SnapshotSet {
  Matrix columns;
  SnapshotStrategy strategy = SnapshotStrategy::kFullPerAcceptance;
};

struct TrialRecord {
  Vector xi;
  double eta = 0.0;
  bool accepted = false;
};

struct OfflineOptions {
  double tau = 1e-4;
  double delta = 1e-8;
  int n_trial = 2000;
  std::uint64_t seed = 101;
  SnapshotStrategy strategy = SnapshotStrategy::kFullPerAcceptance;
  bool collect_mixed = false;      // also fill the per-trial mixed set
  bool collect_full_trial = false; // also fill the per-trial full set (costly)
  int picard_maxit = 50;
  double mgs_drop_tol = 1e-10;
  double rank_cutoff = 1e-12;
  std::ostream* log = nullptr;
};

struct OfflineResult {
  ReducedBasis basis;
  AffineReducedOperator rop;
  SnapshotSet snapshots;  // the set for options.strategy
  std::optional<SnapshotSet> mixed_snapshots;
  std::optional<SnapshotSet> full_trial_snapshots;
  std::vector<TrialRecord> trials;

  // Raw retained snapshot data, in acceptance order with the seed point
  // first; used for basis diagnostics.
  Matrix accepted_velocity;
  Matrix accepted_pressure;
  Matrix accepted_enrichment;
  std::vector<Vector> accepted_xi;
  std::vector<double> accepted_residual;
  std::vector<int> accepted_iterations;

  int snapshot_count = 0;  // retained full solves including the seed point
  int full_solves = 0;     // all full solves, including per-trial strategy ones
  Vector xi_mean;
  std::uint64_t seed = 0;
};

// Nonlinear snapshot at a velocity iterate: the assembled convection term
// applied to it, with boundary rows zeroed (they carry no equations).
Vector nonlinear_snapshot(const Mesh& mesh, const AffineOperator& ops,
                          const Vector& u_full, long* elements_visited = nullptr);

// Random-sampling basis construction. Starting from the mean-parameter
// solve, each trial parameter is screened with the current reduced model;
// trials whose full-residual indicator exceeds tau trigger a full solve
// whose solution, pressure, and enrichment augment the basis.
OfflineResult build_reduced_basis(const Mesh& mesh, const AffineOperator& ops,
                                  const OfflineOptions& options);

}  // namespace rom
