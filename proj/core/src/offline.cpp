#include "rom/offline.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace rom {
namespace {

constexpr double kParamLo = 0.01;
constexpr double kParamHi = 1.0;

Matrix append_column(Matrix m, const Vector& v) {
  m.conservativeResize(v.size(), m.cols() + 1);
  m.col(m.cols() - 1) = v;
  return m;
}

struct SnapshotCollector {
  Matrix columns;
  void append(const Vector& f) { columns = append_column(std::move(columns), f); }
};

}  // namespace

std::string to_string(SnapshotStrategy strategy) {
  switch (strategy) {
    case SnapshotStrategy::kFullPerAcceptance: return "full-ks";
    case SnapshotStrategy::kFullPerTrial: return "full-ntrial";
    default: return "mixed";
  }
}

SnapshotStrategy parse_snapshot_strategy(const std::string& name) {
  if (name == "full-ks") return SnapshotStrategy::kFullPerAcceptance;
  if (name == "full-ntrial") return SnapshotStrategy::kFullPerTrial;
  if (name == "mixed") return SnapshotStrategy::kMixedPerTrial;
  throw ConfigError("unknown snapshot strategy '" + name +
                    "' (expected full-ks, full-ntrial, or mixed)");
}

Vector nonlinear_snapshot(const Mesh& mesh, const AffineOperator& ops,
                          const Vector& u_full, long* elements_visited) {
  const SparseMatrix n = assemble_convection(mesh, ops.pattern, u_full, elements_visited);
  Vector f = n * u_full;
  for (int node = 0; node < mesh.n_nodes; ++node) {
    if (mesh.node_on_boundary[node]) {
      f[node] = 0.0;
      f[mesh.n_nodes + node] = 0.0;
    }
  }
  return f;
}

OfflineResult build_reduced_basis(const Mesh& mesh, const AffineOperator& ops,
                                  const OfflineOptions& options) {
  if (options.tau <= 0.0) throw ConfigError("offline: tau must be positive");
  if (options.n_trial < 0) throw ConfigError("offline: n_trial must be nonnegative");
  const int m = ops.parameter_count();
  const CounterRng rng(options.seed);
  const SparseCholeskyFactor laplacian(ops.enrich_laplacian);

  OfflineResult result;
  result.seed = options.seed;
  result.xi_mean = Vector::Constant(m, 0.5 * (kParamLo + kParamHi));

  const bool want_mixed =
      options.collect_mixed || options.strategy == SnapshotStrategy::kMixedPerTrial;
  const bool want_full_trial =
      options.collect_full_trial || options.strategy == SnapshotStrategy::kFullPerTrial;

  SnapshotCollector per_acceptance;
  SnapshotCollector mixed;
  SnapshotCollector full_trial;

  auto log = [&](const std::string& line) {
    if (options.log) (*options.log) << line << "\n";
  };

  // Capacity guard: another snapshot adds two velocity and one pressure
  // column; past these limits the discretization cannot support the basis.
  auto check_capacity = [&](const ReducedBasis& basis) {
    if (basis.pressure_rank() + 1 > mesh.n_pressure ||
        basis.velocity_rank() + 2 > mesh.n_vel_interior) {
      std::ostringstream msg;
      msg << "offline: basis would need " << 3 * (basis.snapshot_count + 1)
          << " vectors but the grid offers " << mesh.n_vel_interior
          << " interior velocity and " << mesh.n_pressure
          << " pressure dofs; the spatial discretization is not fine enough "
             "for reduced-order modeling to pay off";
      throw RankDeficiencyError(msg.str());
    }
  };

  // Seed point: mean parameter.
  FullState seed_state =
      picard_full(mesh, ops, result.xi_mean, options.delta, options.picard_maxit);
  result.full_solves = 1;
  {
    const Vector u_in = seed_state.u - ops.u_bc;
    const Vector r = enrichment_velocity(mesh, ops, laplacian, seed_state.p);
    result.basis.velocity = mgs_augment(Matrix(mesh.n_velocity, 0), u_in,
                                        options.mgs_drop_tol);
    result.basis.velocity =
        mgs_augment(result.basis.velocity, r, options.mgs_drop_tol);
    result.basis.pressure = mgs_augment(Matrix(mesh.n_pressure, 0), seed_state.p,
                                        options.mgs_drop_tol);
    result.basis.snapshot_count = 1;
    result.accepted_velocity = append_column(Matrix(mesh.n_velocity, 0), u_in);
    result.accepted_pressure = append_column(Matrix(mesh.n_pressure, 0), seed_state.p);
    result.accepted_enrichment = append_column(Matrix(mesh.n_velocity, 0), r);
    result.accepted_xi.push_back(result.xi_mean);
    result.accepted_residual.push_back(seed_state.residual_history.back());
    result.accepted_iterations.push_back(seed_state.iterations);
    per_acceptance.append(nonlinear_snapshot(mesh, ops, seed_state.u));
  }
  result.rop = build_reduced_operator(ops, result.basis);
  log("offline: seed solve done, basis rank " + std::to_string(result.basis.rank()));

  OnlineConfig screen;
  screen.linear_solver = LinearSolverKind::kDirect;
  screen.delta = options.delta;
  screen.picard_maxit = options.picard_maxit;

  for (int trial = 1; trial <= options.n_trial; ++trial) {
    const Vector xi = rng.uniform_vector(CounterRng::kOfflineTrials,
                                         static_cast<std::uint64_t>(trial), m,
                                         kParamLo, kParamHi);
    double eta = std::numeric_limits<double>::infinity();
    Vector u_reduced;
    bool have_reduced = false;
    try {
      const OnlineReport rep =
          solve_reduced(mesh, ops, result.rop, result.basis, xi, screen);
      eta = rep.eta;
      u_reduced = rep.u_tilde;
      have_reduced = true;
    } catch (const NonConvergenceError&) {
      // Screening solve failed; treat the trial as inaccurate and refine.
    } catch (const SingularMatrixError&) {
    }

    const bool accept = !(eta <= options.tau);
    result.trials.push_back(TrialRecord{xi, eta, accept});

    if (accept) {
      check_capacity(result.basis);
      const FullState full =
          picard_full(mesh, ops, xi, options.delta, options.picard_maxit);
      ++result.full_solves;
      const Vector u_in = full.u - ops.u_bc;
      const Vector r = enrichment_velocity(mesh, ops, laplacian, full.p);

      const auto ku_before = result.basis.velocity.cols();
      const auto kp_before = result.basis.pressure.cols();
      result.basis.velocity =
          mgs_augment(result.basis.velocity, u_in, options.mgs_drop_tol);
      result.basis.velocity =
          mgs_augment(result.basis.velocity, r, options.mgs_drop_tol);
      result.basis.pressure =
          mgs_augment(result.basis.pressure, full.p, options.mgs_drop_tol);
      if (result.basis.velocity.cols() != ku_before + 2 ||
          result.basis.pressure.cols() != kp_before + 1) {
        log("offline: trial " + std::to_string(trial) +
            " produced linearly dependent snapshot columns; basis rank " +
            std::to_string(result.basis.rank()));
      }
      result.basis.snapshot_count += 1;
      result.accepted_velocity = append_column(std::move(result.accepted_velocity), u_in);
      result.accepted_pressure = append_column(std::move(result.accepted_pressure), full.p);
      result.accepted_enrichment =
          append_column(std::move(result.accepted_enrichment), r);
      result.accepted_xi.push_back(xi);
      result.accepted_residual.push_back(full.residual_history.back());
      result.accepted_iterations.push_back(full.iterations);

      result.rop = build_reduced_operator(ops, result.basis);

      const Vector snap = nonlinear_snapshot(mesh, ops, full.u);
      per_acceptance.append(snap);
      if (want_mixed) mixed.append(snap);
      if (want_full_trial) full_trial.append(snap);

      log("offline: trial " + std::to_string(trial) + " eta " + std::to_string(eta) +
          " accepted, snapshots " + std::to_string(result.basis.snapshot_count));
    } else {
      std::optional<FullState> full;
      if (want_full_trial || (want_mixed && !have_reduced)) {
        full = picard_full(mesh, ops, xi, options.delta, options.picard_maxit);
        ++result.full_solves;
      }
      if (want_mixed) {
        mixed.append(
            nonlinear_snapshot(mesh, ops, have_reduced ? u_reduced : full->u));
      }
      if (want_full_trial) {
        full_trial.append(nonlinear_snapshot(mesh, ops, full->u));
      }
    }
    if (options.log && trial % 200 == 0) {
      log("offline: " + std::to_string(trial) + "/" + std::to_string(options.n_trial) +
          " trials, snapshots " + std::to_string(result.basis.snapshot_count));
    }
  }

  result.snapshot_count = result.basis.snapshot_count;

  switch (options.strategy) {
    case SnapshotStrategy::kFullPerAcceptance:
      result.snapshots = SnapshotSet{per_acceptance.columns, options.strategy};
      break;
    case SnapshotStrategy::kFullPerTrial:
      result.snapshots = SnapshotSet{full_trial.columns, options.strategy};
      break;
    case SnapshotStrategy::kMixedPerTrial:
      result.snapshots = SnapshotSet{mixed.columns, options.strategy};
      break;
  }
  if (options.collect_mixed) {
    result.mixed_snapshots = SnapshotSet{mixed.columns, SnapshotStrategy::kMixedPerTrial};
  }
  if (options.collect_full_trial) {
    result.full_trial_snapshots =
        SnapshotSet{full_trial.columns, SnapshotStrategy::kFullPerTrial};
  }
  return result;
}

}  // namespace rom
