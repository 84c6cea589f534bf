#pragma once

#include <vector>

#include "rom/assembly.hpp"
#include "rom/full_model.hpp"
#include "rom/linalg.hpp"
#include "rom/mesh.hpp"

namespace rom {

// Orthonormal bases for velocity and pressure. Velocity columns live on the
// full dof vector with exact zeros at boundary dofs; each retained snapshot
// contributes two velocity columns (solution + enrichment) and one pressure
// column, so the reduced rank is 3 * snapshot_count when nothing is dropped
// as linearly dependent.
struct ReducedBasis {
  Matrix velocity;
  Matrix pressure;
  int snapshot_count = 0;

  int velocity_rank() const { return static_cast<int>(velocity.cols()); }
  int pressure_rank() const { return static_cast<int>(pressure.cols()); }
  int rank() const { return velocity_rank() + pressure_rank(); }
};

// Parameter-independent projections of the affine blocks. The online system
// and right-hand side are weighted sums of these; nothing here depends on
// the full dimension once built.
struct AffineReducedOperator {
  std::vector<Matrix> stiffness;       // per viscosity block
  Matrix divergence;                   // pressure x velocity coupling
  Vector forcing;
  std::vector<Vector> boundary_terms;  // per viscosity block
  Vector continuity_rhs;
  int ku = 0;
  int kp = 0;

  int rank() const { return ku + kp; }
  int parameter_count() const { return static_cast<int>(stiffness.size()); }
  Matrix stokes_matrix(const Vector& xi) const;
  Vector rhs(const Vector& xi) const;
};

AffineReducedOperator build_reduced_operator(const AffineOperator& ops,
                                             const ReducedBasis& basis);

// Velocity enrichment for a pressure snapshot: the homogeneous-Dirichlet
// vector Poisson solve whose data is the pressure-divergence pairing. Added
// to the velocity basis it restores solvability of the reduced saddle-point
// system.
Vector enrichment_velocity(const Mesh& mesh, const AffineOperator& ops,
                           const SparseCholeskyFactor& laplacian, const Vector& p);

struct PodResult {
  Matrix basis;                     // leading left singular vectors
  Vector sigma;                     // all singular values, descending
  int rank = 0;                     // numerical rank of the snapshot matrix
  double tail_sq = 0.0;             // sum of squared discarded singular values
  double projection_error_sq = 0.0; // squared Frobenius norm of S - V V^T S
};

// POD of a nonlinear snapshot matrix; keeps n_keep vectors (numerical rank
// when n_keep < 0). The optimality identity between the projection error and
// the singular-value tail is verified on every call.
PodResult pod_nonlinear(const Matrix& snapshots, int n_keep = -1,
                        double rank_cutoff = 1e-12);

}  // namespace rom
