#pragma once

#include <string>
#include <vector>

#include "rom/deim.hpp"
#include "rom/full_model.hpp"
#include "rom/reduced_ops.hpp"

namespace rom {

enum class LinearSolverKind { kDirect, kBicgstab };
enum class PrecondKind { kStokes, kNavierStokes };
enum class PrecondVariant { kOffline, kOnline };

struct OnlineConfig {
  LinearSolverKind linear_solver = LinearSolverKind::kDirect;
  double delta = 1e-8;
  double krylov_tol = 1e-9;
  int krylov_maxit = 500;
  int picard_maxit = 50;
};

// Factored reduced preconditioner. The offline variant is anchored at the
// mean parameter and reused for every query; the online variant is built at
// the query parameter itself.
struct Preconditioner {
  PrecondKind kind = PrecondKind::kStokes;
  PrecondVariant variant = PrecondVariant::kOffline;
  DenseLuFactor factor;
  Vector xi_anchor;
  double build_seconds = 0.0;
  bool used_full_solve = false;

  std::string name() const;
};

Preconditioner make_stokes_preconditioner(const AffineReducedOperator& rop,
                                          const Vector& xi, PrecondVariant variant);

// Adds the hyper-reduced convection block evaluated at the converged full
// velocity for the anchor parameter. When u_converged is null the full model
// is solved here (that cost is part of building this preconditioner).
Preconditioner make_navier_stokes_preconditioner(
    const Mesh& mesh, const AffineOperator& ops, const AffineReducedOperator& rop,
    const ReducedBasis& basis, const DeimOperator& deim, const Vector& xi,
    PrecondVariant variant, const Vector* u_converged = nullptr,
    double delta = 1e-8, int picard_maxit = 50);

struct OnlineReport {
  Vector u_hat;
  Vector p_hat;
  Vector u_tilde;  // includes the boundary interpolant
  Vector p_tilde;
  std::vector<double> residual_history;  // reduced residual, relative
  int picard_iterations = 0;
  int init_linear_iterations = 0;
  std::vector<int> linear_iterations;
  double eta = 0.0;
  long elements_per_step = 0;
  long full_residual_evaluations = 0;
  bool converged = false;

  double mean_linear_iterations() const;
};

struct ReducedInit {
  Vector z_hat;
  int linear_iterations = 0;
};

// Reduced Stokes solve used to start the nonlinear iteration.
ReducedInit reduced_stokes_init(const AffineReducedOperator& rop, const Vector& xi,
                                const OnlineConfig& config,
                                const Preconditioner* precond = nullptr);

// Galerkin model with the convection block projected through full assembly;
// the O(N) per-step cost is the comparison baseline for hyper-reduction.
OnlineReport solve_reduced(const Mesh& mesh, const AffineOperator& ops,
                           const AffineReducedOperator& rop, const ReducedBasis& basis,
                           const Vector& xi, const OnlineConfig& config,
                           const Preconditioner* precond = nullptr);

// Hyper-reduced model: the convection block is assembled on the sample mesh
// only, so per-step assembly work is set by the index count, not the grid.
OnlineReport solve_deim(const Mesh& mesh, const AffineOperator& ops,
                        const AffineReducedOperator& rop, const ReducedBasis& basis,
                        const DeimOperator& deim, const Vector& xi,
                        const OnlineConfig& config,
                        const Preconditioner* precond = nullptr);

struct LiftedSolution {
  Vector u;
  Vector p;
};

LiftedSolution lift(const Vector& u_hat, const Vector& p_hat,
                    const ReducedBasis& basis, const AffineOperator& ops);

}  // namespace rom
