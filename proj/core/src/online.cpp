#include "rom/online.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rom {
namespace {

Vector solve_reduced_linear(const Matrix& a, const Vector& rhs,
                            const OnlineConfig& config, const Preconditioner* precond,
                            int* iterations) {
  if (config.linear_solver == LinearSolverKind::kDirect) {
    if (iterations) *iterations = 0;
    return DenseLuFactor(a).solve(rhs);
  }
  LinearOperator apply_a = [&a](const Vector& x) { return Vector(a * x); };
  LinearOperator apply_m = [&](const Vector& x) {
    return precond ? precond->factor.solve(x) : x;
  };
  const BicgstabResult result =
      bicgstab(apply_a, apply_m, rhs, config.krylov_tol, config.krylov_maxit);
  if (!result.converged) {
    std::ostringstream msg;
    msg << "bicgstab: no convergence in " << config.krylov_maxit
        << " iterations (relative residual " << result.relative_residual
        << (result.breakdown ? ", breakdown" : "") << ")";
    throw KrylovError(msg.str());
  }
  if (iterations) *iterations = result.iterations;
  return result.x;
}

// One Picard run over a caller-supplied convection evaluation. The
// evaluation returns the reduced convection block and the reduced nonlinear
// residual term at the current lifted velocity.
struct ConvectionEval {
  Matrix block;       // ku x ku
  Vector residual;    // ku
  long elements = 0;  // elements assembled for this evaluation
};

template <typename EvalFn>
OnlineReport run_picard(const Mesh& mesh, const AffineOperator& ops,
                        const AffineReducedOperator& rop, const ReducedBasis& basis,
                        const Vector& xi, const OnlineConfig& config,
                        const Preconditioner* precond, EvalFn&& evaluate) {
  const int ku = rop.ku;
  const int kp = rop.kp;
  const Vector b_hat = rop.rhs(xi);
  const double b_norm = b_hat.norm();
  const Matrix stokes = rop.stokes_matrix(xi);

  OnlineReport report;
  const ReducedInit init = reduced_stokes_init(rop, xi, config, precond);
  report.init_linear_iterations = init.linear_iterations;
  Vector z = init.z_hat;

  for (int step = 0;; ++step) {
    const Vector u_tilde = ops.u_bc + basis.velocity * z.head(ku);
    const ConvectionEval eval = evaluate(u_tilde);
    report.elements_per_step = eval.elements;

    Vector g = stokes * z - b_hat;
    g.head(ku) += eval.residual;
    const double rel = g.norm() / b_norm;
    report.residual_history.push_back(rel);
    if (rel < config.delta) {
      report.converged = true;
      break;
    }
    if (rel > 1e4 * report.residual_history.front()) {
      std::ostringstream msg;
      msg << "reduced picard: diverging, relative residual grew to " << rel;
      throw NonConvergenceError(msg.str(), report.residual_history);
    }
    if (step == config.picard_maxit) {
      std::ostringstream msg;
      msg << "reduced picard: no convergence in " << config.picard_maxit
          << " steps, last relative residual " << rel;
      throw NonConvergenceError(msg.str(), report.residual_history);
    }

    Matrix a = stokes;
    a.topLeftCorner(ku, ku) += eval.block;
    int iters = 0;
    const Vector dz = solve_reduced_linear(a, Vector(-g), config, precond, &iters);
    report.linear_iterations.push_back(iters);
    z += dz;
  }

  report.picard_iterations = static_cast<int>(report.linear_iterations.size());
  report.u_hat = z.head(ku);
  report.p_hat = z.tail(kp);
  const LiftedSolution lifted = lift(report.u_hat, report.p_hat, basis, ops);
  report.u_tilde = lifted.u;
  report.p_tilde = lifted.p;

  // Full residual once, after convergence; it is the only O(N) evaluation.
  long dummy = 0;
  const ResidualReport full =
      residual_full(mesh, ops, report.u_tilde, report.p_tilde, xi, &dummy);
  report.eta = full.indicator;
  report.full_residual_evaluations = 1;
  return report;
}

}  // namespace

std::string Preconditioner::name() const {
  std::string out = variant == PrecondVariant::kOffline ? "offline-" : "online-";
  out += kind == PrecondKind::kStokes ? "stokes" : "ns";
  return out;
}

Preconditioner make_stokes_preconditioner(const AffineReducedOperator& rop,
                                          const Vector& xi, PrecondVariant variant) {
  const auto start = std::chrono::steady_clock::now();
  Preconditioner p;
  p.kind = PrecondKind::kStokes;
  p.variant = variant;
  p.xi_anchor = xi;
  p.factor = DenseLuFactor(rop.stokes_matrix(xi));
  p.build_seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start).count();
  return p;
}

Preconditioner make_navier_stokes_preconditioner(
    const Mesh& mesh, const AffineOperator& ops, const AffineReducedOperator& rop,
    const ReducedBasis& basis, const DeimOperator& deim, const Vector& xi,
    PrecondVariant variant, const Vector* u_converged, double delta,
    int picard_maxit) {
  const auto start = std::chrono::steady_clock::now();
  Preconditioner p;
  p.kind = PrecondKind::kNavierStokes;
  p.variant = variant;
  p.xi_anchor = xi;

  Vector u_full;
  if (u_converged) {
    u_full = *u_converged;
  } else {
    u_full = picard_full(mesh, ops, xi, delta, picard_maxit).u;
    p.used_full_solve = true;
  }
  const Matrix rows = assemble_convection_sampled(mesh, deim.sample, u_full,
                                                  deim.selection.indices, nullptr);
  Matrix m = rop.stokes_matrix(xi);
  m.topLeftCorner(rop.ku, rop.ku) +=
      deim.sampled_to_reduced * (rows * basis.velocity);
  p.factor = DenseLuFactor(m);
  p.build_seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start).count();
  return p;
}

double OnlineReport::mean_linear_iterations() const {
  if (linear_iterations.empty()) return 0.0;
  const long sum = std::accumulate(linear_iterations.begin(), linear_iterations.end(), 0L);
  return static_cast<double>(sum) / static_cast<double>(linear_iterations.size());
}

ReducedInit reduced_stokes_init(const AffineReducedOperator& rop, const Vector& xi,
                                const OnlineConfig& config,
                                const Preconditioner* precond) {
  ReducedInit init;
  init.z_hat = solve_reduced_linear(rop.stokes_matrix(xi), rop.rhs(xi), config,
                                    precond, &init.linear_iterations);
  return init;
}

OnlineReport solve_reduced(const Mesh& mesh, const AffineOperator& ops,
                           const AffineReducedOperator& rop, const ReducedBasis& basis,
                           const Vector& xi, const OnlineConfig& config,
                           const Preconditioner* precond) {
  auto evaluate = [&](const Vector& u_tilde) {
    ConvectionEval eval;
    const SparseMatrix n = assemble_convection(mesh, ops.pattern, u_tilde, &eval.elements);
    const Matrix nq = n * basis.velocity;
    eval.block = basis.velocity.transpose() * nq;
    eval.residual = basis.velocity.transpose() * (n * u_tilde);
    return eval;
  };
  return run_picard(mesh, ops, rop, basis, xi, config, precond, evaluate);
}

OnlineReport solve_deim(const Mesh& mesh, const AffineOperator& ops,
                        const AffineReducedOperator& rop, const ReducedBasis& basis,
                        const DeimOperator& deim, const Vector& xi,
                        const OnlineConfig& config, const Preconditioner* precond) {
  auto evaluate = [&](const Vector& u_tilde) {
    ConvectionEval eval;
    const Matrix rows = assemble_convection_sampled(
        mesh, deim.sample, u_tilde, deim.selection.indices, &eval.elements);
    eval.block = deim.sampled_to_reduced * (rows * basis.velocity);
    eval.residual = deim.sampled_to_reduced * (rows * u_tilde);
    return eval;
  };
  return run_picard(mesh, ops, rop, basis, xi, config, precond, evaluate);
}

LiftedSolution lift(const Vector& u_hat, const Vector& p_hat,
                    const ReducedBasis& basis, const AffineOperator& ops) {
  if (u_hat.size() != basis.velocity.cols() || p_hat.size() != basis.pressure.cols()) {
    throw ConfigError("lift: coefficient sizes do not match the basis");
  }
  LiftedSolution out;
  out.u = ops.u_bc + basis.velocity * u_hat;
  out.p = basis.pressure * p_hat;
  return out;
}

}  // namespace rom
