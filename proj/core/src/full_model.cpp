#include "rom/full_model.hpp"

#include <cmath>
#include <sstream>

namespace rom {
namespace {

// Residual from preassembled parts; N is the convection matrix at u_full.
ResidualReport residual_from_parts(const Mesh& mesh, const AffineOperator& ops,
                                   const SparseMatrix& stiffness,
                                   const SparseMatrix& convection,
                                   const Vector& u_full, const Vector& p,
                                   double rhs_norm) {
  Vector momentum = stiffness * u_full + ops.divergence.transpose() * p +
                    convection * u_full - ops.forcing;
  Vector g(mesh.n_vel_interior + mesh.n_pressure);
  g.head(mesh.n_vel_interior) = restrict_interior(mesh, momentum);
  g.tail(mesh.n_pressure) = ops.divergence * u_full;
  ResidualReport out;
  out.indicator = g.norm() / rhs_norm;
  out.g = std::move(g);
  return out;
}

struct SaddleSolve {
  Vector u_in_full;
  Vector p;
  double multiplier;
};

SaddleSolve solve_augmented(const Mesh& mesh, const SparseLuFactor& factor,
                            const Vector& rhs_sys) {
  Vector rhs(rhs_sys.size() + 1);
  rhs.head(rhs_sys.size()) = rhs_sys;
  rhs[rhs_sys.size()] = 0.0;
  const Vector sol = factor.solve(rhs);
  SaddleSolve out;
  out.u_in_full = prolong_interior(mesh, sol.head(mesh.n_vel_interior));
  out.p = sol.segment(mesh.n_vel_interior, mesh.n_pressure);
  out.multiplier = sol[rhs_sys.size()];
  return out;
}

}  // namespace

Vector system_rhs(const Mesh& mesh, const AffineOperator& ops, const Vector& xi) {
  const SparseMatrix a = ops.stiffness_at(xi);
  Vector b(mesh.n_vel_interior + mesh.n_pressure);
  b.head(mesh.n_vel_interior) =
      restrict_interior(mesh, Vector(ops.forcing - a * ops.u_bc));
  b.tail(mesh.n_pressure) = -(ops.divergence * ops.u_bc);
  return b;
}

SparseMatrix build_saddle_system(const Mesh& mesh, const AffineOperator& ops,
                                 const SparseMatrix& stiffness,
                                 const SparseMatrix* convection, bool augmented) {
  const int nu = mesh.n_vel_interior;
  const int np = mesh.n_pressure;
  const int dim = nu + np + (augmented ? 1 : 0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(stiffness.nonZeros()) +
               (convection ? convection->nonZeros() : 0) +
               2 * ops.divergence.nonZeros() + 2 * mesh.n_elements);

  auto add_velocity_block = [&](const SparseMatrix& m) {
    for (int row = 0; row < m.outerSize(); ++row) {
      const int ri = mesh.vel_full_to_interior[row];
      if (ri < 0) continue;
      for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
        const int ci = mesh.vel_full_to_interior[static_cast<int>(it.col())];
        if (ci < 0) continue;
        trip.emplace_back(ri, ci, it.value());
      }
    }
  };
  add_velocity_block(stiffness);
  if (convection) add_velocity_block(*convection);

  for (int row = 0; row < ops.divergence.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(ops.divergence, row); it; ++it) {
      const int ci = mesh.vel_full_to_interior[static_cast<int>(it.col())];
      if (ci < 0) continue;
      trip.emplace_back(nu + row, ci, it.value());
      trip.emplace_back(ci, nu + row, it.value());
    }
  }
  if (augmented) {
    for (int e = 0; e < mesh.n_elements; ++e) {
      const double area = ops.p_area[3 * e];
      trip.emplace_back(nu + np, nu + 3 * e, area);
      trip.emplace_back(nu + 3 * e, nu + np, area);
    }
  }
  SparseMatrix sys(dim, dim);
  sys.setFromTriplets(trip.begin(), trip.end());
  sys.makeCompressed();
  return sys;
}

StokesSolution solve_stokes_full(const Mesh& mesh, const AffineOperator& ops,
                                 const Vector& xi) {
  const SparseMatrix a = ops.stiffness_at(xi);
  const SparseLuFactor factor(build_saddle_system(mesh, ops, a, nullptr, true));
  const SaddleSolve sol = solve_augmented(mesh, factor, system_rhs(mesh, ops, xi));
  return StokesSolution{sol.u_in_full, sol.p, sol.multiplier};
}

FullState picard_full(const Mesh& mesh, const AffineOperator& ops, const Vector& xi,
                      double delta, int maxit) {
  if (delta <= 0.0) throw ConfigError("picard: tolerance must be positive");
  const SparseMatrix a = ops.stiffness_at(xi);
  const Vector b = system_rhs(mesh, ops, xi);
  const double bn = b.norm();

  FullState state;
  {
    const SparseLuFactor stokes(build_saddle_system(mesh, ops, a, nullptr, true));
    const SaddleSolve init = solve_augmented(mesh, stokes, b);
    state.u = ops.u_bc + init.u_in_full;
    state.p = init.p;
  }

  for (int step = 0;; ++step) {
    const SparseMatrix convection =
        assemble_convection(mesh, ops.pattern, state.u, &state.elements_assembled);
    const ResidualReport res =
        residual_from_parts(mesh, ops, a, convection, state.u, state.p, bn);
    state.residual_history.push_back(res.indicator);
    if (res.indicator < delta) {
      state.converged = true;
      state.iterations = step;
      return state;
    }
    if (res.indicator > 1e4 * state.residual_history.front()) {
      std::ostringstream msg;
      msg << "picard: diverging, relative residual grew to " << res.indicator;
      throw NonConvergenceError(msg.str(), state.residual_history);
    }
    if (step == maxit) {
      std::ostringstream msg;
      msg << "picard: no convergence in " << maxit
          << " steps, last relative residual " << res.indicator;
      throw NonConvergenceError(msg.str(), state.residual_history);
    }

    const SparseLuFactor factor(
        build_saddle_system(mesh, ops, a, &convection, true));
    Vector rhs_sys(mesh.n_vel_interior + mesh.n_pressure);
    rhs_sys = -res.g;
    const SaddleSolve corr = solve_augmented(mesh, factor, rhs_sys);
    state.u += corr.u_in_full;
    state.p += corr.p;
  }
}

ResidualReport residual_full(const Mesh& mesh, const AffineOperator& ops,
                             const Vector& u_full, const Vector& p, const Vector& xi,
                             long* elements_visited) {
  const SparseMatrix a = ops.stiffness_at(xi);
  const SparseMatrix convection =
      assemble_convection(mesh, ops.pattern, u_full, elements_visited);
  const double bn = system_rhs(mesh, ops, xi).norm();
  return residual_from_parts(mesh, ops, a, convection, u_full, p, bn);
}

}  // namespace rom
