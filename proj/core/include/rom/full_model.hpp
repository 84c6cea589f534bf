#pragma once

#include <vector>

#include "rom/assembly.hpp"
#include "rom/linalg.hpp"
#include "rom/mesh.hpp"

namespace rom {

// System vectors are packed [interior velocity dofs; pressure dofs]; the
// augmented systems append one Lagrange-multiplier unknown pinning the mean
// pressure to zero.
struct StokesSolution {
  Vector u_in;  // full-length velocity, zero at boundary dofs
  Vector p;
  double multiplier = 0.0;
};

struct FullState {
  Vector u;  // includes boundary values
  Vector p;
  std::vector<double> residual_history;  // relative, entry 0 at the Stokes iterate
  int iterations = 0;                    // correction solves performed
  bool converged = false;
  long elements_assembled = 0;
};

struct ResidualReport {
  Vector g;  // [interior momentum; continuity]
  double indicator = 0.0;
};

// Right-hand side [f - A(xi) u_bc restricted to the interior; -B u_bc].
Vector system_rhs(const Mesh& mesh, const AffineOperator& ops, const Vector& xi);

// Saddle matrix on interior velocity + pressure dofs; convection optional.
// With augmented = true the pressure-area border row/column is appended.
SparseMatrix build_saddle_system(const Mesh& mesh, const AffineOperator& ops,
                                 const SparseMatrix& stiffness,
                                 const SparseMatrix* convection, bool augmented);

StokesSolution solve_stokes_full(const Mesh& mesh, const AffineOperator& ops,
                                 const Vector& xi);

FullState picard_full(const Mesh& mesh, const AffineOperator& ops, const Vector& xi,
                      double delta, int maxit = 50);

// Full nonlinear residual of (u, p) at xi and its value relative to the data
// norm ||b(xi)||.
ResidualReport residual_full(const Mesh& mesh, const AffineOperator& ops,
                             const Vector& u_full, const Vector& p, const Vector& xi,
                             long* elements_visited = nullptr);

}  // namespace rom
