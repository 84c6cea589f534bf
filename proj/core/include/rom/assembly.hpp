#pragma once

#include <vector>

#include "rom/linalg.hpp"
#include "rom/mesh.hpp"

namespace rom {

// Node-coupling sparsity (the scalar velocity stiffness pattern), shared by
// the Laplacian and convection assemblies.
struct ScalarPattern {
  std::vector<int> row_ptr;
  std::vector<int> cols;
};

ScalarPattern build_scalar_pattern(const Mesh& mesh);

// One unit-viscosity vector-Laplacian block per subdomain; the viscosity
// field enters online as a weighted sum of these.
std::vector<SparseMatrix> assemble_viscosity_blocks(const Mesh& mesh);

// Pressure-velocity coupling, n_pressure x n_velocity.
SparseMatrix assemble_divergence(const Mesh& mesh);

// Convection matrix for the velocity field with coefficients u (full dof
// vector, both components). Linear in u; block-diagonal over components with
// the scalar stiffness pattern in each block.
SparseMatrix assemble_convection(const Mesh& mesh, const ScalarPattern& pattern,
                                 const Vector& u, long* elements_visited = nullptr);
SparseMatrix assemble_convection(const Mesh& mesh, const Vector& u);

// Rows of the convection matrix at the requested velocity dofs, assembled
// from sample-mesh elements only. Matches full assembly bitwise: element
// contributions are accumulated in ascending element order in both paths.
Matrix assemble_convection_sampled(const Mesh& mesh, const SampleMesh& sample,
                                   const Vector& u, const std::vector<int>& rows,
                                   long* elements_visited = nullptr);

// Lid interpolant: x-velocity 1 - x^4 on the top edge, zero on the other
// boundaries and at every interior node.
Vector boundary_interpolant(const Mesh& mesh);

// Element-area entries on each constant-mode pressure dof; entries sum to
// the domain area.
Vector pressure_area_vector(const Mesh& mesh);

// Unit-viscosity vector Laplacian with homogeneous Dirichlet elimination,
// on interior velocity dofs. Symmetric positive definite.
SparseMatrix assemble_enrichment_laplacian(const Mesh& mesh);

Vector restrict_interior(const Mesh& mesh, const Vector& full);
Vector prolong_interior(const Mesh& mesh, const Vector& interior);

// All parameter-independent discrete operators for one mesh.
struct AffineOperator {
  std::vector<SparseMatrix> visc_blocks;
  SparseMatrix divergence;
  Vector forcing;  // zero for the driven cavity, kept for generality
  Vector u_bc;
  Vector p_area;
  SparseMatrix enrich_laplacian;
  ScalarPattern pattern;
  SparseMatrix viscosity_sum;  // sum of visc_blocks (unit viscosity)

  int parameter_count() const { return static_cast<int>(visc_blocks.size()); }
  SparseMatrix stiffness_at(const Vector& xi) const;
};

AffineOperator assemble_operators(const Mesh& mesh);

}  // namespace rom
