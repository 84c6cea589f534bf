#pragma once

#include <array>
#include <vector>

#include "rom/errors.hpp"

namespace rom {

// Cavity discretization sized in grid cells per side of (-1,1)^2. Biquadratic
// velocity elements span 2x2 cells, so n must be even; the viscosity
// subdomain grid is n_d x n_d and n_d must divide n.
struct GridSpec {
  int n = 32;
  int n_d = 2;

  int parameter_count() const { return n_d * n_d; }
  void validate() const;
};

// Uniform biquadratic-velocity / discontinuous-linear-pressure grid.
//
// Conventions (fixed for reproducibility):
//  - velocity nodes are the cell vertices, numbered lexicographically with x
//    fastest: node = iy*(n+1) + ix, coordinates (-1 + ix*h, -1 + iy*h),
//    h = 2/n;
//  - velocity dofs are all x-components then all y-components:
//    dof = component*n_nodes + node;
//  - elements (2x2 cell patches) are numbered lexicographically; the nine
//    element nodes are local-lexicographic (bottom row left-to-right first);
//  - each element owns pressure dofs {3e, 3e+1, 3e+2} = (constant, x-slope,
//    y-slope), slopes in physical coordinates about the element centroid;
//  - an element belongs to the subdomain containing its centroid.
struct Mesh {
  int n = 0;
  int n_d = 0;
  int nodes_per_side = 0;
  int n_nodes = 0;       // velocity nodes per component, (n+1)^2
  int n_velocity = 0;    // 2 * n_nodes
  int n_elements = 0;    // (n/2)^2
  int n_pressure = 0;    // 3 * n_elements
  double h = 0.0;        // cell width

  std::vector<double> node_x;
  std::vector<double> node_y;
  std::vector<std::array<int, 9>> element_nodes;
  std::vector<int> element_subdomain;
  std::vector<char> node_on_boundary;

  // Interior velocity dofs keep the full-dof ordering.
  std::vector<int> vel_full_to_interior;  // -1 at boundary dofs
  std::vector<int> vel_interior_to_full;
  int n_vel_interior = 0;

  std::vector<std::vector<int>> node_elements;  // ascending element ids

  int subdomain_count() const { return n_d * n_d; }
  double element_area() const { return 4.0 * h * h; }
  int dof_component(int dof) const { return dof < n_nodes ? 0 : 1; }
  int dof_node(int dof) const { return dof % n_nodes; }
};

Mesh build_mesh(const GridSpec& spec);

// Elements required to assemble the convection rows at a set of velocity dof
// indices, plus those indices. Every element touching a requested node is
// included; anything less changes the assembled values.
struct SampleMesh {
  std::vector<int> elements;  // ascending, unique
  std::vector<int> rows;      // the requesting velocity dofs
};

SampleMesh build_sample_mesh(const Mesh& mesh, const std::vector<int>& indices);

}  // namespace rom
