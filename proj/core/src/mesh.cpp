#include "rom/mesh.hpp"

#include <algorithm>
#include <sstream>

namespace rom {

void GridSpec::validate() const {
  if (n <= 0 || n % 2 != 0) {
    std::ostringstream msg;
    msg << "grid: n must be a positive even number of cells, got " << n;
    throw ConfigError(msg.str());
  }
  if (n_d <= 0 || n % n_d != 0) {
    std::ostringstream msg;
    msg << "grid: subdomain count per side n_d = " << n_d << " must divide n = " << n;
    throw ConfigError(msg.str());
  }
}

Mesh build_mesh(const GridSpec& spec) {
  spec.validate();
  Mesh mesh;
  mesh.n = spec.n;
  mesh.n_d = spec.n_d;
  mesh.nodes_per_side = spec.n + 1;
  mesh.n_nodes = mesh.nodes_per_side * mesh.nodes_per_side;
  mesh.n_velocity = 2 * mesh.n_nodes;
  const int elems_per_side = spec.n / 2;
  mesh.n_elements = elems_per_side * elems_per_side;
  mesh.n_pressure = 3 * mesh.n_elements;
  mesh.h = 2.0 / spec.n;

  const int s = mesh.nodes_per_side;
  mesh.node_x.resize(mesh.n_nodes);
  mesh.node_y.resize(mesh.n_nodes);
  mesh.node_on_boundary.assign(mesh.n_nodes, 0);
  for (int iy = 0; iy < s; ++iy) {
    for (int ix = 0; ix < s; ++ix) {
      const int node = iy * s + ix;
      mesh.node_x[node] = -1.0 + ix * mesh.h;
      mesh.node_y[node] = -1.0 + iy * mesh.h;
      if (ix == 0 || ix == spec.n || iy == 0 || iy == spec.n) {
        mesh.node_on_boundary[node] = 1;
      }
    }
  }

  mesh.element_nodes.resize(mesh.n_elements);
  mesh.element_subdomain.resize(mesh.n_elements);
  mesh.node_elements.assign(mesh.n_nodes, {});
  const double subdomain_width = 2.0 / spec.n_d;
  for (int ey = 0; ey < elems_per_side; ++ey) {
    for (int ex = 0; ex < elems_per_side; ++ex) {
      const int e = ey * elems_per_side + ex;
      for (int ly = 0; ly < 3; ++ly) {
        for (int lx = 0; lx < 3; ++lx) {
          const int node = (2 * ey + ly) * s + (2 * ex + lx);
          mesh.element_nodes[e][ly * 3 + lx] = node;
          mesh.node_elements[node].push_back(e);
        }
      }
      const double cx = -1.0 + (2 * ex + 1) * mesh.h;
      const double cy = -1.0 + (2 * ey + 1) * mesh.h;
      int sx = static_cast<int>((cx + 1.0) / subdomain_width);
      int sy = static_cast<int>((cy + 1.0) / subdomain_width);
      sx = std::min(sx, spec.n_d - 1);
      sy = std::min(sy, spec.n_d - 1);
      mesh.element_subdomain[e] = sy * spec.n_d + sx;
    }
  }

  mesh.vel_full_to_interior.assign(mesh.n_velocity, -1);
  for (int comp = 0; comp < 2; ++comp) {
    for (int node = 0; node < mesh.n_nodes; ++node) {
      if (!mesh.node_on_boundary[node]) {
        const int dof = comp * mesh.n_nodes + node;
        mesh.vel_full_to_interior[dof] = static_cast<int>(mesh.vel_interior_to_full.size());
        mesh.vel_interior_to_full.push_back(dof);
      }
    }
  }
  mesh.n_vel_interior = static_cast<int>(mesh.vel_interior_to_full.size());
  return mesh;
}

SampleMesh build_sample_mesh(const Mesh& mesh, const std::vector<int>& indices) {
  SampleMesh sample;
  sample.rows = indices;
  std::vector<char> seen(mesh.n_elements, 0);
  for (int dof : indices) {
    if (dof < 0 || dof >= mesh.n_velocity) {
      std::ostringstream msg;
      msg << "sample mesh: velocity dof " << dof << " out of range";
      throw ConfigError(msg.str());
    }
    for (int e : mesh.node_elements[mesh.dof_node(dof)]) seen[e] = 1;
  }
  for (int e = 0; e < mesh.n_elements; ++e) {
    if (seen[e]) sample.elements.push_back(e);
  }
  return sample;
}

}  // namespace rom
