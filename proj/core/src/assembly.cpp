#include "rom/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace rom {
namespace {

// 3x3 tensor Gauss rule on the reference square [-1,1]^2. Exact for the
// stiffness and divergence integrands; the same rule is used for the
// convection form.
struct QuadratureTables {
  static constexpr int kPoints = 9;
  std::array<double, kPoints> weight;
  std::array<double, kPoints> gx;
  std::array<double, kPoints> gy;
  // Biquadratic shape values and reference derivatives at each point,
  // local-lexicographic node order.
  std::array<std::array<double, 9>, kPoints> shape;
  std::array<std::array<double, 9>, kPoints> dxi;
  std::array<std::array<double, 9>, kPoints> deta;
};

double lag(int i, double t) {
  switch (i) {
    case 0: return 0.5 * t * (t - 1.0);
    case 1: return (1.0 - t) * (1.0 + t);
    default: return 0.5 * t * (t + 1.0);
  }
}

double dlag(int i, double t) {
  switch (i) {
    case 0: return t - 0.5;
    case 1: return -2.0 * t;
    default: return t + 0.5;
  }
}

const QuadratureTables& quadrature() {
  static const QuadratureTables tables = [] {
    QuadratureTables t{};
    const double g = std::sqrt(3.0 / 5.0);
    const double p1[3] = {-g, 0.0, g};
    const double w1[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    int q = 0;
    for (int qy = 0; qy < 3; ++qy) {
      for (int qx = 0; qx < 3; ++qx, ++q) {
        t.weight[q] = w1[qx] * w1[qy];
        t.gx[q] = p1[qx];
        t.gy[q] = p1[qy];
        for (int ly = 0; ly < 3; ++ly) {
          for (int lx = 0; lx < 3; ++lx) {
            const int l = ly * 3 + lx;
            t.shape[q][l] = lag(lx, p1[qx]) * lag(ly, p1[qy]);
            t.dxi[q][l] = dlag(lx, p1[qx]) * lag(ly, p1[qy]);
            t.deta[q][l] = lag(lx, p1[qx]) * dlag(ly, p1[qy]);
          }
        }
      }
    }
    return t;
  }();
  return tables;
}

using Local9 = std::array<std::array<double, 9>, 9>;

// Scalar Laplacian element matrix; scale-free in 2D.
const Local9& local_stiffness() {
  static const Local9 k = [] {
    const auto& qt = quadrature();
    Local9 m{};
    for (int q = 0; q < QuadratureTables::kPoints; ++q) {
      for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
          m[i][j] += qt.weight[q] *
                     (qt.dxi[q][i] * qt.dxi[q][j] + qt.deta[q][i] * qt.deta[q][j]);
        }
      }
    }
    return m;
  }();
  return k;
}

// Scalar convection element matrix for the velocity field with element nodal
// values (ux, uy): C[i][j] = sum_q w a (ux.N|_q dN_j/dxi + uy.N|_q dN_j/deta) N_i.
void local_convection(const std::array<double, 9>& ux, const std::array<double, 9>& uy,
                      double half_width, Local9& c) {
  const auto& qt = quadrature();
  for (auto& row : c) row.fill(0.0);
  for (int q = 0; q < QuadratureTables::kPoints; ++q) {
    double uxq = 0.0, uyq = 0.0;
    for (int l = 0; l < 9; ++l) {
      uxq += ux[l] * qt.shape[q][l];
      uyq += uy[l] * qt.shape[q][l];
    }
    const double wq = qt.weight[q] * half_width;
    for (int j = 0; j < 9; ++j) {
      const double conv = uxq * qt.dxi[q][j] + uyq * qt.deta[q][j];
      for (int i = 0; i < 9; ++i) {
        c[i][j] += wq * conv * qt.shape[q][i];
      }
    }
  }
}

// CRS accumulator over a fixed scalar pattern.
struct CsrValues {
  const ScalarPattern* pattern;
  std::vector<double> vals;

  explicit CsrValues(const ScalarPattern& p)
      : pattern(&p), vals(p.cols.size(), 0.0) {}

  void add(int row, int col, double v) {
    const int lo = pattern->row_ptr[row];
    const int hi = pattern->row_ptr[row + 1];
    const auto begin = pattern->cols.begin();
    const auto it = std::lower_bound(begin + lo, begin + hi, col);
    vals[static_cast<std::size_t>(it - begin)] += v;
  }
};

// Expands scalar node-coupling values into the two-component block-diagonal
// velocity operator.
SparseMatrix expand_to_velocity(const Mesh& mesh, const ScalarPattern& pattern,
                                const std::vector<double>& vals) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * vals.size());
  for (int row = 0; row < mesh.n_nodes; ++row) {
    for (int k = pattern.row_ptr[row]; k < pattern.row_ptr[row + 1]; ++k) {
      const int col = pattern.cols[k];
      trip.emplace_back(row, col, vals[k]);
      trip.emplace_back(mesh.n_nodes + row, mesh.n_nodes + col, vals[k]);
    }
  }
  SparseMatrix out(mesh.n_velocity, mesh.n_velocity);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

void gather_element_velocity(const Mesh& mesh, const Vector& u, int element,
                             std::array<double, 9>& ux, std::array<double, 9>& uy) {
  for (int l = 0; l < 9; ++l) {
    const int node = mesh.element_nodes[element][l];
    ux[l] = u[node];
    uy[l] = u[mesh.n_nodes + node];
  }
}

}  // namespace

ScalarPattern build_scalar_pattern(const Mesh& mesh) {
  ScalarPattern pattern;
  pattern.row_ptr.assign(mesh.n_nodes + 1, 0);
  std::vector<int> patch;
  std::vector<std::vector<int>> rows(mesh.n_nodes);
  for (int node = 0; node < mesh.n_nodes; ++node) {
    patch.clear();
    for (int e : mesh.node_elements[node]) {
      for (int other : mesh.element_nodes[e]) patch.push_back(other);
    }
    std::sort(patch.begin(), patch.end());
    patch.erase(std::unique(patch.begin(), patch.end()), patch.end());
    rows[node] = patch;
    pattern.row_ptr[node + 1] = pattern.row_ptr[node] + static_cast<int>(patch.size());
  }
  pattern.cols.reserve(pattern.row_ptr[mesh.n_nodes]);
  for (const auto& r : rows) pattern.cols.insert(pattern.cols.end(), r.begin(), r.end());
  return pattern;
}

std::vector<SparseMatrix> assemble_viscosity_blocks(const Mesh& mesh) {
  const auto& k_loc = local_stiffness();
  std::vector<std::vector<Eigen::Triplet<double>>> trip(mesh.subdomain_count());
  for (int e = 0; e < mesh.n_elements; ++e) {
    auto& t = trip[mesh.element_subdomain[e]];
    for (int i = 0; i < 9; ++i) {
      const int gi = mesh.element_nodes[e][i];
      for (int j = 0; j < 9; ++j) {
        const int gj = mesh.element_nodes[e][j];
        t.emplace_back(gi, gj, k_loc[i][j]);
        t.emplace_back(mesh.n_nodes + gi, mesh.n_nodes + gj, k_loc[i][j]);
      }
    }
  }
  std::vector<SparseMatrix> blocks;
  blocks.reserve(mesh.subdomain_count());
  for (const auto& t : trip) {
    SparseMatrix a(mesh.n_velocity, mesh.n_velocity);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    blocks.push_back(std::move(a));
  }
  return blocks;
}

SparseMatrix assemble_divergence(const Mesh& mesh) {
  const auto& qt = quadrature();
  const double a = mesh.h;  // element half-width
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_elements) * 3 * 18);
  for (int e = 0; e < mesh.n_elements; ++e) {
    // B[p][comp*9+j] = -int psi_p d(N_j)/d(x_comp)
    std::array<std::array<double, 18>, 3> b{};
    for (int q = 0; q < QuadratureTables::kPoints; ++q) {
      const double w = qt.weight[q] * a * a;
      const double psi[3] = {1.0, a * qt.gx[q], a * qt.gy[q]};
      for (int j = 0; j < 9; ++j) {
        const double ddx = qt.dxi[q][j] / a;
        const double ddy = qt.deta[q][j] / a;
        for (int p = 0; p < 3; ++p) {
          b[p][j] -= w * psi[p] * ddx;
          b[p][9 + j] -= w * psi[p] * ddy;
        }
      }
    }
    for (int p = 0; p < 3; ++p) {
      const int row = 3 * e + p;
      for (int j = 0; j < 9; ++j) {
        const int node = mesh.element_nodes[e][j];
        trip.emplace_back(row, node, b[p][j]);
        trip.emplace_back(row, mesh.n_nodes + node, b[p][9 + j]);
      }
    }
  }
  SparseMatrix out(mesh.n_pressure, mesh.n_velocity);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

SparseMatrix assemble_convection(const Mesh& mesh, const ScalarPattern& pattern,
                                 const Vector& u, long* elements_visited) {
  if (u.size() != mesh.n_velocity) {
    throw ConfigError("convection: velocity coefficient vector has wrong size");
  }
  CsrValues acc(pattern);
  std::array<double, 9> ux{}, uy{};
  Local9 c;
  for (int e = 0; e < mesh.n_elements; ++e) {
    gather_element_velocity(mesh, u, e, ux, uy);
    local_convection(ux, uy, mesh.h, c);
    for (int i = 0; i < 9; ++i) {
      const int gi = mesh.element_nodes[e][i];
      for (int j = 0; j < 9; ++j) {
        acc.add(gi, mesh.element_nodes[e][j], c[i][j]);
      }
    }
  }
  if (elements_visited) *elements_visited += mesh.n_elements;
  return expand_to_velocity(mesh, pattern, acc.vals);
}

SparseMatrix assemble_convection(const Mesh& mesh, const Vector& u) {
  return assemble_convection(mesh, build_scalar_pattern(mesh), u, nullptr);
}

Matrix assemble_convection_sampled(const Mesh& mesh, const SampleMesh& sample,
                                   const Vector& u, const std::vector<int>& rows,
                                   long* elements_visited) {
  if (u.size() != mesh.n_velocity) {
    throw ConfigError("convection: velocity coefficient vector has wrong size");
  }
  // Coverage: every element touching a requested node must be present.
  for (int dof : rows) {
    if (dof < 0 || dof >= mesh.n_velocity) {
      throw ConfigError("sampled convection: row index out of range");
    }
    for (int e : mesh.node_elements[mesh.dof_node(dof)]) {
      if (!std::binary_search(sample.elements.begin(), sample.elements.end(), e)) {
        std::ostringstream msg;
        msg << "sampled convection: row " << dof << " needs element " << e
            << " which is not in the sample mesh";
        throw ConfigError(msg.str());
      }
    }
  }

  // node -> positions in the output (per component).
  std::vector<std::vector<std::pair<int, int>>> node_rows(mesh.n_nodes);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    node_rows[mesh.dof_node(rows[r])].push_back(
        {mesh.dof_component(rows[r]), static_cast<int>(r)});
  }

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), mesh.n_velocity);
  std::array<double, 9> ux{}, uy{};
  Local9 c;
  long visited = 0;
  for (int e : sample.elements) {
    bool touches = false;
    for (int l = 0; l < 9 && !touches; ++l) {
      touches = !node_rows[mesh.element_nodes[e][l]].empty();
    }
    if (!touches) continue;
    ++visited;
    gather_element_velocity(mesh, u, e, ux, uy);
    local_convection(ux, uy, mesh.h, c);
    for (int i = 0; i < 9; ++i) {
      const int gi = mesh.element_nodes[e][i];
      for (const auto& [comp, pos] : node_rows[gi]) {
        for (int j = 0; j < 9; ++j) {
          const int gj = mesh.element_nodes[e][j];
          out(pos, comp * mesh.n_nodes + gj) += c[i][j];
        }
      }
    }
  }
  if (elements_visited) *elements_visited += visited;
  return out;
}

Vector boundary_interpolant(const Mesh& mesh) {
  Vector u_bc = Vector::Zero(mesh.n_velocity);
  for (int ix = 0; ix <= mesh.n; ++ix) {
    const int node = mesh.n * mesh.nodes_per_side + ix;  // top edge, iy = n
    const double x = mesh.node_x[node];
    u_bc[node] = 1.0 - x * x * x * x;
  }
  return u_bc;
}

Vector pressure_area_vector(const Mesh& mesh) {
  Vector p = Vector::Zero(mesh.n_pressure);
  for (int e = 0; e < mesh.n_elements; ++e) {
    p[3 * e] = mesh.element_area();
  }
  return p;
}

SparseMatrix assemble_enrichment_laplacian(const Mesh& mesh) {
  const auto& k_loc = local_stiffness();
  const int n_int_nodes = mesh.n_vel_interior / 2;
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < mesh.n_elements; ++e) {
    for (int i = 0; i < 9; ++i) {
      const int gi = mesh.element_nodes[e][i];
      const int ii = mesh.vel_full_to_interior[gi];
      if (ii < 0) continue;
      for (int j = 0; j < 9; ++j) {
        const int gj = mesh.element_nodes[e][j];
        const int jj = mesh.vel_full_to_interior[gj];
        if (jj < 0) continue;
        trip.emplace_back(ii, jj, k_loc[i][j]);
        trip.emplace_back(n_int_nodes + ii, n_int_nodes + jj, k_loc[i][j]);
      }
    }
  }
  SparseMatrix out(mesh.n_vel_interior, mesh.n_vel_interior);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

Vector restrict_interior(const Mesh& mesh, const Vector& full) {
  Vector out(mesh.n_vel_interior);
  for (int i = 0; i < mesh.n_vel_interior; ++i) {
    out[i] = full[mesh.vel_interior_to_full[i]];
  }
  return out;
}

Vector prolong_interior(const Mesh& mesh, const Vector& interior) {
  Vector out = Vector::Zero(mesh.n_velocity);
  for (int i = 0; i < mesh.n_vel_interior; ++i) {
    out[mesh.vel_interior_to_full[i]] = interior[i];
  }
  return out;
}

SparseMatrix AffineOperator::stiffness_at(const Vector& xi) const {
  if (xi.size() != parameter_count()) {
    throw ConfigError("stiffness_at: parameter vector size mismatch");
  }
  SparseMatrix a = xi[0] * visc_blocks[0];
  for (int i = 1; i < parameter_count(); ++i) {
    a += xi[i] * visc_blocks[i];
  }
  return a;
}

AffineOperator assemble_operators(const Mesh& mesh) {
  AffineOperator ops;
  ops.visc_blocks = assemble_viscosity_blocks(mesh);
  ops.divergence = assemble_divergence(mesh);
  ops.forcing = Vector::Zero(mesh.n_velocity);
  ops.u_bc = boundary_interpolant(mesh);
  ops.p_area = pressure_area_vector(mesh);
  ops.enrich_laplacian = assemble_enrichment_laplacian(mesh);
  ops.pattern = build_scalar_pattern(mesh);
  ops.viscosity_sum = ops.visc_blocks[0];
  for (std::size_t i = 1; i < ops.visc_blocks.size(); ++i) {
    ops.viscosity_sum += ops.visc_blocks[i];
  }
  return ops;
}

}  // namespace rom
