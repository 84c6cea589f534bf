#include "rom/reduced_ops.hpp"

#include <cmath>
#include <sstream>

namespace rom {

Matrix AffineReducedOperator::stokes_matrix(const Vector& xi) const {
  if (xi.size() != parameter_count()) {
    throw ConfigError("reduced operator: parameter vector size mismatch");
  }
  Matrix m = Matrix::Zero(rank(), rank());
  Matrix a = Matrix::Zero(ku, ku);
  for (int i = 0; i < parameter_count(); ++i) a += xi[i] * stiffness[i];
  m.topLeftCorner(ku, ku) = a;
  m.topRightCorner(ku, kp) = divergence.transpose();
  m.bottomLeftCorner(kp, ku) = divergence;
  return m;
}

Vector AffineReducedOperator::rhs(const Vector& xi) const {
  if (xi.size() != parameter_count()) {
    throw ConfigError("reduced operator: parameter vector size mismatch");
  }
  Vector b(rank());
  Vector bu = forcing;
  for (int i = 0; i < parameter_count(); ++i) bu -= xi[i] * boundary_terms[i];
  b.head(ku) = bu;
  b.tail(kp) = continuity_rhs;
  return b;
}

AffineReducedOperator build_reduced_operator(const AffineOperator& ops,
                                             const ReducedBasis& basis) {
  AffineReducedOperator rop;
  rop.ku = basis.velocity_rank();
  rop.kp = basis.pressure_rank();
  rop.stiffness.reserve(ops.parameter_count());
  rop.boundary_terms.reserve(ops.parameter_count());
  for (const auto& block : ops.visc_blocks) {
    const Matrix aq = block * basis.velocity;
    rop.stiffness.push_back(basis.velocity.transpose() * aq);
    rop.boundary_terms.push_back(basis.velocity.transpose() * (block * ops.u_bc));
  }
  const Matrix bq = ops.divergence * basis.velocity;
  rop.divergence = basis.pressure.transpose() * bq;
  rop.forcing = basis.velocity.transpose() * ops.forcing;
  rop.continuity_rhs = -(basis.pressure.transpose() * (ops.divergence * ops.u_bc));
  return rop;
}

Vector enrichment_velocity(const Mesh& mesh, const AffineOperator& ops,
                           const SparseCholeskyFactor& laplacian, const Vector& p) {
  if (p.size() != mesh.n_pressure) {
    throw ConfigError("enrichment: pressure vector size mismatch");
  }
  // Weak form (grad r, grad v) = (p, div v): the data is -B^T p on interior dofs.
  const Vector rhs = restrict_interior(mesh, Vector(-(ops.divergence.transpose() * p)));
  return prolong_interior(mesh, laplacian.solve(rhs));
}

PodResult pod_nonlinear(const Matrix& snapshots, int n_keep, double rank_cutoff) {
  if (snapshots.cols() == 0) {
    throw ConfigError("pod: empty snapshot matrix");
  }
  const Svd dec = svd(snapshots);
  PodResult out;
  out.sigma = dec.sigma;
  const double smax = dec.sigma.size() ? dec.sigma[0] : 0.0;
  if (smax <= 0.0) {
    throw RankDeficiencyError("pod: snapshot matrix is zero");
  }
  int rank = 0;
  while (rank < dec.sigma.size() && dec.sigma[rank] > rank_cutoff * smax) ++rank;
  out.rank = rank;
  if (n_keep < 0) n_keep = rank;
  if (n_keep < 1 || n_keep > rank) {
    std::ostringstream msg;
    msg << "pod: requested " << n_keep << " vectors but numerical rank is " << rank;
    throw RankDeficiencyError(msg.str());
  }
  out.basis = dec.u.leftCols(n_keep);

  for (Eigen::Index i = n_keep; i < dec.sigma.size(); ++i) {
    out.tail_sq += dec.sigma[i] * dec.sigma[i];
  }
  const Matrix residual = snapshots - out.basis * (out.basis.transpose() * snapshots);
  out.projection_error_sq = residual.squaredNorm();

  const double scale = snapshots.squaredNorm();
  if (std::abs(out.projection_error_sq - out.tail_sq) >
      1e-10 * (scale > 0.0 ? scale : 1.0)) {
    std::ostringstream msg;
    msg << "pod: optimality identity violated, projection error "
        << out.projection_error_sq << " vs singular-value tail " << out.tail_sq;
    throw std::logic_error(msg.str());
  }
  return out;
}

}  // namespace rom
