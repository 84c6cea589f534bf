#pragma once

#include <string>
#include <vector>

#include "rom/linalg.hpp"
#include "rom/mesh.hpp"
#include "rom/reduced_ops.hpp"

namespace rom {

enum class IndexMethod { kDeim, kGappy };

std::string to_string(IndexMethod method);

// Ordered interpolation indices. For the greedy interpolation selection the
// count equals the number of basis vectors; the gappy selection may choose
// more rows than basis vectors and resolves them by least squares.
struct InterpolationSelection {
  std::vector<int> indices;
  IndexMethod method = IndexMethod::kDeim;

  int count() const { return static_cast<int>(indices.size()); }
};

// Greedy selection: each basis vector contributes the index where the
// residual against the interpolant built from the previous vectors is
// largest in magnitude. Ties break to the lowest index.
InterpolationSelection deim_select(const Matrix& basis);

// Block-greedy selection of n_g indices with least-squares projections,
// scheduled so every basis vector receives its share of indices. Chosen
// indices are excluded globally from later argmax scans.
InterpolationSelection gappy_select(const Matrix& basis, int n_g);

// Precomputed hyper-reduction operator. sampled_to_reduced maps the sampled
// nonlinear values to reduced velocity coefficients and never depends on the
// parameter.
struct DeimOperator {
  Matrix basis;                       // nonlinear basis V
  InterpolationSelection selection;
  Matrix coeff_from_sampled;          // basis coefficients from sampled values
  Matrix sampled_to_reduced;          // velocity_basis^T * basis * coeff_from_sampled
  SampleMesh sample;

  // Reconstruction of a full vector from its sampled entries, for audits.
  Vector reconstruct(const Vector& f) const;
  Vector sampled(const Vector& f) const;
};

DeimOperator build_deim_operator(const Matrix& velocity_basis,
                                 const Matrix& nonlinear_basis,
                                 const InterpolationSelection& selection,
                                 const Mesh& mesh);

}  // namespace rom
