#include "rom/deim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rom {
namespace {

// Lowest index wins ties.
int argmax_abs(const Vector& v, const std::vector<char>* excluded = nullptr) {
  int best = -1;
  double best_val = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (excluded && (*excluded)[static_cast<std::size_t>(i)]) continue;
    const double a = std::abs(v[i]);
    if (a > best_val) {
      best_val = a;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

std::string to_string(IndexMethod method) {
  return method == IndexMethod::kDeim ? "deim" : "gappy";
}

InterpolationSelection deim_select(const Matrix& basis) {
  const int n_vec = static_cast<int>(basis.cols());
  if (n_vec < 1) throw ConfigError("deim_select: empty basis");
  InterpolationSelection sel;
  sel.method = IndexMethod::kDeim;
  sel.indices.reserve(n_vec);
  std::vector<char> used(basis.rows(), 0);

  Vector r = basis.col(0);
  for (int i = 0; i < n_vec; ++i) {
    if (i > 0) {
      const Matrix pv = gather_rows(basis.leftCols(i), sel.indices);
      Vector rhs(i);
      for (int j = 0; j < i; ++j) rhs[j] = basis(sel.indices[j], i);
      const Vector c = Eigen::PartialPivLU<Matrix>(pv).solve(rhs);
      r = basis.col(i) - basis.leftCols(i) * c;
    }
    const int rho = argmax_abs(r);
    if (rho < 0 || std::abs(r[rho]) == 0.0 || used[rho]) {
      std::ostringstream msg;
      msg << "deim_select: zero interpolation residual at vector " << i
          << "; basis is rank deficient";
      throw RankDeficiencyError(msg.str());
    }
    sel.indices.push_back(rho);
    used[rho] = 1;
  }
  return sel;
}

InterpolationSelection gappy_select(const Matrix& basis, int n_g) {
  const int n_rows = static_cast<int>(basis.rows());
  const int n_vec = static_cast<int>(basis.cols());
  if (n_vec < 1) throw ConfigError("gappy_select: empty basis");
  if (n_g < 1) throw ConfigError("gappy_select: need at least one index");
  if (n_g > n_rows) {
    std::ostringstream msg;
    msg << "gappy_select: " << n_g << " indices requested but only " << n_rows
        << " rows exist";
    throw ConfigError(msg.str());
  }

  InterpolationSelection sel;
  sel.method = IndexMethod::kGappy;
  sel.indices.reserve(n_g);
  std::vector<char> used(n_rows, 0);

  const int n_it = std::min(n_vec, n_g);
  const int nc_min = n_vec / n_it;
  const int na_min = n_g / n_vec;
  int n_base = 0;  // basis columns consumed by previous iterations

  for (int i = 1; i <= n_it; ++i) {
    const int nc = nc_min + (i <= n_vec % n_it ? 1 : 0);
    const int na = na_min + (i <= n_g % n_vec ? 1 : 0);
    if (na == 0) {
      n_base += nc;
      continue;
    }

    // Squared residuals of this block of vectors against the columns already
    // consumed, summed entrywise. The least-squares projections share one SVD
    // of the sampled basis.
    auto residual_sum = [&]() {
      Vector r = Vector::Zero(n_rows);
      if (n_base == 0) {
        for (int q = 0; q < nc; ++q) {
          r += basis.col(q).cwiseAbs2();
        }
        return r;
      }
      const Matrix pv = gather_rows(basis.leftCols(n_base), sel.indices);
      const Eigen::BDCSVD<Matrix> lsq(pv, Eigen::ComputeThinU | Eigen::ComputeThinV);
      for (int q = 0; q < nc; ++q) {
        const Vector vq = basis.col(n_base + q);
        Vector rhs(static_cast<Eigen::Index>(sel.indices.size()));
        for (std::size_t j = 0; j < sel.indices.size(); ++j) rhs[j] = vq[sel.indices[j]];
        const Vector res = vq - basis.leftCols(n_base) * lsq.solve(rhs);
        r += res.cwiseAbs2();
      }
      return r;
    };

    Vector r = residual_sum();
    for (int j = 0; j < na; ++j) {
      const int rho = argmax_abs(r, &used);
      if (rho < 0) {
        throw RankDeficiencyError("gappy_select: ran out of candidate rows");
      }
      sel.indices.push_back(rho);
      used[rho] = 1;
      if (j + 1 < na && n_base > 0) {
        r = residual_sum();  // refresh every block residual with the new index
      } else if (j + 1 < na) {
        r[rho] = 0.0;
      }
    }
    n_base += nc;
  }
  return sel;
}

Vector DeimOperator::sampled(const Vector& f) const {
  Vector out(selection.count());
  for (int i = 0; i < selection.count(); ++i) out[i] = f[selection.indices[i]];
  return out;
}

Vector DeimOperator::reconstruct(const Vector& f) const {
  return basis * (coeff_from_sampled * sampled(f));
}

DeimOperator build_deim_operator(const Matrix& velocity_basis,
                                 const Matrix& nonlinear_basis,
                                 const InterpolationSelection& selection,
                                 const Mesh& mesh) {
  const int n_vec = static_cast<int>(nonlinear_basis.cols());
  const int n_g = selection.count();
  if (n_g < n_vec) {
    std::ostringstream msg;
    msg << "deim operator: " << n_g << " indices cannot resolve " << n_vec
        << " basis vectors";
    throw ConfigError(msg.str());
  }
  DeimOperator op;
  op.basis = nonlinear_basis;
  op.selection = selection;

  const Matrix pv = gather_rows(nonlinear_basis, selection.indices);
  if (selection.method == IndexMethod::kDeim && n_g == n_vec) {
    // Square interpolation system: exact at the selected indices.
    const DenseLuFactor lu(pv);
    op.coeff_from_sampled = lu.solve(Matrix(Matrix::Identity(n_vec, n_vec)));
  } else {
    const LeastSquaresFactor lsq(pv);
    op.coeff_from_sampled = lsq.pseudo_inverse();
  }
  op.sampled_to_reduced =
      (velocity_basis.transpose() * nonlinear_basis) * op.coeff_from_sampled;
  op.sample = build_sample_mesh(mesh, selection.indices);
  return op;
}

}  // namespace rom
