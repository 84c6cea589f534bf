#include "rom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "rom/rng.hpp"

namespace rom {

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  // Box-Muller on two counters; offset by one ulp to avoid log(0).
  double u1 = uniform01(stream, 2 * counter);
  double u2 = uniform01(stream, 2 * counter + 1);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

SparseLuFactor::SparseLuFactor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw SingularMatrixError("sparse_lu: matrix is not square");
  }
  a_ = Eigen::SparseMatrix<double>(a);  // column-major copy for SparseLU
  a_.makeCompressed();
  lu_.compute(a_);
  if (lu_.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sparse_lu: factorization failed";
    if (!lu_.lastErrorMessage().empty()) msg << " (" << lu_.lastErrorMessage() << ")";
    throw SingularMatrixError(msg.str());
  }
  // Round-trip probe: a singular matrix drops the null-space component of x
  // even when a consistent right-hand side still solves cleanly.
  const CounterRng rng(0x5eedULL + static_cast<std::uint64_t>(a.rows()));
  const Vector probe = rng.normal_vector(CounterRng::kAudit, 0, static_cast<int>(a.rows()));
  const Vector round_trip = lu_.solve(a_ * probe);
  if (!round_trip.allFinite() ||
      (round_trip - probe).norm() > 1e-6 * probe.norm()) {
    std::ostringstream msg;
    msg << "sparse_lu: matrix is singular or severely ill-conditioned "
           "(round-trip probe error "
        << (round_trip - probe).norm() / probe.norm() << ")";
    if (!lu_.lastErrorMessage().empty()) msg << " (" << lu_.lastErrorMessage() << ")";
    throw SingularMatrixError(msg.str());
  }
}

Vector SparseLuFactor::solve(const Vector& b) const {
  Vector x = lu_.solve(b);
  const double bn = b.norm();
  const double resid = (a_ * x - b).norm();
  if (!x.allFinite() || resid > kSolveTol * (bn > 0.0 ? bn : 1.0)) {
    std::ostringstream msg;
    msg << "sparse_lu: solve unreliable, relative residual "
        << (bn > 0.0 ? resid / bn : resid)
        << "; matrix is singular or severely ill-conditioned";
    if (!lu_.lastErrorMessage().empty()) msg << " (" << lu_.lastErrorMessage() << ")";
    throw SingularMatrixError(msg.str());
  }
  return x;
}

Vector sparse_lu_solve(const SparseMatrix& a, const Vector& b) {
  return SparseLuFactor(a).solve(b);
}

SparseCholeskyFactor::SparseCholeskyFactor(const SparseMatrix& a) {
  Eigen::SparseMatrix<double> acm(a);
  acm.makeCompressed();
  llt_.compute(acm);
  if (llt_.info() != Eigen::Success) {
    throw SingularMatrixError("sparse_cholesky: matrix is not positive definite");
  }
}

Vector SparseCholeskyFactor::solve(const Vector& b) const {
  return llt_.solve(b);
}

Svd svd(const Matrix& m) {
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return Svd{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

LeastSquaresFactor::LeastSquaresFactor(const Matrix& m, double rank_tol) {
  if (m.rows() < m.cols()) {
    throw RankDeficiencyError("least_squares: matrix has more columns than rows");
  }
  svd_ = svd(m);
  if (svd_.sigma.size() == 0 || svd_.sigma[svd_.sigma.size() - 1] <=
                                    rank_tol * svd_.sigma[0]) {
    std::ostringstream msg;
    msg << "least_squares: rank-deficient matrix, sigma_min/sigma_max = "
        << (svd_.sigma.size() && svd_.sigma[0] > 0.0
                ? svd_.sigma[svd_.sigma.size() - 1] / svd_.sigma[0]
                : 0.0);
    throw RankDeficiencyError(msg.str());
  }
}

Vector LeastSquaresFactor::apply(const Vector& b) const {
  return svd_.w * (svd_.sigma.cwiseInverse().asDiagonal() * (svd_.u.transpose() * b));
}

Matrix LeastSquaresFactor::pseudo_inverse() const {
  return svd_.w * svd_.sigma.cwiseInverse().asDiagonal() * svd_.u.transpose();
}

DenseLuFactor::DenseLuFactor(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw SingularMatrixError("dense_lu: matrix is not square");
  }
  Eigen::PartialPivLU<Matrix> lu(a);
  lu_ = lu.matrixLU();
  const auto& ind = lu.permutationP().indices();
  perm_.assign(ind.data(), ind.data() + ind.size());

  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lu_.rows(); ++i) {
    const double d = std::abs(lu_(i, i));
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  if (lu_.rows() > 0 && (dmax == 0.0 || dmin <= 1e-14 * dmax)) {
    std::ostringstream msg;
    msg << "dense_lu: numerically singular, pivot ratio "
        << (dmax > 0.0 ? dmin / dmax : 0.0);
    throw SingularMatrixError(msg.str());
  }
}

DenseLuFactor DenseLuFactor::from_parts(Matrix packed_lu, std::vector<int> row_perm) {
  if (packed_lu.rows() != packed_lu.cols() ||
      static_cast<Eigen::Index>(row_perm.size()) != packed_lu.rows()) {
    throw IoError("dense_lu: inconsistent stored factor");
  }
  DenseLuFactor f;
  f.lu_ = std::move(packed_lu);
  f.perm_ = std::move(row_perm);
  return f;
}

Vector DenseLuFactor::solve(const Vector& b) const {
  const Eigen::Index n = lu_.rows();
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = b[perm_[i]];
  lu_.triangularView<Eigen::UnitLower>().solveInPlace(x);
  lu_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix DenseLuFactor::solve(const Matrix& b) const {
  Matrix x(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Vector(b.col(j)));
  return x;
}

Matrix mgs_augment(const Matrix& q, const Vector& v, double drop_tol) {
  const double vn = v.norm();
  Vector w = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      w -= q.col(j).dot(w) * q.col(j);
    }
  }
  const double wn = w.norm();
  if (vn == 0.0 || wn < drop_tol * vn) {
    return q;
  }
  Matrix out(v.size(), q.cols() + 1);
  if (q.cols() > 0) out.leftCols(q.cols()) = q;
  out.col(q.cols()) = w / wn;
  return out;
}

BicgstabResult bicgstab(const LinearOperator& apply_a,
                        const LinearOperator& apply_m_inv, const Vector& b,
                        double tol, int maxit, double reference_norm) {
  BicgstabResult out;
  const double ref = reference_norm > 0.0 ? reference_norm : b.norm();
  const double target = tol * (ref > 0.0 ? ref : 1.0);
  constexpr double kBreakdown = 1e-300;

  Vector x = Vector::Zero(b.size());
  Vector r = b;  // zero initial guess
  if (r.norm() <= target) {
    out.x = x;
    out.converged = true;
    out.relative_residual = ref > 0.0 ? r.norm() / ref : r.norm();
    return out;
  }
  const Vector r0 = r;
  Vector p = r;

  // Verifies the recurrence residual against the true one before accepting.
  auto accept = [&](const Vector& cand, double half_steps) -> bool {
    const double true_resid = (b - apply_a(cand)).norm();
    if (true_resid <= target) {
      out.x = cand;
      out.converged = true;
      out.iterations = static_cast<int>(std::ceil(half_steps));
      out.relative_residual = ref > 0.0 ? true_resid / ref : true_resid;
      return true;
    }
    return false;
  };

  double rho = r0.dot(r);
  for (int it = 1; it <= maxit; ++it) {
    if (std::abs(rho) < kBreakdown) {
      out.breakdown = true;
      break;
    }
    const Vector phat = apply_m_inv(p);
    const Vector v = apply_a(phat);
    const double r0v = r0.dot(v);
    if (std::abs(r0v) < kBreakdown) {
      out.breakdown = true;
      break;
    }
    const double alpha = rho / r0v;
    const Vector s = r - alpha * v;
    if (s.norm() <= target) {
      if (accept(x + alpha * phat, it - 0.5)) return out;
    }
    const Vector shat = apply_m_inv(s);
    const Vector t = apply_a(shat);
    const double tt = t.dot(t);
    if (tt < kBreakdown) {
      out.breakdown = true;
      break;
    }
    const double omega = t.dot(s) / tt;
    x += alpha * phat + omega * shat;
    r = s - omega * t;
    if (r.norm() <= target) {
      if (accept(x, it)) return out;
    }
    if (std::abs(omega) < kBreakdown) {
      out.breakdown = true;
      break;
    }
    const double rho_next = r0.dot(r);
    const double beta = (rho_next / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    rho = rho_next;
    out.iterations = it;
  }

  out.x = x;
  const double true_resid = (b - apply_a(x)).norm();
  out.relative_residual = ref > 0.0 ? true_resid / ref : true_resid;
  out.converged = true_resid <= target;
  if (out.converged) return out;
  if (!out.breakdown) out.iterations = maxit;
  return out;
}

}  // namespace rom
