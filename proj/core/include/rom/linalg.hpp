#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rom/errors.hpp"

namespace rom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Compressed row storage; compressed Eigen matrices keep column indices
// sorted per row with no duplicates.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Sparse LU behind the solver contract: solutions are verified against the
// inputs and a SingularMatrixError (with the factorization diagnostic) is
// raised when the matrix is singular or the solve is untrustworthy.
class SparseLuFactor {
 public:
  explicit SparseLuFactor(const SparseMatrix& a);

  // Relative residual of the returned solution is at most kSolveTol.
  Vector solve(const Vector& b) const;

  Eigen::Index rows() const { return a_.rows(); }

  static constexpr double kSolveTol = 1e-12;

 private:
  Eigen::SparseMatrix<double> a_;  // kept for residual verification
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

Vector sparse_lu_solve(const SparseMatrix& a, const Vector& b);

// Sparse Cholesky for symmetric positive definite systems; construction
// fails on indefinite input.
class SparseCholeskyFactor {
 public:
  explicit SparseCholeskyFactor(const SparseMatrix& a);
  Vector solve(const Vector& b) const;

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

// Thin SVD m = u * sigma.asDiagonal() * w^T, singular values descending.
struct Svd {
  Matrix u;
  Vector sigma;
  Matrix w;
};
Svd svd(const Matrix& m);

// Least-squares application of a tall full-column-rank matrix through its
// SVD; apply(b) returns argmin_a ||m a - b||_2.
class LeastSquaresFactor {
 public:
  explicit LeastSquaresFactor(const Matrix& m, double rank_tol = 1e-12);

  Vector apply(const Vector& b) const;
  Matrix pseudo_inverse() const;  // cols(m) x rows(m)

  double sigma_max() const { return svd_.sigma.size() ? svd_.sigma[0] : 0.0; }
  double sigma_min() const {
    return svd_.sigma.size() ? svd_.sigma[svd_.sigma.size() - 1] : 0.0;
  }

 private:
  Svd svd_;
};

// Dense LU factor with explicit storage so it can be persisted and reloaded
// without refactorization. solve applies row permutation then the two
// triangular sweeps.
class DenseLuFactor {
 public:
  DenseLuFactor() = default;
  explicit DenseLuFactor(const Matrix& a);
  static DenseLuFactor from_parts(Matrix packed_lu, std::vector<int> row_perm);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

  const Matrix& packed_lu() const { return lu_; }
  const std::vector<int>& row_permutation() const { return perm_; }
  Eigen::Index rows() const { return lu_.rows(); }
  bool empty() const { return lu_.rows() == 0; }

 private:
  Matrix lu_;              // unit-lower below the diagonal, upper on/above
  std::vector<int> perm_;  // row i of the permuted system reads source perm_[i]
};

// Appends v to the orthonormal columns of q using modified Gram-Schmidt with
// one reorthogonalization pass. Returns q unchanged when the residual norm
// falls below drop_tol * ||v|| (v numerically in span(q)).
Matrix mgs_augment(const Matrix& q, const Vector& v, double drop_tol = 1e-10);

struct BicgstabResult {
  Vector x;
  int iterations = 0;  // half-steps rounded up
  bool converged = false;
  bool breakdown = false;
  double relative_residual = 0.0;
};

using LinearOperator = std::function<Vector(const Vector&)>;

// Right-preconditioned BiCGStab on apply_a * apply_m_inv. Stops when
// ||b - A x|| < tol * reference_norm; reference_norm defaults to ||b||.
// Claimed convergence is verified against the true residual.
BicgstabResult bicgstab(const LinearOperator& apply_a,
                        const LinearOperator& apply_m_inv, const Vector& b,
                        double tol, int maxit, double reference_norm = -1.0);

}  // namespace rom
