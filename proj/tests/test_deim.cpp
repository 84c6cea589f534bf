#include <doctest.h>

#include <cmath>

#include "rom/deim.hpp"
#include "rom/rng.hpp"

using namespace rom;

// Literal re-executions of the greedy selections, kept independent of the
// library implementation.
namespace replay {

int argmax_abs(const Vector& v, const std::vector<char>& used) {
  int best = -1;
  double best_val = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(v[i]) > best_val) {
      best_val = std::abs(v[i]);
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<int> deim(const Matrix& v) {
  std::vector<int> idx;
  std::vector<char> used(v.rows(), 0);
  for (int i = 0; i < v.cols(); ++i) {
    Vector r = v.col(i);
    if (i > 0) {
      Matrix pv(i, i);
      Vector rhs(i);
      for (int a = 0; a < i; ++a) {
        rhs[a] = v(idx[a], i);
        for (int b = 0; b < i; ++b) pv(a, b) = v(idx[a], b);
      }
      r -= v.leftCols(i) * pv.fullPivLu().solve(rhs);
    }
    const int rho = argmax_abs(r, std::vector<char>(v.rows(), 0));
    idx.push_back(rho);
    used[rho] = 1;
  }
  return idx;
}

std::vector<int> gappy(const Matrix& v, int n_g) {
  const int n_v = static_cast<int>(v.cols());
  const int n_it = std::min(n_v, n_g);
  std::vector<int> chosen;
  std::vector<char> used(v.rows(), 0);
  int n_base = 0;

  auto residuals = [&](int nc) {
    Vector r = Vector::Zero(v.rows());
    for (int q = 0; q < nc; ++q) {
      Vector res = v.col(n_base + q);
      if (n_base > 0) {
        Matrix pv(chosen.size(), n_base);
        Vector rhs(chosen.size());
        for (std::size_t a = 0; a < chosen.size(); ++a) {
          rhs[a] = v(chosen[a], n_base + q);
          for (int b = 0; b < n_base; ++b) pv(a, b) = v(chosen[a], b);
        }
        const Vector alpha =
            pv.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
        res -= v.leftCols(n_base) * alpha;
      }
      r += res.cwiseProduct(res);
    }
    return r;
  };

  for (int i = 1; i <= n_it; ++i) {
    const int nc = n_v / n_it + (i <= n_v % n_it ? 1 : 0);
    const int na = n_g / n_v + (i <= n_g % n_v ? 1 : 0);
    Vector r = residuals(nc);
    for (int j = 0; j < na; ++j) {
      const int rho = argmax_abs(r, used);
      chosen.push_back(rho);
      used[rho] = 1;
      if (j + 1 < na) r = residuals(nc);
    }
    n_base += nc;
  }
  return chosen;
}

}  // namespace replay

TEST_CASE("deim selection basics") {
  SUBCASE("a standard basis column selects its own index") {
    Matrix v = Matrix::Zero(5, 1);
    v(2, 0) = 1.0;
    CHECK(deim_select(v).indices == std::vector<int>{2});
  }

  SUBCASE("two-column example matches the re-execution oracle") {
    Matrix v(5, 2);
    v.col(0) << 0.1, 0.9, 0.2, 0.1, 0.1;
    Vector w(5);
    w << 0.3, -0.2, 0.8, 0.1, 0.4;
    v.col(1) = w - (w.dot(v.col(0)) / v.col(0).squaredNorm()) * v.col(0);
    const auto sel = deim_select(v);
    CHECK(sel.indices.size() == 2);
    CHECK(sel.indices[0] == 1);  // argmax of |v1|
    CHECK(sel.indices == replay::deim(v));
  }

  SUBCASE("rank-deficient input is rejected") {
    Matrix v(6, 2);
    v.col(0) = Vector::Unit(6, 1);
    v.col(1) = Vector::Unit(6, 1);  // duplicate
    CHECK_THROWS_AS(deim_select(v), RankDeficiencyError);
  }

  SUBCASE("selection is prefix stable in the number of columns") {
    const CounterRng rng(7);
    const Matrix raw = Matrix::NullaryExpr(30, 6, [&](Eigen::Index i, Eigen::Index j) {
      return rng.normal(CounterRng::kAudit, 100 + 31 * i + j);
    });
    const Matrix v = svd(raw).u.leftCols(6);
    const auto whole = deim_select(v);
    for (int j = 1; j <= 6; ++j) {
      const auto part = deim_select(Matrix(v.leftCols(j)));
      CHECK(std::equal(part.indices.begin(), part.indices.end(), whole.indices.begin()));
    }
  }
}

TEST_CASE("gappy selection basics") {
  SUBCASE("single vector, single index reduces to the first greedy step") {
    Matrix v = Matrix::Zero(4, 1);
    v(1, 0) = -1.0;
    CHECK(gappy_select(v, 1).indices == std::vector<int>{1});
  }

  SUBCASE("small instance matches the re-execution oracle") {
    const CounterRng rng(9);
    const Matrix raw = Matrix::NullaryExpr(6, 2, [&](Eigen::Index i, Eigen::Index j) {
      return rng.normal(CounterRng::kAudit, 500 + 13 * i + j);
    });
    const Matrix v = svd(raw).u.leftCols(2);
    CHECK(gappy_select(v, 4).indices == replay::gappy(v, 4));
  }

  SUBCASE("one index per vector: distinct indices, one per basis vector") {
    const CounterRng rng(10);
    const Matrix raw = Matrix::NullaryExpr(10, 4, [&](Eigen::Index i, Eigen::Index j) {
      return rng.normal(CounterRng::kAudit, 900 + 17 * i + j);
    });
    const Matrix v = svd(raw).u.leftCols(4);
    const auto sel = gappy_select(v, 4);
    CHECK(sel.indices.size() == 4);
    std::vector<int> sorted = sel.indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  }

  SUBCASE("more indices than rows is rejected") {
    Matrix v = Matrix::Identity(3, 2);
    CHECK_THROWS_AS(gappy_select(v, 4), ConfigError);
  }
}

TEST_CASE("both selections match brute-force replays on random small instances") {
  const CounterRng rng(11);
  for (int t = 0; t < 10; ++t) {
    const int rows = 6 + static_cast<int>(rng.bits(CounterRng::kAudit, 7000 + t) % 7);
    const int cols = 1 + static_cast<int>(rng.bits(CounterRng::kAudit, 7100 + t) % 4);
    const Matrix raw =
        Matrix::NullaryExpr(rows, cols, [&, t](Eigen::Index i, Eigen::Index j) {
          return rng.normal(CounterRng::kAudit, 8000 + 1000 * t + 29 * i + j);
        });
    const Matrix v = svd(raw).u.leftCols(cols);
    CHECK(deim_select(v).indices == replay::deim(v));
    const int n_g = std::min(rows, 2 * cols);
    CHECK(gappy_select(v, n_g).indices == replay::gappy(v, n_g));
  }
}

TEST_CASE("hyper-reduction operator") {
  const Mesh mesh = build_mesh(GridSpec{4, 2});
  const CounterRng rng(13);

  const int n_vec = 6;
  const Matrix raw = Matrix::NullaryExpr(
      mesh.n_velocity, n_vec, [&](Eigen::Index i, Eigen::Index j) {
        return rng.normal(CounterRng::kAudit, 20000 + 7 * i + j);
      });
  const Matrix v = svd(raw).u.leftCols(n_vec);
  const Matrix qu = svd(Matrix(Matrix::NullaryExpr(
                            mesh.n_velocity, 4,
                            [&](Eigen::Index i, Eigen::Index j) {
                              return rng.normal(CounterRng::kAudit, 30000 + 11 * i + j);
                            })))
                        .u.leftCols(4);

  SUBCASE("interpolation exactness at the selected indices") {
    const DeimOperator op = build_deim_operator(qu, v, deim_select(v), mesh);
    CHECK(op.sampled_to_reduced.rows() == 4);
    CHECK(op.sampled_to_reduced.cols() == n_vec);
    for (int t = 0; t < 20; ++t) {
      const Vector f = rng.normal_vector(CounterRng::kAudit, 40000 + t, mesh.n_velocity);
      const Vector fbar = op.reconstruct(f);
      for (int idx : op.selection.indices) {
        CHECK(std::abs(fbar[idx] - f[idx]) <= 1e-10);
      }
    }
  }

  SUBCASE("vectors in the basis range are reproduced") {
    const DeimOperator op = build_deim_operator(qu, v, deim_select(v), mesh);
    const Vector coeff = rng.normal_vector(CounterRng::kAudit, 50000, n_vec);
    const Vector f = v * coeff;
    CHECK((op.reconstruct(f) - f).norm() <= 1e-10 * f.norm());
  }

  SUBCASE("a square basis reproduces everything") {
    const Matrix vfull = svd(Matrix(Matrix::NullaryExpr(
                                 12, 12,
                                 [&](Eigen::Index i, Eigen::Index j) {
                                   return rng.normal(CounterRng::kAudit,
                                                     60000 + 23 * i + j);
                                 })))
                             .u;
    const Mesh tiny = build_mesh(GridSpec{2, 1});  // 12 < n_velocity, indices valid
    REQUIRE(tiny.n_velocity >= 12);
    const DeimOperator op =
        build_deim_operator(Matrix(vfull.leftCols(3)), vfull, deim_select(vfull), tiny);
    const Vector f = rng.normal_vector(CounterRng::kAudit, 70000, 12);
    CHECK((op.reconstruct(f) - f).norm() <= 1e-10 * f.norm());
  }

  SUBCASE("the interpolation error bound holds for random vectors") {
    const auto sel = deim_select(v);
    const DeimOperator op = build_deim_operator(qu, v, sel, mesh);
    const Matrix pv = v(sel.indices, Eigen::all);
    const double inv_norm = 1.0 / svd(pv).sigma.minCoeff();
    for (int t = 0; t < 20; ++t) {
      const Vector f = rng.normal_vector(CounterRng::kAudit, 80000 + t, mesh.n_velocity);
      const double lhs = (f - op.reconstruct(f)).norm();
      const double rhs = inv_norm * (f - v * (v.transpose() * f)).norm();
      CHECK(lhs <= rhs * (1.0 + 1e-10));
    }
  }

  SUBCASE("gappy operator uses least squares over the larger index set") {
    const auto sel = gappy_select(v, 2 * n_vec);
    const DeimOperator op = build_deim_operator(qu, v, sel, mesh);
    CHECK(op.sampled_to_reduced.cols() == 2 * n_vec);
    const Vector coeff = rng.normal_vector(CounterRng::kAudit, 90000, n_vec);
    const Vector f = v * coeff;  // least squares is exact on the range of V
    CHECK((op.reconstruct(f) - f).norm() <= 1e-10 * f.norm());
  }

  SUBCASE("rebuilding the operator reproduces identical precomputed blocks") {
    const auto sel = deim_select(v);
    const DeimOperator a = build_deim_operator(qu, v, sel, mesh);
    const DeimOperator b = build_deim_operator(qu, v, sel, mesh);
    CHECK(a.sampled_to_reduced == b.sampled_to_reduced);
  }

  SUBCASE("degenerate sampled systems are rejected") {
    Matrix id = Matrix::Zero(mesh.n_velocity, 2);
    id(0, 0) = 1.0;
    id(1, 1) = 1.0;
    InterpolationSelection bad;
    bad.method = IndexMethod::kDeim;
    bad.indices = {4, 5};  // rows where both columns vanish
    CHECK_THROWS_AS(build_deim_operator(qu, id, bad, mesh), SingularMatrixError);
    bad.method = IndexMethod::kGappy;
    bad.indices = {4, 5, 6, 7};
    CHECK_THROWS_AS(build_deim_operator(qu, id, bad, mesh), RankDeficiencyError);
    InterpolationSelection short_sel;
    short_sel.indices = {0};
    CHECK_THROWS_AS(build_deim_operator(qu, id, short_sel, mesh), ConfigError);
  }
}
