#include <doctest.h>

#include <cmath>

#include "rom/offline.hpp"
#include "rom/online.hpp"
#include "rom/rng.hpp"

using namespace rom;

namespace {

// Shared offline build plus a hyper-reduction operator on top of it.
struct OnlineFixture {
  Mesh mesh;
  AffineOperator ops;
  OfflineResult off;
  PodResult pod;
  DeimOperator deim;

  OnlineFixture() : mesh(build_mesh(GridSpec{16, 2})), ops(assemble_operators(mesh)) {
    OfflineOptions options;
    options.tau = 1e-3;
    options.delta = 1e-8;
    options.n_trial = 60;
    options.seed = 2024;
    off = build_reduced_basis(mesh, ops, options);
    pod = pod_nonlinear(off.snapshots.columns);
    deim = build_deim_operator(off.basis.velocity, pod.basis, deim_select(pod.basis),
                               mesh);
  }

  static const OnlineFixture& get() {
    static OnlineFixture fixture;
    return fixture;
  }
};

}  // namespace

TEST_CASE("lifting reduced coefficients") {
  const OnlineFixture& fix = OnlineFixture::get();
  const ReducedBasis& basis = fix.off.basis;

  SUBCASE("zero coefficients lift to the boundary interpolant") {
    const LiftedSolution sol =
        lift(Vector(Vector::Zero(basis.velocity_rank())),
             Vector(Vector::Zero(basis.pressure_rank())), basis, fix.ops);
    CHECK((sol.u - fix.ops.u_bc).norm() == 0.0);
    CHECK(sol.p.norm() == 0.0);
  }

  SUBCASE("projecting a retained snapshot round-trips") {
    const Vector u_in = fix.off.accepted_velocity.col(0);
    const Vector u_hat = basis.velocity.transpose() * u_in;
    const Vector p_hat = basis.pressure.transpose() * fix.off.accepted_pressure.col(0);
    const LiftedSolution sol = lift(u_hat, p_hat, basis, fix.ops);
    CHECK((sol.u - (fix.ops.u_bc + u_in)).norm() <= 1e-10 * u_in.norm());
    CHECK((sol.p - fix.off.accepted_pressure.col(0)).norm() <=
          1e-10 * fix.off.accepted_pressure.col(0).norm());
  }

  SUBCASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(lift(Vector(Vector::Zero(1)), Vector(Vector::Zero(1)), basis,
                         fix.ops),
                    ConfigError);
  }
}

TEST_CASE("reduced and hyper-reduced Picard solves") {
  const OnlineFixture& fix = OnlineFixture::get();
  const CounterRng rng(12);
  const Vector xi = rng.uniform_vector(CounterRng::kAudit, 7, 4, 0.01, 1.0);
  OnlineConfig config;

  const OnlineReport reduced =
      solve_reduced(fix.mesh, fix.ops, fix.off.rop, fix.off.basis, xi, config);
  const OnlineReport hyper = solve_deim(fix.mesh, fix.ops, fix.off.rop, fix.off.basis,
                                        fix.deim, xi, config);

  SUBCASE("both converge with one full residual evaluation at the end") {
    for (const OnlineReport* rep : {&reduced, &hyper}) {
      CHECK(rep->converged);
      CHECK(rep->residual_history.back() < config.delta);
      CHECK(rep->full_residual_evaluations == 1);
      CHECK(rep->picard_iterations == static_cast<int>(rep->linear_iterations.size()));
    }
  }

  SUBCASE("accuracy of the two reduced models is comparable") {
    CHECK(reduced.eta < 1e-2);
    CHECK(hyper.eta < 1e-2);
    const double ratio = hyper.eta / reduced.eta;
    CHECK(ratio < 3.0);
    CHECK(ratio > 1.0 / 3.0);
  }

  SUBCASE("the lifted solution reproduces the reported indicator") {
    const ResidualReport rep =
        residual_full(fix.mesh, fix.ops, hyper.u_tilde, hyper.p_tilde, xi);
    CHECK(rep.indicator == doctest::Approx(hyper.eta).epsilon(1e-12));
  }

  SUBCASE("element work per step: full grid versus sample mesh") {
    CHECK(reduced.elements_per_step == fix.mesh.n_elements);
    CHECK(hyper.elements_per_step <=
          static_cast<long>(fix.deim.sample.elements.size()));
    CHECK(hyper.elements_per_step < fix.mesh.n_elements);
  }

  SUBCASE("hyper-reduced residual assembles from the bundle blocks") {
    // Rebuild the converged reduced residual by hand: affine part plus the
    // sampled convection contribution in the velocity corner only.
    const Vector z = (Vector(fix.off.rop.rank()) << hyper.u_hat, hyper.p_hat).finished();
    const Matrix rows = assemble_convection_sampled(
        fix.mesh, fix.deim.sample, hyper.u_tilde, fix.deim.selection.indices);
    Vector g = fix.off.rop.stokes_matrix(xi) * z - fix.off.rop.rhs(xi);
    g.head(fix.off.rop.ku) += fix.deim.sampled_to_reduced * (rows * hyper.u_tilde);
    const double rel = g.norm() / fix.off.rop.rhs(xi).norm();
    CHECK(rel == doctest::Approx(hyper.residual_history.back()).epsilon(1e-10));
  }

  SUBCASE("gate-accepted parameters stay below the offline tolerance") {
    const OnlineReport rep =
        solve_reduced(fix.mesh, fix.ops, fix.off.rop, fix.off.basis,
                      fix.off.accepted_xi.back(), config);
    CHECK(rep.eta <= 1e-3);
  }

  SUBCASE("a zero Picard budget reports non-convergence with history") {
    OnlineConfig strict;
    strict.picard_maxit = 0;
    CHECK_THROWS_AS(solve_reduced(fix.mesh, fix.ops, fix.off.rop, fix.off.basis, xi,
                                  strict),
                    NonConvergenceError);
  }
}

TEST_CASE("direct and preconditioned-Krylov online solves agree") {
  const OnlineFixture& fix = OnlineFixture::get();
  const CounterRng rng(13);
  const Vector xi = rng.uniform_vector(CounterRng::kAudit, 8, 4, 0.01, 1.0);

  OnlineConfig direct;
  const OnlineReport base = solve_deim(fix.mesh, fix.ops, fix.off.rop, fix.off.basis,
                                       fix.deim, xi, direct);

  const Preconditioner offline_stokes = make_stokes_preconditioner(
      fix.off.rop, fix.off.xi_mean, PrecondVariant::kOffline);
  OnlineConfig iterative;
  iterative.linear_solver = LinearSolverKind::kBicgstab;
  const OnlineReport krylov = solve_deim(fix.mesh, fix.ops, fix.off.rop, fix.off.basis,
                                         fix.deim, xi, iterative, &offline_stokes);

  CHECK(krylov.converged);
  CHECK((krylov.u_hat - base.u_hat).norm() <= 1e-6 * base.u_hat.norm());
  CHECK(krylov.mean_linear_iterations() > 0.0);

  const Vector u_anchor = fix.ops.u_bc + fix.off.accepted_velocity.col(0);
  const Preconditioner offline_ns = make_navier_stokes_preconditioner(
      fix.mesh, fix.ops, fix.off.rop, fix.off.basis, fix.deim, fix.off.xi_mean,
      PrecondVariant::kOffline, &u_anchor);
  const OnlineReport ns = solve_deim(fix.mesh, fix.ops, fix.off.rop, fix.off.basis,
                                     fix.deim, xi, iterative, &offline_ns);
  CHECK(ns.converged);
  CHECK((ns.u_hat - base.u_hat).norm() <= 1e-6 * base.u_hat.norm());

  const Preconditioner online_ns = make_navier_stokes_preconditioner(
      fix.mesh, fix.ops, fix.off.rop, fix.off.basis, fix.deim, xi,
      PrecondVariant::kOnline);
  CHECK(online_ns.used_full_solve);
  const OnlineReport ons = solve_deim(fix.mesh, fix.ops, fix.off.rop, fix.off.basis,
                                      fix.deim, xi, iterative, &online_ns);
  CHECK(ons.converged);
  CHECK(ons.mean_linear_iterations() <= 4.0);
}

TEST_CASE("sampled assembly work depends on the selection, not the grid") {
  // The same element-local indices on two grids touch the same number of
  // elements, so per-step sampled work matches; full assembly scales with
  // the element count.
  const Mesh coarse = build_mesh(GridSpec{8, 2});
  const Mesh fine = build_mesh(GridSpec{16, 2});

  auto transplanted_rows = [](const Mesh& mesh) {
    std::vector<int> rows;
    for (int ey : {1, 2}) {
      for (int ex : {1, 2}) {
        const int node = (2 * ey + 1) * mesh.nodes_per_side + (2 * ex + 1);
        rows.push_back(node);                         // element-center x dof
        const int corner = (2 * ey) * mesh.nodes_per_side + 2 * ex;
        rows.push_back(mesh.n_nodes + corner);        // shared-corner y dof
      }
    }
    return rows;
  };

  long coarse_visits = 0, fine_visits = 0;
  for (const Mesh* mesh : {&coarse, &fine}) {
    const std::vector<int> rows = transplanted_rows(*mesh);
    const SampleMesh sample = build_sample_mesh(*mesh, rows);
    const Vector u = Vector::Ones(mesh->n_velocity);
    long visits = 0;
    assemble_convection_sampled(*mesh, sample, u, rows, &visits);
    (mesh == &coarse ? coarse_visits : fine_visits) = visits;
  }
  CHECK(coarse_visits == fine_visits);
  CHECK(fine.n_elements == 4 * coarse.n_elements);
}
