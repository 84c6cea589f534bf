#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rom/experiment.hpp"
#include "rom/io.hpp"

using namespace rom;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("cavityrom_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// CSV text without the trailing wall-seconds column.
std::string strip_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find_last_of(',');
    out << line.substr(0, comma) << "\n";
  }
  return out.str();
}

ExperimentConfig tiny_config(const fs::path& dir) {
  ExperimentConfig config;
  config.n = 8;
  config.n_d = 2;
  config.tau = 5e-3;
  config.n_trial = 8;
  config.n_s = 2;
  config.seed = 77;
  config.bundle_dir = (dir / "bundle").string();
  config.output = (dir / "results.csv").string();
  return config;
}

}  // namespace

TEST_CASE("config files and overrides layer onto the defaults") {
  const fs::path dir = temp_dir("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# comment line\n";
    out << "n = 16\n";
    out << "tau = 1e-3   # trailing comment\n";
    out << "solvers = direct,bicgstab:offline-stokes\n";
    out << "models = reduced,deim\n";
  }
  ExperimentConfig config;
  apply_config_file(config, (dir / "run.cfg").string());
  CHECK(config.n == 16);
  CHECK(config.tau == doctest::Approx(1e-3));
  CHECK(config.solvers.size() == 2);
  CHECK(config.solvers[1].preconditioner == "offline-stokes");
  CHECK(config.models == std::vector<std::string>{"reduced", "deim"});

  apply_override(config, "n", "8", "--set[0]");
  CHECK(config.n == 8);

  SUBCASE("unknown keys are reported with their location") {
    std::ofstream out(dir / "bad.cfg");
    out << "n = 8\n";
    out << "bogus = 1\n";
    out.close();
    try {
      apply_config_file(config, (dir / "bad.cfg").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      CHECK(what.find("bad.cfg:2") != std::string::npos);
      CHECK(what.find("bogus") != std::string::npos);
    }
  }

  SUBCASE("malformed values are reported") {
    std::ofstream out(dir / "bad2.cfg");
    out << "n_trial = soon\n";
    out.close();
    CHECK_THROWS_AS(apply_config_file(config, (dir / "bad2.cfg").string()),
                    ConfigError);
  }

  SUBCASE("tau accepts inf") {
    apply_override(config, "tau", "inf", "--set[1]");
    CHECK(std::isinf(config.tau));
  }

  SUBCASE("solver strings are validated") {
    CHECK_THROWS_AS(parse_solver_choice("bicgstab:fancy"), ConfigError);
    CHECK_THROWS_AS(parse_solver_choice("multigrid"), ConfigError);
    CHECK(parse_solver_choice("direct").label() == "direct");
  }

  SUBCASE("config hash tracks content") {
    ExperimentConfig a, b;
    CHECK(a.hash() == b.hash());
    b.seed = 1234;
    CHECK(a.hash() != b.hash());
  }
}

TEST_CASE("offline command persists a deterministic bundle") {
  const fs::path dir = temp_dir("offline");
  ExperimentConfig config = tiny_config(dir);
  std::ostringstream log;

  const OfflineSummary first = run_offline(config, log);
  CHECK(first.rank == 3 * first.snapshot_count);
  CHECK(fs::exists(dir / "bundle" / "manifest.json"));
  const std::string manifest_a = slurp(dir / "bundle" / "manifest.json");

  const OfflineSummary second = run_offline(config, log);
  CHECK(second.rank == first.rank);
  CHECK(slurp(dir / "bundle" / "manifest.json") == manifest_a);  // byte identical

  const Mesh mesh = build_mesh(GridSpec{config.n, config.n_d});
  const Bundle bundle = load_bundle(config.bundle_dir, mesh);
  CHECK(bundle.basis.rank() == first.rank);
  CHECK(bundle.deim.selection.count() == first.n_deim);
  CHECK(bundle.find_preconditioner("offline-stokes") != nullptr);
  CHECK(bundle.find_preconditioner("offline-ns") != nullptr);

  SUBCASE("an infinite gate yields the minimal bundle") {
    ExperimentConfig mini = config;
    mini.bundle_dir = (dir / "bundle_inf").string();
    apply_override(mini, "tau", "inf", "--set[0]");
    const OfflineSummary summary = run_offline(mini, log);
    CHECK(summary.rank == 3);
    CHECK(summary.snapshot_count == 1);
  }

  SUBCASE("matrix and snapshot exports are written on request") {
    ExperimentConfig exporting = config;
    exporting.bundle_dir = (dir / "bundle_export").string();
    exporting.export_matrices = true;
    exporting.save_snapshots = true;
    run_offline(exporting, log);
    CHECK(fs::exists(fs::path(exporting.bundle_dir) / "viscosity_block_0.mtx"));
    CHECK(fs::exists(fs::path(exporting.bundle_dir) / "divergence.mtx"));
    CHECK(fs::exists(fs::path(exporting.bundle_dir) / "snapshots" /
                     "snapshot_0.json"));
    const SolutionSnapshot snap = load_solution_snapshot(
        (fs::path(exporting.bundle_dir) / "snapshots" / "snapshot_0").string());
    CHECK(snap.n == config.n);
    CHECK(snap.residual < config.delta);
  }
}

TEST_CASE("online command emits a reproducible CSV sweep") {
  const fs::path dir = temp_dir("online");
  ExperimentConfig config = tiny_config(dir);
  std::ostringstream log;
  run_offline(config, log);

  apply_override(config, "solvers", "direct,bicgstab:offline-stokes", "--set");
  run_online(config, log);
  const std::string csv_a = slurp(dir / "results.csv");
  CHECK(fs::exists(dir / "results.csv.samples.json"));

  run_online(config, log);
  const std::string csv_b = slurp(dir / "results.csv");
  CHECK(strip_wall_column(csv_a) == strip_wall_column(csv_b));

  // header + n_s * (full + 2x reduced + 2x deim) + 5 mean rows
  const int lines = static_cast<int>(std::count(csv_a.begin(), csv_a.end(), '\n'));
  CHECK(lines == 1 + config.n_s * 5 + 5);
  CHECK(csv_a.rfind("model,solver,preconditioner,xi_id,eta,", 0) == 0);

  SUBCASE("a missing bundle is reported") {
    ExperimentConfig missing = config;
    missing.bundle_dir = (dir / "nope").string();
    CHECK_THROWS_AS(run_online(missing, log), IoError);
  }
}

TEST_CASE("figure-data sweeps write the advertised columns") {
  const fs::path dir = temp_dir("figure");
  ExperimentConfig config = tiny_config(dir);
  config.n_s = 2;
  config.ndeim_grid = {1, 2};
  std::ostringstream log;

  config.output = (dir / "gappy.csv").string();
  run_figure_data(config, "gappy-vs-deim", log);
  const std::string gappy = slurp(dir / "gappy.csv");
  CHECK(gappy.rfind("n_deim,n_g,eta_deim,eta_gappy,eta_reduced", 0) == 0);

  config.output = (dir / "ndeim.csv").string();
  run_figure_data(config, "ndeim-sweep", log);
  CHECK(slurp(dir / "ndeim.csv").rfind("n_deim,eta_deim,eta_reduced", 0) == 0);

  config.output = (dir / "strategies.csv").string();
  run_figure_data(config, "strategy-comparison", log);
  CHECK(slurp(dir / "strategies.csv")
            .rfind("n_deim,eta_full_ks,eta_full_ntrial,eta_mixed,eta_reduced", 0) == 0);

  CHECK_THROWS_AS(run_figure_data(config, "unknown", log), ConfigError);
}

TEST_CASE("verify command passes its property suite") {
  std::ostringstream log;
  CHECK(run_verify(log));
  CHECK(log.str().find("FAIL") == std::string::npos);
}

TEST_CASE("matrix market export uses 1-based coordinate format") {
  SparseMatrix m(2, 3);
  m.insert(0, 1) = 1.5;
  m.insert(1, 2) = -2.0;
  m.makeCompressed();
  std::ostringstream out;
  write_matrix_market(out, m);
  CHECK(out.str() ==
        "%%MatrixMarket matrix coordinate real general\n"
        "2 3 2\n"
        "1 2 1.5\n"
        "2 3 -2\n");
}

TEST_CASE("solution snapshots round-trip through disk") {
  const fs::path dir = temp_dir("snapshot");
  SolutionSnapshot snap;
  snap.u = Vector::LinSpaced(6, 0.0, 5.0);
  snap.p = Vector::LinSpaced(3, -1.0, 1.0);
  snap.xi = Vector::Constant(4, 0.25);
  snap.n = 8;
  snap.n_d = 2;
  snap.residual = 3e-9;
  snap.iterations = 7;
  save_solution_snapshot((dir / "state").string(), snap);

  const SolutionSnapshot loaded = load_solution_snapshot((dir / "state").string());
  CHECK(loaded.u == snap.u);
  CHECK(loaded.p == snap.p);
  CHECK(loaded.xi == snap.xi);
  CHECK(loaded.residual == snap.residual);
  CHECK(loaded.iterations == 7);
}
