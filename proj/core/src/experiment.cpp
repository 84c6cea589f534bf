#include "rom/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rom/io.hpp"

namespace rom {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.12e") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

long parse_long(const std::string& value, const std::string& where) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& value, const std::string& where) {
  if (value == "inf" || value == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(where + ": expected true/false, got '" + value + "'");
}

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(now() - start).count();
}

}  // namespace

std::string SolverChoice::label() const {
  return solver == LinearSolverKind::kDirect ? "direct" : "bicgstab";
}

SolverChoice parse_solver_choice(const std::string& text) {
  SolverChoice choice;
  if (text == "direct") {
    choice.solver = LinearSolverKind::kDirect;
    choice.preconditioner = "none";
    return choice;
  }
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head != "bicgstab") {
    throw ConfigError("unknown solver '" + text +
                      "' (expected direct or bicgstab:<preconditioner>)");
  }
  choice.solver = LinearSolverKind::kBicgstab;
  choice.preconditioner = colon == std::string::npos ? "none" : text.substr(colon + 1);
  const std::vector<std::string> known = {"none", "offline-stokes", "online-stokes",
                                          "offline-ns", "online-ns"};
  if (std::find(known.begin(), known.end(), choice.preconditioner) == known.end()) {
    throw ConfigError("unknown preconditioner '" + choice.preconditioner + "'");
  }
  return choice;
}

void ExperimentConfig::validate() const {
  GridSpec{n, n_d}.validate();
  if (delta <= 0.0) throw ConfigError("config: delta must be positive");
  if (tau <= 0.0) throw ConfigError("config: tau must be positive");
  if (n_s < 1) throw ConfigError("config: n_s must be at least 1");
  if (n_trial < 0) throw ConfigError("config: n_trial must be nonnegative");
  if (ng_multiplier < 1) throw ConfigError("config: ng_multiplier must be at least 1");
  if (index_method != "deim" && index_method != "gappy") {
    throw ConfigError("config: index_method must be deim or gappy");
  }
  parse_snapshot_strategy(strategy);
  for (const auto& m : models) {
    if (m != "full" && m != "reduced" && m != "deim") {
      throw ConfigError("config: unknown model '" + m + "'");
    }
  }
  if (models.empty()) throw ConfigError("config: empty model list");
  if (solvers.empty()) throw ConfigError("config: empty solver list");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out << "n=" << n << "\n";
  out << "n_d=" << n_d << "\n";
  out << "tau=" << fmt(tau, "%.17g") << "\n";
  out << "delta=" << fmt(delta, "%.17g") << "\n";
  out << "n_trial=" << n_trial << "\n";
  out << "n_s=" << n_s << "\n";
  out << "seed=" << seed << "\n";
  out << "strategy=" << strategy << "\n";
  out << "models=" << join(models, ',') << "\n";
  std::vector<std::string> solver_texts;
  for (const auto& s : solvers) {
    solver_texts.push_back(s.solver == LinearSolverKind::kDirect
                               ? "direct"
                               : "bicgstab:" + s.preconditioner);
  }
  out << "solvers=" << join(solver_texts, ',') << "\n";
  out << "n_deim=" << n_deim << "\n";
  out << "ng_multiplier=" << ng_multiplier << "\n";
  out << "index_method=" << index_method << "\n";
  out << "krylov_tol=" << fmt(krylov_tol, "%.17g") << "\n";
  out << "krylov_maxit=" << krylov_maxit << "\n";
  out << "picard_maxit=" << picard_maxit << "\n";
  std::vector<std::string> grid_texts;
  for (int g : ndeim_grid) grid_texts.push_back(std::to_string(g));
  out << "ndeim_grid=" << join(grid_texts, ',') << "\n";
  out << "export_matrices=" << (export_matrices ? "true" : "false") << "\n";
  out << "save_snapshots=" << (save_snapshots ? "true" : "false") << "\n";
  return out.str();
}

std::string ExperimentConfig::hash() const {
  const std::string text = canonical_text();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void set_key(ExperimentConfig& c, const std::string& key, const std::string& value,
             const std::string& where) {
  if (key == "n") {
    c.n = static_cast<int>(parse_long(value, where));
  } else if (key == "n_d") {
    c.n_d = static_cast<int>(parse_long(value, where));
  } else if (key == "tau") {
    c.tau = parse_double(value, where);
  } else if (key == "delta") {
    c.delta = parse_double(value, where);
  } else if (key == "n_trial") {
    c.n_trial = static_cast<int>(parse_long(value, where));
  } else if (key == "n_s") {
    c.n_s = static_cast<int>(parse_long(value, where));
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_long(value, where));
  } else if (key == "strategy") {
    parse_snapshot_strategy(value);
    c.strategy = value;
  } else if (key == "models") {
    c.models = split(value, ',');
  } else if (key == "solvers") {
    c.solvers.clear();
    for (const auto& item : split(value, ',')) {
      c.solvers.push_back(parse_solver_choice(item));
    }
  } else if (key == "n_deim") {
    c.n_deim = static_cast<int>(parse_long(value, where));
  } else if (key == "ng_multiplier") {
    c.ng_multiplier = static_cast<int>(parse_long(value, where));
  } else if (key == "index_method") {
    c.index_method = value;
  } else if (key == "krylov_tol") {
    c.krylov_tol = parse_double(value, where);
  } else if (key == "krylov_maxit") {
    c.krylov_maxit = static_cast<int>(parse_long(value, where));
  } else if (key == "picard_maxit") {
    c.picard_maxit = static_cast<int>(parse_long(value, where));
  } else if (key == "bundle_dir") {
    c.bundle_dir = value;
  } else if (key == "output") {
    c.output = value;
  } else if (key == "ndeim_grid") {
    c.ndeim_grid.clear();
    for (const auto& item : split(value, ',')) {
      c.ndeim_grid.push_back(static_cast<int>(parse_long(item, where)));
    }
  } else if (key == "export_matrices") {
    c.export_matrices = parse_bool(value, where);
  } else if (key == "save_snapshots") {
    c.save_snapshots = parse_bool(value, where);
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    set_key(config, key, value, where);
  }
}

void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value, const std::string& where) {
  set_key(config, key, value, where);
}

namespace {

std::vector<int> default_ndeim_grid(int max_value) {
  std::vector<int> grid;
  for (int g = 1; g < max_value; g *= 2) grid.push_back(g);
  if (grid.empty() || grid.back() != max_value) grid.push_back(max_value);
  return grid;
}

std::vector<Vector> draw_samples(const ExperimentConfig& config, int m) {
  const CounterRng rng(config.seed);
  std::vector<Vector> samples;
  samples.reserve(config.n_s);
  for (int s = 0; s < config.n_s; ++s) {
    samples.push_back(rng.uniform_vector(CounterRng::kOnlineSamples,
                                         static_cast<std::uint64_t>(s), m, 0.01, 1.0));
  }
  return samples;
}

void write_samples_sidecar(const std::string& csv_path,
                           const ExperimentConfig& config,
                           const std::vector<Vector>& samples) {
  nlohmann::json doc;
  doc["config_hash"] = config.hash();
  doc["seed"] = config.seed;
  nlohmann::json xi = nlohmann::json::object();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    xi["s" + std::to_string(s)] = std::vector<double>(
        samples[s].data(), samples[s].data() + samples[s].size());
  }
  doc["samples"] = xi;
  doc["config"] = config.canonical_text();
  const std::string path = csv_path + ".samples.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
}

struct ResultRow {
  std::string model;
  std::string solver;
  std::string preconditioner;
  std::string xi_id;
  double eta = 0.0;
  double nonlinear_iters = 0.0;
  double mean_linear_iters = 0.0;
  double init_linear_iters = 0.0;
  double element_visits = 0.0;
  double wall_seconds = 0.0;
  long linear_solve_count = 0;  // for aggregation
  long linear_iter_sum = 0;
};

void write_rows_csv(const std::string& path, const ExperimentConfig& config,
                    std::vector<ResultRow> rows) {
  // Per-group averages; linear iterations averaged over individual solves.
  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const auto& row : rows) {
    groups[row.model + "|" + row.solver + "|" + row.preconditioner].push_back(&row);
  }
  std::vector<ResultRow> means;
  for (const auto& [key, members] : groups) {
    ResultRow mean;
    mean.model = members.front()->model;
    mean.solver = members.front()->solver;
    mean.preconditioner = members.front()->preconditioner;
    mean.xi_id = "mean";
    long solves = 0, iter_sum = 0;
    for (const ResultRow* r : members) {
      mean.eta += r->eta;
      mean.nonlinear_iters += r->nonlinear_iters;
      mean.init_linear_iters += r->init_linear_iters;
      mean.element_visits += r->element_visits;
      mean.wall_seconds += r->wall_seconds;
      solves += r->linear_solve_count;
      iter_sum += r->linear_iter_sum;
    }
    const double count = static_cast<double>(members.size());
    mean.eta /= count;
    mean.nonlinear_iters /= count;
    mean.init_linear_iters /= count;
    mean.element_visits /= count;
    mean.wall_seconds /= count;
    mean.mean_linear_iters =
        solves > 0 ? static_cast<double>(iter_sum) / static_cast<double>(solves) : 0.0;
    means.push_back(mean);
  }
  rows.insert(rows.end(), means.begin(), means.end());

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "model,solver,preconditioner,xi_id,eta,nonlinear_iters,mean_linear_iters,"
         "init_linear_iters,element_visits,config_hash,wall_seconds\n";
  const std::string hash = config.hash();
  for (const auto& r : rows) {
    out << r.model << ',' << r.solver << ',' << r.preconditioner << ',' << r.xi_id
        << ',' << fmt(r.eta) << ',' << fmt(r.nonlinear_iters, "%.6g") << ','
        << fmt(r.mean_linear_iters, "%.6g") << ',' << fmt(r.init_linear_iters, "%.6g")
        << ',' << fmt(r.element_visits, "%.6g") << ',' << hash << ','
        << fmt(r.wall_seconds, "%.3e") << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

// Online preconditioner variants are built per query parameter; offline
// variants come factored from the bundle.
struct PrecondHandle {
  const Preconditioner* ptr = nullptr;
  std::optional<Preconditioner> owned;
};

PrecondHandle resolve_preconditioner(const std::string& name, const Bundle& bundle,
                                     const Mesh& mesh, const AffineOperator& ops,
                                     const Vector& xi, const ExperimentConfig& config) {
  PrecondHandle handle;
  if (name == "none") return handle;
  if (name == "offline-stokes" || name == "offline-ns") {
    handle.ptr = bundle.find_preconditioner(name);
    if (!handle.ptr) {
      throw ConfigError("bundle does not carry preconditioner '" + name + "'");
    }
    return handle;
  }
  if (name == "online-stokes") {
    handle.owned = make_stokes_preconditioner(bundle.rop, xi, PrecondVariant::kOnline);
  } else if (name == "online-ns") {
    handle.owned = make_navier_stokes_preconditioner(
        mesh, ops, bundle.rop, bundle.basis, bundle.deim, xi,
        PrecondVariant::kOnline, nullptr, config.delta, config.picard_maxit);
  } else {
    throw ConfigError("unknown preconditioner '" + name + "'");
  }
  handle.ptr = &*handle.owned;
  return handle;
}

}  // namespace

OfflineSummary run_offline(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const auto t0 = now();
  const Mesh mesh = build_mesh(GridSpec{config.n, config.n_d});
  const AffineOperator ops = assemble_operators(mesh);
  log << "offline: grid n=" << config.n << " (velocity dofs " << mesh.n_velocity
      << ", pressure dofs " << mesh.n_pressure << "), m=" << mesh.subdomain_count()
      << "\n";

  OfflineOptions options;
  options.tau = config.tau;
  options.delta = config.delta;
  options.n_trial = config.n_trial;
  options.seed = config.seed;
  options.strategy = parse_snapshot_strategy(config.strategy);
  options.picard_maxit = config.picard_maxit;
  options.log = &log;
  const OfflineResult off = build_reduced_basis(mesh, ops, options);

  const PodResult pod = pod_nonlinear(off.snapshots.columns, config.n_deim);
  InterpolationSelection selection;
  if (config.index_method == "gappy") {
    const int n_g = std::min<long>(
        static_cast<long>(config.ng_multiplier) * pod.basis.cols(), mesh.n_velocity);
    selection = gappy_select(pod.basis, static_cast<int>(n_g));
  } else {
    selection = deim_select(pod.basis);
  }
  const DeimOperator deim =
      build_deim_operator(off.basis.velocity, pod.basis, selection, mesh);

  Bundle bundle;
  bundle.meta.n = config.n;
  bundle.meta.n_d = config.n_d;
  bundle.meta.m = mesh.subdomain_count();
  bundle.meta.tau = config.tau;
  bundle.meta.delta = config.delta;
  bundle.meta.n_trial = config.n_trial;
  bundle.meta.seed = config.seed;
  bundle.meta.strategy = config.strategy;
  bundle.meta.index_method = config.index_method;
  bundle.meta.snapshot_count = off.snapshot_count;
  bundle.meta.n_deim = static_cast<int>(pod.basis.cols());
  bundle.meta.n_g = selection.count();
  bundle.meta.rank_cutoff = 1e-12;
  bundle.meta.full_solves = off.full_solves;
  bundle.basis = off.basis;
  bundle.rop = off.rop;
  bundle.deim = deim;

  bundle.preconditioners.push_back(
      make_stokes_preconditioner(off.rop, off.xi_mean, PrecondVariant::kOffline));
  const Vector u_anchor = ops.u_bc + off.accepted_velocity.col(0);
  bundle.preconditioners.push_back(make_navier_stokes_preconditioner(
      mesh, ops, off.rop, off.basis, deim, off.xi_mean, PrecondVariant::kOffline,
      &u_anchor, config.delta, config.picard_maxit));
  for (const auto& p : bundle.preconditioners) {
    log << "offline: built " << p.name() << " preconditioner in "
        << fmt(p.build_seconds, "%.3f") << " s\n";
  }

  save_bundle(config.bundle_dir, bundle);

  if (config.export_matrices) {
    for (int i = 0; i < ops.parameter_count(); ++i) {
      write_matrix_market(
          (fs::path(config.bundle_dir) / ("viscosity_block_" + std::to_string(i) + ".mtx"))
              .string(),
          ops.visc_blocks[i]);
    }
    write_matrix_market((fs::path(config.bundle_dir) / "divergence.mtx").string(),
                        ops.divergence);
    log << "offline: exported assembled operators in Matrix Market format\n";
  }
  if (config.save_snapshots) {
    const fs::path dir = fs::path(config.bundle_dir) / "snapshots";
    fs::create_directories(dir);
    for (int i = 0; i < off.snapshot_count; ++i) {
      SolutionSnapshot snap;
      snap.u = ops.u_bc + off.accepted_velocity.col(i);
      snap.p = off.accepted_pressure.col(i);
      snap.xi = off.accepted_xi[static_cast<std::size_t>(i)];
      snap.n = config.n;
      snap.n_d = config.n_d;
      snap.residual = off.accepted_residual[static_cast<std::size_t>(i)];
      snap.iterations = off.accepted_iterations[static_cast<std::size_t>(i)];
      save_solution_snapshot((dir / ("snapshot_" + std::to_string(i))).string(), snap);
    }
    log << "offline: saved " << off.snapshot_count << " solution snapshots\n";
  }

  OfflineSummary summary;
  summary.rank = off.basis.rank();
  summary.snapshot_count = off.snapshot_count;
  summary.n_deim = bundle.meta.n_deim;
  summary.n_g = bundle.meta.n_g;
  summary.full_solves = off.full_solves;
  summary.bundle_dir = config.bundle_dir;
  log << "offline: done in " << fmt(seconds_since(t0), "%.1f") << " s; rank "
      << summary.rank << " (snapshots " << summary.snapshot_count << "), n_deim "
      << summary.n_deim << ", full solves " << summary.full_solves << "\n";
  return summary;
}

void run_online(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const Mesh mesh = build_mesh(GridSpec{config.n, config.n_d});
  const AffineOperator ops = assemble_operators(mesh);
  const Bundle bundle = load_bundle(config.bundle_dir, mesh);
  const std::vector<Vector> samples = draw_samples(config, bundle.meta.m);

  OnlineConfig online;
  online.delta = config.delta;
  online.krylov_tol = config.krylov_tol;
  online.krylov_maxit = config.krylov_maxit;
  online.picard_maxit = config.picard_maxit;

  std::vector<ResultRow> rows;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Vector& xi = samples[s];
    const std::string xi_id = "s" + std::to_string(s);
    for (const auto& model : config.models) {
      if (model == "full") {
        const auto t0 = now();
        const FullState full = picard_full(mesh, ops, xi, config.delta,
                                           config.picard_maxit);
        ResultRow row;
        row.model = "full";
        row.solver = "direct";
        row.preconditioner = "none";
        row.xi_id = xi_id;
        row.eta = full.residual_history.back();
        row.nonlinear_iters = full.iterations;
        row.element_visits = static_cast<double>(mesh.n_elements);
        row.wall_seconds = seconds_since(t0);
        rows.push_back(row);
        continue;
      }
      for (const auto& choice : config.solvers) {
        online.linear_solver = choice.solver;
        const std::string precond_name =
            choice.solver == LinearSolverKind::kDirect ? "none" : choice.preconditioner;
        const PrecondHandle precond = resolve_preconditioner(
            precond_name, bundle, mesh, ops, xi, config);
        const auto t0 = now();
        const OnlineReport report =
            model == "reduced"
                ? solve_reduced(mesh, ops, bundle.rop, bundle.basis, xi, online,
                                precond.ptr)
                : solve_deim(mesh, ops, bundle.rop, bundle.basis, bundle.deim, xi,
                             online, precond.ptr);
        ResultRow row;
        row.model = model;
        row.solver = choice.label();
        row.preconditioner = precond_name;
        row.xi_id = xi_id;
        row.eta = report.eta;
        row.nonlinear_iters = report.picard_iterations;
        row.mean_linear_iters = report.mean_linear_iterations();
        row.init_linear_iters = report.init_linear_iterations;
        row.element_visits = static_cast<double>(report.elements_per_step);
        row.wall_seconds = seconds_since(t0);
        row.linear_solve_count = static_cast<long>(report.linear_iterations.size());
        for (int it : report.linear_iterations) row.linear_iter_sum += it;
        rows.push_back(row);
      }
    }
    log << "online: sample " << xi_id << " done\n";
  }

  write_rows_csv(config.output, config, std::move(rows));
  write_samples_sidecar(config.output, config, samples);
  log << "online: wrote " << config.output << "\n";
}

namespace {

// Mean indicator of the hyper-reduced model over the samples, for one
// operator configuration.
double mean_deim_eta(const Mesh& mesh, const AffineOperator& ops,
                     const OfflineResult& off, const Matrix& nonlinear_basis,
                     const InterpolationSelection& selection,
                     const std::vector<Vector>& samples, const OnlineConfig& online) {
  const DeimOperator op =
      build_deim_operator(off.basis.velocity, nonlinear_basis, selection, mesh);
  double sum = 0.0;
  for (const auto& xi : samples) {
    sum += solve_deim(mesh, ops, off.rop, off.basis, op, xi, online).eta;
  }
  return sum / static_cast<double>(samples.size());
}

}  // namespace

void run_figure_data(const ExperimentConfig& config, const std::string& sweep,
                     std::ostream& log) {
  config.validate();
  if (sweep != "strategy-comparison" && sweep != "ndeim-sweep" &&
      sweep != "gappy-vs-deim") {
    throw ConfigError("unknown sweep '" + sweep +
                      "' (expected strategy-comparison, ndeim-sweep, or gappy-vs-deim)");
  }
  const Mesh mesh = build_mesh(GridSpec{config.n, config.n_d});
  const AffineOperator ops = assemble_operators(mesh);

  OfflineOptions options;
  options.tau = config.tau;
  options.delta = config.delta;
  options.n_trial = config.n_trial;
  options.seed = config.seed;
  options.strategy = parse_snapshot_strategy(config.strategy);
  options.picard_maxit = config.picard_maxit;
  options.log = &log;
  if (sweep == "strategy-comparison") {
    options.strategy = SnapshotStrategy::kFullPerAcceptance;
    options.collect_mixed = true;
    options.collect_full_trial = true;
  }
  const OfflineResult off = build_reduced_basis(mesh, ops, options);
  log << "figure-data: basis rank " << off.basis.rank() << ", snapshots "
      << off.snapshot_count << "\n";

  const std::vector<Vector> samples = draw_samples(config, mesh.subdomain_count());
  OnlineConfig online;
  online.delta = config.delta;
  online.picard_maxit = config.picard_maxit;

  double reduced_baseline = 0.0;
  for (const auto& xi : samples) {
    reduced_baseline += solve_reduced(mesh, ops, off.rop, off.basis, xi, online).eta;
  }
  reduced_baseline /= static_cast<double>(samples.size());
  log << "figure-data: reduced baseline mean eta " << fmt(reduced_baseline) << "\n";

  std::ofstream out(config.output);
  if (!out) throw IoError("cannot open for writing: " + config.output);

  if (sweep == "strategy-comparison") {
    const std::vector<const Matrix*> sets = {&off.snapshots.columns,
                                             &off.full_trial_snapshots->columns,
                                             &off.mixed_snapshots->columns};
    std::vector<PodResult> pods;
    std::vector<InterpolationSelection> selections;
    for (const Matrix* s : sets) {
      pods.push_back(pod_nonlinear(*s));
      selections.push_back(deim_select(pods.back().basis));
    }
    const std::vector<int> grid = config.ndeim_grid.empty()
                                      ? default_ndeim_grid(off.snapshot_count)
                                      : config.ndeim_grid;
    out << "n_deim,eta_full_ks,eta_full_ntrial,eta_mixed,eta_reduced\n";
    for (int nd : grid) {
      out << nd;
      for (std::size_t k = 0; k < sets.size(); ++k) {
        if (nd > pods[k].rank) {
          out << ",";  // this set cannot supply nd vectors
          continue;
        }
        InterpolationSelection sel;
        sel.method = IndexMethod::kDeim;
        sel.indices.assign(selections[k].indices.begin(),
                           selections[k].indices.begin() + nd);
        const double eta = mean_deim_eta(mesh, ops, off, pods[k].basis.leftCols(nd),
                                         sel, samples, online);
        out << ',' << fmt(eta);
      }
      out << ',' << fmt(reduced_baseline) << "\n";
      log << "figure-data: n_deim " << nd << " done\n";
    }
  } else {
    const PodResult pod = pod_nonlinear(off.snapshots.columns);
    const InterpolationSelection full_selection = deim_select(pod.basis);
    std::vector<int> grid = config.ndeim_grid.empty() ? default_ndeim_grid(pod.rank)
                                                      : config.ndeim_grid;
    if (sweep == "ndeim-sweep") {
      out << "n_deim,eta_deim,eta_reduced\n";
      for (int nd : grid) {
        if (nd < 1 || nd > pod.rank) continue;
        // Greedy selection is prefix-stable, so slice the full run.
        InterpolationSelection sel;
        sel.method = IndexMethod::kDeim;
        sel.indices.assign(full_selection.indices.begin(),
                           full_selection.indices.begin() + nd);
        const double eta = mean_deim_eta(mesh, ops, off, pod.basis.leftCols(nd), sel,
                                         samples, online);
        out << nd << ',' << fmt(eta) << ',' << fmt(reduced_baseline) << "\n";
        log << "figure-data: n_deim " << nd << " done\n";
      }
    } else {
      out << "n_deim,n_g,eta_deim,eta_gappy,eta_reduced\n";
      for (int nd : grid) {
        if (nd < 1 || nd > pod.rank) continue;
        const Matrix v = pod.basis.leftCols(nd);
        InterpolationSelection deim_sel;
        deim_sel.method = IndexMethod::kDeim;
        deim_sel.indices.assign(full_selection.indices.begin(),
                                full_selection.indices.begin() + nd);
        const int n_g = std::min(config.ng_multiplier * nd, mesh.n_velocity);
        const InterpolationSelection gappy_sel = gappy_select(v, n_g);
        const double eta_deim =
            mean_deim_eta(mesh, ops, off, v, deim_sel, samples, online);
        const double eta_gappy =
            mean_deim_eta(mesh, ops, off, v, gappy_sel, samples, online);
        out << nd << ',' << n_g << ',' << fmt(eta_deim) << ',' << fmt(eta_gappy) << ','
            << fmt(reduced_baseline) << "\n";
        log << "figure-data: n_deim " << nd << " done\n";
      }
    }
  }
  if (!out) throw IoError("write failed: " + config.output);
  log << "figure-data: wrote " << config.output << "\n";
}

bool run_verify(std::ostream& log) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    log << (ok ? "ok   " : "FAIL ") << name;
    if (!ok && !detail.empty()) log << " (" << detail << ")";
    log << "\n";
    if (!ok) ++failures;
  };
  const CounterRng rng(421);

  const Mesh mesh = build_mesh(GridSpec{8, 2});
  const AffineOperator ops = assemble_operators(mesh);

  check("mesh-counts", mesh.n_nodes == 81 && mesh.n_pressure == 48 &&
                           mesh.n_elements == 16);
  {
    Vector ones = Vector::Ones(mesh.n_velocity);
    const double div_kernel = (ops.divergence * ones).cwiseAbs().maxCoeff();
    const double stiff_kernel = (ops.viscosity_sum * ones).cwiseAbs().maxCoeff();
    check("constant-field-kernels", div_kernel < 1e-12 && stiff_kernel < 1e-12,
          "divergence " + fmt(div_kernel) + ", stiffness " + fmt(stiff_kernel));
  }
  {
    const Mesh single = build_mesh(GridSpec{8, 1});
    const SparseMatrix direct = assemble_viscosity_blocks(single)[0];
    const double diff = (ops.viscosity_sum - direct).norm();
    check("affine-partition", diff < 1e-12 * direct.norm(), fmt(diff));
  }
  {
    const Vector u = rng.normal_vector(CounterRng::kAudit, 1, mesh.n_velocity);
    const SparseMatrix full = assemble_convection(mesh, ops.pattern, u);
    std::vector<int> want = {5, 40, mesh.n_nodes + 17, mesh.n_nodes + 60};
    const SampleMesh sample = build_sample_mesh(mesh, want);
    const Matrix rows = assemble_convection_sampled(mesh, sample, u, want);
    bool identical = true;
    for (std::size_t r = 0; r < want.size(); ++r) {
      const Vector dense_row = full.row(want[r]).toDense().transpose();
      identical = identical && (rows.row(static_cast<Eigen::Index>(r)).transpose() ==
                                dense_row);
    }
    check("sampled-restriction-bitwise", identical);
  }
  {
    Matrix q(40, 0);
    bool ok = true;
    for (int i = 0; i < 30; ++i) {
      q = mgs_augment(q, rng.normal_vector(CounterRng::kAudit, 10 + i, 40));
      ok = ok && q.cols() <= i + 1;
    }
    const double orth =
        (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
    check("gram-schmidt-orthonormal", ok && orth < 1e-10, fmt(orth));
  }
  {
    const Matrix a = Matrix::NullaryExpr(60, 7, [&](Eigen::Index i, Eigen::Index j) {
      return rng.normal(CounterRng::kAudit, 3000 + 100 * i + j);
    });
    const Matrix b = Matrix::NullaryExpr(7, 12, [&](Eigen::Index i, Eigen::Index j) {
      return rng.normal(CounterRng::kAudit, 9000 + 100 * i + j);
    });
    const Matrix s = a * b;  // rank 7
    const PodResult pod = pod_nonlinear(s, 4);
    const double gap = std::abs(pod.projection_error_sq - pod.tail_sq);
    check("pod-optimality", gap <= 1e-10 * s.squaredNorm(), fmt(gap));
  }
  {
    const Matrix raw = Matrix::NullaryExpr(
        mesh.n_velocity, 5, [&](Eigen::Index i, Eigen::Index j) {
          return rng.normal(CounterRng::kAudit, 20000 + 10 * i + j);
        });
    const Matrix v = svd(raw).u.leftCols(5);
    const InterpolationSelection sel = deim_select(v);
    const DeimOperator op = build_deim_operator(v, v, sel, mesh);
    double worst_interp = 0.0;
    bool bound_ok = true;
    const double pv_inv_norm =
        1.0 / svd(Matrix(v(sel.indices, Eigen::all))).sigma.minCoeff();
    for (int t = 0; t < 20; ++t) {
      const Vector f = rng.normal_vector(CounterRng::kAudit, 40000 + t, mesh.n_velocity);
      const Vector fbar = op.reconstruct(f);
      for (int idx : sel.indices) worst_interp = std::max(worst_interp, std::abs(fbar[idx] - f[idx]));
      const double lhs = (f - fbar).norm();
      const double rhs = pv_inv_norm * (f - v * (v.transpose() * f)).norm();
      bound_ok = bound_ok && lhs <= rhs * (1.0 + 1e-10);
    }
    check("interpolation-exactness", worst_interp <= 1e-10, fmt(worst_interp));
    check("interpolation-error-bound", bound_ok);
  }
  {
    Matrix a = Matrix::NullaryExpr(20, 20, [&](Eigen::Index i, Eigen::Index j) {
      return rng.normal(CounterRng::kAudit, 60000 + 100 * i + j);
    });
    a += 25.0 * Matrix::Identity(20, 20);
    const Vector b = rng.normal_vector(CounterRng::kAudit, 70000, 20);
    const DenseLuFactor exact(a);
    const BicgstabResult res = bicgstab(
        [&](const Vector& x) { return Vector(a * x); },
        [&](const Vector& x) { return exact.solve(x); }, b, 1e-9, 50);
    check("bicgstab-exact-preconditioner", res.converged && res.iterations <= 1,
          std::to_string(res.iterations) + " iterations");
  }
  {
    const Vector xi = Vector::Constant(mesh.subdomain_count(), 0.505);
    const FullState state = picard_full(mesh, ops, xi, 1e-8);
    const double mean_pressure = std::abs(ops.p_area.dot(state.p));
    const double continuity = (ops.divergence * state.u).norm();
    check("full-solve",
          state.converged && mean_pressure < 1e-10 && continuity < 1e-9,
          "mean pressure " + fmt(mean_pressure) + ", continuity " + fmt(continuity));

    const SparseCholeskyFactor laplacian(ops.enrich_laplacian);
    const Vector r = enrichment_velocity(mesh, ops, laplacian, state.p);
    const auto ratio = [&](const Vector& v) {
      const Vector d = -(ops.divergence.transpose() * state.p);
      const Vector vi = restrict_interior(mesh, v);
      const Vector di = restrict_interior(mesh, d);
      const double h1 = std::sqrt(vi.dot(ops.enrich_laplacian * vi));
      return di.dot(vi) / h1;
    };
    bool supremal = true;
    const double r_ratio = ratio(r);
    for (int t = 0; t < 20; ++t) {
      Vector v = rng.normal_vector(CounterRng::kAudit, 90000 + t, mesh.n_velocity);
      for (int node = 0; node < mesh.n_nodes; ++node) {
        if (mesh.node_on_boundary[node]) {
          v[node] = 0.0;
          v[mesh.n_nodes + node] = 0.0;
        }
      }
      supremal = supremal && r_ratio >= ratio(v) - 1e-10;
    }
    check("enrichment-supremal", supremal, fmt(r_ratio));
  }

  log << (failures == 0 ? "verify: all checks passed\n"
                        : "verify: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0;
}

}  // namespace rom
