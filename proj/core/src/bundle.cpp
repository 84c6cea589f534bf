#include "rom/bundle.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "rom/io.hpp"

namespace rom {
namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void save_preconditioner(const std::string& dir, const Preconditioner& p) {
  const std::string stem = "precond_" + p.name();
  save_dense(join(dir, stem + "_lu.bin"), p.factor.packed_lu());
  Vector perm(p.factor.rows());
  for (Eigen::Index i = 0; i < perm.size(); ++i) {
    perm[i] = static_cast<double>(p.factor.row_permutation()[i]);
  }
  save_vector(join(dir, stem + "_perm.bin"), perm);
  save_vector(join(dir, stem + "_anchor.bin"), p.xi_anchor);
}

Preconditioner load_preconditioner(const std::string& dir, const std::string& name) {
  Preconditioner p;
  p.variant = name.rfind("offline", 0) == 0 ? PrecondVariant::kOffline
                                            : PrecondVariant::kOnline;
  p.kind = name.find("stokes") != std::string::npos ? PrecondKind::kStokes
                                                    : PrecondKind::kNavierStokes;
  const std::string stem = "precond_" + name;
  const Matrix lu = load_dense(join(dir, stem + "_lu.bin"));
  const Vector perm = load_vector(join(dir, stem + "_perm.bin"));
  std::vector<int> per(perm.size());
  for (Eigen::Index i = 0; i < perm.size(); ++i) per[i] = static_cast<int>(perm[i]);
  p.factor = DenseLuFactor::from_parts(lu, per);
  p.xi_anchor = load_vector(join(dir, stem + "_anchor.bin"));
  return p;
}

}  // namespace

const Preconditioner* Bundle::find_preconditioner(const std::string& name) const {
  for (const auto& p : preconditioners) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

void save_bundle(const std::string& dir, const Bundle& bundle) {
  fs::create_directories(dir);

  save_dense(join(dir, "velocity_basis.bin"), bundle.basis.velocity);
  save_dense(join(dir, "pressure_basis.bin"), bundle.basis.pressure);
  save_dense(join(dir, "nonlinear_basis.bin"), bundle.deim.basis);
  save_dense(join(dir, "coeff_from_sampled.bin"), bundle.deim.coeff_from_sampled);
  save_dense(join(dir, "sampled_to_reduced.bin"), bundle.deim.sampled_to_reduced);

  for (int i = 0; i < bundle.rop.parameter_count(); ++i) {
    save_dense(join(dir, "reduced_stiffness_" + std::to_string(i) + ".bin"),
               bundle.rop.stiffness[i]);
    save_vector(join(dir, "boundary_term_" + std::to_string(i) + ".bin"),
                bundle.rop.boundary_terms[i]);
  }
  save_dense(join(dir, "reduced_divergence.bin"), bundle.rop.divergence);
  save_vector(join(dir, "reduced_forcing.bin"), bundle.rop.forcing);
  save_vector(join(dir, "continuity_rhs.bin"), bundle.rop.continuity_rhs);

  std::vector<std::string> precond_names;
  for (const auto& p : bundle.preconditioners) {
    save_preconditioner(dir, p);
    precond_names.push_back(p.name());
  }

  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["rng"] = "splitmix64-counter";
  manifest["n"] = bundle.meta.n;
  manifest["n_d"] = bundle.meta.n_d;
  manifest["m"] = bundle.meta.m;
  manifest["tau"] = bundle.meta.tau;
  manifest["delta"] = bundle.meta.delta;
  manifest["n_trial"] = bundle.meta.n_trial;
  manifest["seed"] = bundle.meta.seed;
  manifest["strategy"] = bundle.meta.strategy;
  manifest["index_method"] = bundle.meta.index_method;
  manifest["snapshot_count"] = bundle.meta.snapshot_count;
  manifest["velocity_rank"] = bundle.basis.velocity_rank();
  manifest["pressure_rank"] = bundle.basis.pressure_rank();
  manifest["rank"] = bundle.basis.rank();
  manifest["n_deim"] = bundle.meta.n_deim;
  manifest["n_g"] = bundle.meta.n_g;
  manifest["rank_cutoff"] = bundle.meta.rank_cutoff;
  manifest["full_solves"] = bundle.meta.full_solves;
  manifest["interpolation_indices"] = bundle.deim.selection.indices;
  manifest["preconditioners"] = precond_names;

  std::ofstream out(join(dir, "manifest.json"));
  if (!out) throw IoError("cannot open for writing: " + join(dir, "manifest.json"));
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + join(dir, "manifest.json"));
}

Bundle load_bundle(const std::string& dir, const Mesh& mesh) {
  std::ifstream in(join(dir, "manifest.json"));
  if (!in) throw IoError("cannot open bundle manifest in " + dir);
  nlohmann::json manifest;
  in >> manifest;

  Bundle bundle;
  bundle.meta.n = manifest.at("n").get<int>();
  bundle.meta.n_d = manifest.at("n_d").get<int>();
  bundle.meta.m = manifest.at("m").get<int>();
  bundle.meta.tau = manifest.at("tau").get<double>();
  bundle.meta.delta = manifest.at("delta").get<double>();
  bundle.meta.n_trial = manifest.at("n_trial").get<int>();
  bundle.meta.seed = manifest.at("seed").get<std::uint64_t>();
  bundle.meta.strategy = manifest.at("strategy").get<std::string>();
  bundle.meta.index_method = manifest.at("index_method").get<std::string>();
  bundle.meta.snapshot_count = manifest.at("snapshot_count").get<int>();
  bundle.meta.n_deim = manifest.at("n_deim").get<int>();
  bundle.meta.n_g = manifest.at("n_g").get<int>();
  bundle.meta.rank_cutoff = manifest.at("rank_cutoff").get<double>();
  bundle.meta.full_solves = manifest.at("full_solves").get<int>();

  if (bundle.meta.n != mesh.n || bundle.meta.n_d != mesh.n_d) {
    throw ConfigError("bundle was built for a different grid (n=" +
                      std::to_string(bundle.meta.n) + ", n_d=" +
                      std::to_string(bundle.meta.n_d) + ")");
  }

  bundle.basis.velocity = load_dense(join(dir, "velocity_basis.bin"));
  bundle.basis.pressure = load_dense(join(dir, "pressure_basis.bin"));
  bundle.basis.snapshot_count = bundle.meta.snapshot_count;

  bundle.rop.ku = bundle.basis.velocity_rank();
  bundle.rop.kp = bundle.basis.pressure_rank();
  for (int i = 0; i < bundle.meta.m; ++i) {
    bundle.rop.stiffness.push_back(
        load_dense(join(dir, "reduced_stiffness_" + std::to_string(i) + ".bin")));
    bundle.rop.boundary_terms.push_back(
        load_vector(join(dir, "boundary_term_" + std::to_string(i) + ".bin")));
  }
  bundle.rop.divergence = load_dense(join(dir, "reduced_divergence.bin"));
  bundle.rop.forcing = load_vector(join(dir, "reduced_forcing.bin"));
  bundle.rop.continuity_rhs = load_vector(join(dir, "continuity_rhs.bin"));

  bundle.deim.basis = load_dense(join(dir, "nonlinear_basis.bin"));
  bundle.deim.coeff_from_sampled = load_dense(join(dir, "coeff_from_sampled.bin"));
  bundle.deim.sampled_to_reduced = load_dense(join(dir, "sampled_to_reduced.bin"));
  bundle.deim.selection.indices =
      manifest.at("interpolation_indices").get<std::vector<int>>();
  bundle.deim.selection.method = bundle.meta.index_method == "gappy"
                                     ? IndexMethod::kGappy
                                     : IndexMethod::kDeim;
  bundle.deim.sample = build_sample_mesh(mesh, bundle.deim.selection.indices);

  for (const auto& name :
       manifest.at("preconditioners").get<std::vector<std::string>>()) {
    bundle.preconditioners.push_back(load_preconditioner(dir, name));
  }
  return bundle;
}

}  // namespace rom
