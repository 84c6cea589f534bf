#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rom/deim.hpp"
#include "rom/online.hpp"
#include "rom/reduced_ops.hpp"

namespace rom {

// Everything the online stage needs, persisted as one directory: the bases,
// the hyper-reduction operator, the reduced affine blocks, the factored
// offline preconditioners, and a JSON manifest describing the build.
struct BundleMeta {
  int n = 0;
  int n_d = 0;
  int m = 0;
  double tau = 0.0;
  double delta = 0.0;
  int n_trial = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  std::string index_method;
  int snapshot_count = 0;
  int n_deim = 0;
  int n_g = 0;
  double rank_cutoff = 0.0;
  int full_solves = 0;
};

struct Bundle {
  BundleMeta meta;
  ReducedBasis basis;
  AffineReducedOperator rop;
  DeimOperator deim;
  std::vector<Preconditioner> preconditioners;  // offline variants

  const Preconditioner* find_preconditioner(const std::string& name) const;
};

void save_bundle(const std::string& dir, const Bundle& bundle);
Bundle load_bundle(const std::string& dir, const Mesh& mesh);

}  // namespace rom
