#pragma once

#include <iosfwd>
#include <string>

#include "rom/linalg.hpp"

namespace rom {

// Coordinate-format export for cross-checking assembled operators with
// external tools.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(const std::string& path, const SparseMatrix& m);

// Raw dense container: magic, dimensions, row-major doubles.
void save_dense(const std::string& path, const Matrix& m);
Matrix load_dense(const std::string& path);
void save_vector(const std::string& path, const Vector& v);
Vector load_vector(const std::string& path);

// Solution snapshot persisted as a binary array pair with a JSON sidecar
// carrying the parameter and solve record.
struct SolutionSnapshot {
  Vector u;
  Vector p;
  Vector xi;
  int n = 0;
  int n_d = 0;
  double residual = 0.0;
  int iterations = 0;
};

void save_solution_snapshot(const std::string& prefix, const SolutionSnapshot& snap);
SolutionSnapshot load_solution_snapshot(const std::string& prefix);

}  // namespace rom
