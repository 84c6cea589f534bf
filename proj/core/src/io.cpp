#include "rom/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rom {
namespace {

constexpr char kMagic[8] = {'R', 'O', 'M', 'B', 'I', 'N', '1', '\n'};

void write_exact(std::ofstream& out, const void* data, std::size_t bytes,
                 const std::string& path) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw IoError("write failed: " + path);
}

void read_exact(std::ifstream& in, void* data, std::size_t bytes,
                const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed or truncated: " + path);
}

}  // namespace

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  char buf[64];
  for (int row = 0; row < m.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n",
                    static_cast<long>(it.row() + 1), static_cast<long>(it.col() + 1),
                    it.value());
      out << buf;
    }
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_matrix_market(out, m);
  if (!out) throw IoError("write failed: " + path);
}

void save_dense(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_exact(out, kMagic, sizeof(kMagic), path);
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  write_exact(out, dims, sizeof(dims), path);
  // Row-major payload, independent of the in-memory layout.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      write_exact(out, &v, sizeof(v), path);
    }
  }
}

Matrix load_dense(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  read_exact(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("bad file magic: " + path);
  }
  std::int64_t dims[2];
  read_exact(in, dims, sizeof(dims), path);
  if (dims[0] < 0 || dims[1] < 0) throw IoError("bad dimensions: " + path);
  Matrix m(dims[0], dims[1]);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v;
      read_exact(in, &v, sizeof(v), path);
      m(i, j) = v;
    }
  }
  return m;
}

void save_vector(const std::string& path, const Vector& v) {
  save_dense(path, Matrix(v));
}

Vector load_vector(const std::string& path) {
  const Matrix m = load_dense(path);
  if (m.cols() != 1) throw IoError("expected a single column: " + path);
  return Vector(m.col(0));
}

void save_solution_snapshot(const std::string& prefix, const SolutionSnapshot& snap) {
  Matrix packed(snap.u.size() + snap.p.size(), 1);
  packed.col(0).head(snap.u.size()) = snap.u;
  packed.col(0).tail(snap.p.size()) = snap.p;
  save_dense(prefix + ".bin", packed);

  nlohmann::json sidecar;
  sidecar["data"] = prefix.substr(prefix.find_last_of('/') + 1) + ".bin";
  sidecar["n"] = snap.n;
  sidecar["n_d"] = snap.n_d;
  sidecar["xi"] = std::vector<double>(snap.xi.data(), snap.xi.data() + snap.xi.size());
  sidecar["residual"] = snap.residual;
  sidecar["iterations"] = snap.iterations;
  sidecar["u_size"] = snap.u.size();
  sidecar["p_size"] = snap.p.size();
  std::ofstream out(prefix + ".json");
  if (!out) throw IoError("cannot open for writing: " + prefix + ".json");
  out << sidecar.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + prefix + ".json");
}

SolutionSnapshot load_solution_snapshot(const std::string& prefix) {
  std::ifstream in(prefix + ".json");
  if (!in) throw IoError("cannot open: " + prefix + ".json");
  nlohmann::json sidecar;
  in >> sidecar;

  SolutionSnapshot snap;
  snap.n = sidecar.at("n").get<int>();
  snap.n_d = sidecar.at("n_d").get<int>();
  snap.residual = sidecar.at("residual").get<double>();
  snap.iterations = sidecar.at("iterations").get<int>();
  const auto xi = sidecar.at("xi").get<std::vector<double>>();
  snap.xi = Eigen::Map<const Vector>(xi.data(), static_cast<Eigen::Index>(xi.size()));
  const auto u_size = sidecar.at("u_size").get<Eigen::Index>();
  const auto p_size = sidecar.at("p_size").get<Eigen::Index>();

  const Matrix packed = load_dense(prefix + ".bin");
  if (packed.rows() != u_size + p_size || packed.cols() != 1) {
    throw IoError("snapshot payload does not match sidecar: " + prefix);
  }
  snap.u = packed.col(0).head(u_size);
  snap.p = packed.col(0).tail(p_size);
  return snap;
}

}  // namespace rom
