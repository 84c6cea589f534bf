#include <doctest.h>

#include <set>

#include "rom/assembly.hpp"
#include "rom/mesh.hpp"

using namespace rom;

TEST_CASE("grid sizes follow the biquadratic macroelement layout") {
  const Mesh m32 = build_mesh(GridSpec{32, 2});
  CHECK(m32.n_nodes == 33 * 33);
  CHECK(m32.n_nodes == 1089);
  CHECK(m32.n_pressure == 768);
  CHECK(m32.n_elements == 256);
  CHECK(m32.n_vel_interior == 2 * 31 * 31);

  const Mesh tiny = build_mesh(GridSpec{2, 1});
  CHECK(tiny.n_elements == 1);
  CHECK(tiny.n_nodes == 9);
  CHECK(tiny.n_pressure == 3);
}

TEST_CASE("invalid grid specs are rejected") {
  CHECK_THROWS_AS(build_mesh(GridSpec{0, 1}), ConfigError);
  CHECK_THROWS_AS(build_mesh(GridSpec{7, 1}), ConfigError);   // odd
  CHECK_THROWS_AS(build_mesh(GridSpec{32, 3}), ConfigError);  // 3 does not divide 32
  CHECK_THROWS_AS(build_mesh(GridSpec{8, 0}), ConfigError);
}

TEST_CASE("node numbering is lexicographic with x fastest") {
  const Mesh mesh = build_mesh(GridSpec{4, 2});
  const int s = mesh.nodes_per_side;
  for (int iy = 0; iy < s; ++iy) {
    for (int ix = 0; ix < s; ++ix) {
      const int node = iy * s + ix;
      CHECK(mesh.node_x[node] == doctest::Approx(-1.0 + ix * mesh.h));
      CHECK(mesh.node_y[node] == doctest::Approx(-1.0 + iy * mesh.h));
    }
  }
  // Element nodes are local-lexicographic over a 2x2 cell patch.
  CHECK(mesh.element_nodes[0][0] == 0);
  CHECK(mesh.element_nodes[0][2] == 2);
  CHECK(mesh.element_nodes[0][8] == 2 * s + 2);
}

TEST_CASE("every element carries exactly one subdomain tag") {
  const Mesh mesh = build_mesh(GridSpec{8, 2});
  std::set<int> seen;
  for (int e = 0; e < mesh.n_elements; ++e) {
    CHECK(mesh.element_subdomain[e] >= 0);
    CHECK(mesh.element_subdomain[e] < 4);
    seen.insert(mesh.element_subdomain[e]);
  }
  CHECK(seen.size() == 4);
  // n=4, n_d=2: one element per subdomain, lexicographic.
  const Mesh four = build_mesh(GridSpec{4, 2});
  CHECK(four.element_subdomain == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("sample mesh covers requested rows with the touching elements") {
  const Mesh mesh = build_mesh(GridSpec{8, 2});

  SUBCASE("empty request gives an empty element set") {
    CHECK(build_sample_mesh(mesh, {}).elements.empty());
  }

  SUBCASE("all dofs require all elements") {
    std::vector<int> all(mesh.n_velocity);
    for (int i = 0; i < mesh.n_velocity; ++i) all[i] = i;
    CHECK(build_sample_mesh(mesh, all).elements.size() ==
          static_cast<std::size_t>(mesh.n_elements));
  }

  SUBCASE("an interior element-corner node touches four elements") {
    const int node = 2 * mesh.nodes_per_side + 2;  // (ix,iy)=(2,2), corner of 4 elements
    const SampleMesh sample = build_sample_mesh(mesh, {node});
    CHECK(sample.elements.size() == 4);
    // Brute-force adjacency oracle.
    std::set<int> oracle;
    for (int e = 0; e < mesh.n_elements; ++e) {
      for (int l = 0; l < 9; ++l) {
        if (mesh.element_nodes[e][l] == node) oracle.insert(e);
      }
    }
    CHECK(std::set<int>(sample.elements.begin(), sample.elements.end()) == oracle);
  }

  SUBCASE("element-center nodes touch exactly one element") {
    const int node = mesh.nodes_per_side + 1;  // (1,1), center of element 0
    CHECK(build_sample_mesh(mesh, {node}).elements == std::vector<int>{0});
  }

  SUBCASE("size is bounded by four elements per index") {
    const Mesh big = build_mesh(GridSpec{32, 2});
    std::vector<int> rows;
    for (int i = 0; i < 102; ++i) rows.push_back((i * 37) % big.n_velocity);
    const SampleMesh sample = build_sample_mesh(big, rows);
    CHECK(sample.elements.size() <= 102 * 4);
  }

  SUBCASE("out-of-range dofs are rejected") {
    CHECK_THROWS_AS(build_sample_mesh(mesh, {mesh.n_velocity}), ConfigError);
  }
}
