#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "adapttikh/mesh.hpp"
#include "doctest.h"

using namespace adapttikh;

TEST_CASE("disk mesh: fan construction counts") {
  const auto mesh = make_disk_mesh(4, 1.0, 0);
  CHECK(mesh->num_vertices() == 5);
  CHECK(mesh->num_triangles() == 4);
  int boundary_edges = 0;
  for (const auto& e : mesh->edges) boundary_edges += e.boundary ? 1 : 0;
  CHECK(boundary_edges == 4);
  mesh->validate();
}

TEST_CASE("disk mesh: uniform refinement quadruples the element count") {
  const auto mesh = make_disk_mesh(6, 1.0, 1);
  CHECK(mesh->num_triangles() == 24);
  mesh->validate();
}

TEST_CASE("disk mesh: polygon area approaches pi") {
  const auto mesh = make_disk_mesh(64, 1.0, 0);
  const double exact = 32.0 * std::sin(2.0 * std::numbers::pi / 64.0);
  CHECK(mesh->total_area() == doctest::Approx(exact).epsilon(1e-12));
  CHECK(std::abs(mesh->total_area() - std::numbers::pi) / std::numbers::pi < 0.002);
}

TEST_CASE("disk mesh: invalid arguments") {
  CHECK_THROWS_AS(make_disk_mesh(2, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_disk_mesh(8, -1.0, 0), std::invalid_argument);
}

TEST_CASE("refine: empty mark set returns an identical mesh") {
  const auto mesh = make_disk_mesh(8, 1.0, 1);
  const auto refined = refine(*mesh, {});
  CHECK(refined.mesh->num_triangles() == mesh->num_triangles());
  CHECK(refined.mesh->num_vertices() == mesh->num_vertices());
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    CHECK(refined.mesh->triangles[t] == mesh->triangles[t]);
    CHECK(refined.parent[t] == t);
  }
}

TEST_CASE("refine: marking everything at least doubles the element count") {
  const auto mesh = make_disk_mesh(6, 1.0, 1);
  std::vector<int> all(mesh->num_triangles());
  for (int t = 0; t < mesh->num_triangles(); ++t) all[t] = t;
  const auto refined = refine(*mesh, all);
  CHECK(refined.mesh->num_triangles() >= 2 * mesh->num_triangles());
  refined.mesh->validate();
}

TEST_CASE("refine: unknown triangle id is rejected") {
  const auto mesh = make_disk_mesh(4, 1.0, 0);
  std::vector<int> bad{mesh->num_triangles()};
  CHECK_THROWS_AS(refine(*mesh, bad), std::invalid_argument);
}

TEST_CASE("refine: conforming closure on a two-triangle square") {
  // Unit square split along the diagonal; the diagonal is the refinement
  // edge of both triangles (longest edge), so bisecting one bisects the
  // neighbor too and no hanging node appears.
  const auto mesh = Mesh::build({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                {{0, 1, 2}, {0, 2, 3}});
  const auto refined = refine(*mesh, std::vector<int>{0});
  refined.mesh->validate();
  CHECK(refined.mesh->num_triangles() == 4);
  CHECK(refined.mesh->num_vertices() == 5);
  for (const auto& e : refined.mesh->edges)
    CHECK((e.boundary ? e.tri[1] == -1 : e.tri[1] >= 0));
}

TEST_CASE("refinement conserves area and keeps shape regularity") {
  auto mesh = make_disk_mesh(8, 1.0, 0);
  const double area0 = mesh->total_area();
  const double min_angle0 = mesh->min_angle();
  std::mt19937_64 rng(7);
  for (int round = 0; round < 10; ++round) {
    std::vector<int> marked;
    for (int t = 0; t < mesh->num_triangles(); ++t)
      if (rng() % 3 == 0) marked.push_back(t);
    mesh = refine(*mesh, marked).mesh;
    mesh->validate();
    CHECK(mesh->total_area() == doctest::Approx(area0).epsilon(1e-12));
    CHECK(mesh->min_angle() >= 0.5 * min_angle0 - 1e-12);
  }
}

TEST_CASE("subdomain masks are inherited by children") {
  auto base = make_disk_mesh(4, 1.0, 0);
  std::vector<std::uint8_t> mc(base->num_triangles(), 0), mo(base->num_triangles(), 1);
  mc[1] = 1;
  const auto mesh = Mesh::build(base->vertices, base->triangles, mc, mo);
  const auto refined = uniform_refine(*mesh);
  for (int t = 0; t < refined.mesh->num_triangles(); ++t) {
    CHECK(static_cast<int>(refined.mesh->in_omega_c[t]) ==
          static_cast<int>(mesh->in_omega_c[refined.parent[t]]));
    CHECK(refined.mesh->in_omega_o[t] == 1);
  }
}

TEST_CASE("edge jumps of P1 functions") {
  const auto mesh = Mesh::build({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                {{0, 1, 2}, {0, 2, 3}});
  int diag = -1;
  for (int e = 0; e < static_cast<int>(mesh->edges.size()); ++e)
    if (!mesh->edges[e].boundary) diag = e;
  REQUIRE(diag >= 0);

  SUBCASE("globally affine functions have zero jumps everywhere") {
    std::vector<double> f(4);
    for (int v = 0; v < 4; ++v)
      f[v] = 2.0 + 3.0 * mesh->vertices[v].x - 1.5 * mesh->vertices[v].y;
    for (int e = 0; e < static_cast<int>(mesh->edges.size()); ++e)
      CHECK(edge_jump_normal_gradient(*mesh, f, e) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("hat function jump equals the difference of the normal derivatives") {
    // Hat of vertex 1 across the diagonal (0,0)-(1,1): gradient (1,-1) on
    // triangle (0,1,2), zero on the other. The outward normal of the
    // lower-indexed triangle is (-1,1)/sqrt(2), so the jump is -sqrt(2).
    std::vector<double> f{0.0, 1.0, 0.0, 0.0};
    const double jump = edge_jump_normal_gradient(*mesh, f, diag);
    CHECK(jump == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-13));
    // scaling the function scales the jump
    std::vector<double> f3{0.0, 3.0, 0.0, 0.0};
    CHECK(edge_jump_normal_gradient(*mesh, f3, diag) ==
          doctest::Approx(3.0 * jump).epsilon(1e-13));
  }

  SUBCASE("boundary edges return zero by convention") {
    std::vector<double> f{1.0, 0.0, 2.0, 0.5};
    for (int e = 0; e < static_cast<int>(mesh->edges.size()); ++e)
      if (mesh->edges[e].boundary)
        CHECK(edge_jump_normal_gradient(*mesh, f, e) == 0.0);
  }
}

TEST_CASE("mesh text format round-trips") {
  const auto mesh = make_disk_mesh(12, 1.0, 1);
  std::stringstream ss;
  write_mesh_stream(*mesh, ss);
  const auto back = read_mesh_stream(ss);
  REQUIRE(back->num_vertices() == mesh->num_vertices());
  REQUIRE(back->num_triangles() == mesh->num_triangles());
  for (int v = 0; v < mesh->num_vertices(); ++v) {
    CHECK(back->vertices[v].x == mesh->vertices[v].x);  // bit-exact
    CHECK(back->vertices[v].y == mesh->vertices[v].y);
    CHECK(back->boundary_vertex[v] == mesh->boundary_vertex[v]);
  }
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    CHECK(back->triangles[t] == mesh->triangles[t]);
    CHECK(back->in_omega_c[t] == mesh->in_omega_c[t]);
    CHECK(back->in_omega_o[t] == mesh->in_omega_o[t]);
  }

  const std::string path = (std::filesystem::temp_directory_path() /
                            "adapttikh_mesh_roundtrip.txt").string();
  write_mesh(*mesh, path);
  const auto from_file = read_mesh(path);
  CHECK(from_file->num_vertices() == mesh->num_vertices());
  for (int v = 0; v < mesh->num_vertices(); ++v)
    CHECK(from_file->vertices[v].x == mesh->vertices[v].x);
  std::filesystem::remove(path);
}

TEST_CASE("refinement numbering is deterministic") {
  const auto a = make_disk_mesh(8, 1.0, 2);
  const auto b = make_disk_mesh(8, 1.0, 2);
  CHECK(a->triangles == b->triangles);
  std::vector<int> marked{0, 5, 7};
  const auto ra = refine(*a, marked), rb = refine(*b, marked);
  CHECK(ra.mesh->triangles == rb.mesh->triangles);
  CHECK(ra.parent == rb.parent);
}
