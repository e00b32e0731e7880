#include <doctest.h>

#include <cstring>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ulfit/errors.hpp"
#include "ulfit/mesh.hpp"

using namespace ulfit;

namespace {

// independent conformity audit: every undirected edge belongs to exactly two
// triangles, or to one triangle and one tagged boundary edge
void audit_conformity(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> use;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) use[key(tri[k], tri[(k + 1) % 3])]++;
  std::set<std::pair<int, int>> boundary;
  for (const auto& e : mesh.boundary_edges) boundary.insert(key(e.a, e.b));
  for (const auto& [edge, count] : use) {
    if (count == 2) {
      CHECK(!boundary.count(edge));
    } else {
      CHECK(count == 1);
      CHECK(boundary.count(edge));
    }
  }
}

}  // namespace

TEST_CASE("rect mesh satisfies every invariant") {
  TriMesh mesh = make_rect_mesh(8, 4, 2.0, 1.0);
  CHECK(mesh.node_count() == 9 * 5);
  CHECK(mesh.triangle_count() == 8 * 4 * 2);
  mesh.validate();
  audit_conformity(mesh);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) CHECK(mesh.signed_area(t) > 0);
  CHECK(!mesh.boundary_nodes({BoundaryTag::G1}).empty());
  CHECK(!mesh.boundary_nodes({BoundaryTag::G2}).empty());
}

TEST_CASE("validate rejects broken meshes") {
  TriMesh mesh = make_rect_mesh(2, 2, 1.0, 1.0);

  SUBCASE("flipped triangle") {
    std::swap(mesh.triangles[0][1], mesh.triangles[0][2]);
    CHECK_THROWS_AS(mesh.validate(), GeometryError);
  }
  SUBCASE("orphan node") {
    mesh.nodes.push_back({0.5, 0.5});
    CHECK_THROWS_AS(mesh.validate(), GeometryError);
  }
  SUBCASE("missing electrode tag") {
    for (auto& e : mesh.boundary_edges)
      if (e.tag == BoundaryTag::G2) e.tag = BoundaryTag::G0;
    CHECK_THROWS_AS(mesh.validate(), GeometryError);
  }
  SUBCASE("degenerate triangle") {
    // collapse one interior node onto a neighbour
    TriMesh bad = mesh;
    bad.nodes[4] = bad.nodes[3];
    CHECK_THROWS_AS(bad.validate(), GeometryError);
  }
}

TEST_CASE("mesh file writer and parser round-trip exactly") {
  TriMesh mesh = make_rect_mesh(5, 3, 2.0, 1.0);
  // stress the formatter with non-representable decimals
  for (auto& p : mesh.nodes) {
    p.x *= 1.0 / 3.0;
    p.y *= 0.1234567890123456789;
  }
  std::ostringstream out;
  write_mesh(mesh, out);
  std::istringstream in(out.str());
  TriMesh back = read_mesh(in);

  REQUIRE(back.node_count() == mesh.node_count());
  REQUIRE(back.triangle_count() == mesh.triangle_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    // bit-exact round trip
    CHECK(std::memcmp(&back.nodes[i].x, &mesh.nodes[i].x, sizeof(double)) == 0);
    CHECK(std::memcmp(&back.nodes[i].y, &mesh.nodes[i].y, sizeof(double)) == 0);
  }
  CHECK(back.triangles == mesh.triangles);
  REQUIRE(back.boundary_edges.size() == mesh.boundary_edges.size());
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    CHECK(back.boundary_edges[i].a == mesh.boundary_edges[i].a);
    CHECK(back.boundary_edges[i].b == mesh.boundary_edges[i].b);
    CHECK(back.boundary_edges[i].tag == mesh.boundary_edges[i].tag);
  }
}

TEST_CASE("refine: no marks leaves the mesh unchanged") {
  TriMesh mesh = make_rect_mesh(4, 2, 2.0, 1.0);
  std::vector<bool> marker(mesh.triangle_count(), false);
  TriMesh out = refine(mesh, marker);
  CHECK(out.node_count() == mesh.node_count());
  CHECK(out.triangle_count() == mesh.triangle_count());
}

TEST_CASE("refine: uniform red refinement quadruples the triangle count") {
  TriMesh mesh = make_rect_mesh(4, 2, 2.0, 1.0);
  std::vector<bool> marker(mesh.triangle_count(), true);
  TriMesh out = refine(mesh, marker);
  CHECK(out.triangle_count() == 4 * mesh.triangle_count());
  out.validate();
  audit_conformity(out);

  // red children keep the parent's minimum angle (similar triangles)
  double parent_min = mesh.min_angle(0);
  for (std::size_t t = 0; t < out.triangle_count(); ++t)
    CHECK(out.min_angle(t) >= 0.5 * parent_min - 1e-12);
}

TEST_CASE("refine: single mark stays conforming") {
  TriMesh mesh = make_rect_mesh(6, 3, 2.0, 1.0);
  std::vector<bool> marker(mesh.triangle_count(), false);
  marker[7] = true;
  RefinedMesh out = refine_with_lineage(mesh, marker);
  out.mesh->validate();
  audit_conformity(*out.mesh);
  CHECK(out.mesh->triangle_count() > mesh.triangle_count());
  // lineage maps every child to a valid parent
  for (int p : out.parent) {
    CHECK(p >= 0);
    CHECK(p < static_cast<int>(mesh.triangle_count()));
  }
}

TEST_CASE("refine: boundary tags are inherited") {
  TriMesh mesh = make_rect_mesh(3, 2, 2.0, 1.0);
  std::vector<bool> marker(mesh.triangle_count(), true);
  TriMesh out = refine(mesh, marker);
  auto count_tag = [](const TriMesh& m, BoundaryTag tag) {
    int n = 0;
    for (const auto& e : m.boundary_edges)
      if (e.tag == tag) ++n;
    return n;
  };
  CHECK(count_tag(out, BoundaryTag::G1) == 2 * count_tag(mesh, BoundaryTag::G1));
  CHECK(count_tag(out, BoundaryTag::G2) == 2 * count_tag(mesh, BoundaryTag::G2));
  CHECK(count_tag(out, BoundaryTag::G0) == 2 * count_tag(mesh, BoundaryTag::G0));
}

TEST_CASE("point locator finds containing triangles") {
  TriMesh mesh = make_rect_mesh(20, 10, 2.0, 1.0);
  PointLocator loc(mesh);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, 2.0), uy(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec2 p{ux(rng), uy(rng)};
    int t = loc.locate(p);
    REQUIRE(t >= 0);
    const auto& tri = mesh.triangles[t];
    const Vec2 &a = mesh.nodes[tri[0]], &b = mesh.nodes[tri[1]], &c = mesh.nodes[tri[2]];
    double area2 = cross(b - a, c - a);
    CHECK(cross(b - p, c - p) >= -1e-9 * area2);
    CHECK(cross(c - p, a - p) >= -1e-9 * area2);
    CHECK(cross(a - p, b - p) >= -1e-9 * area2);
  }
  // outside points snap to a nearby triangle
  CHECK(loc.locate({-0.5, 0.5}) >= 0);
}
