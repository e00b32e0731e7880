#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ulfit/vec2.hpp"

namespace ulfit {

// Boundary parts: G1 and G2 carry the electrodes, G0 is the insulated rest.
enum class BoundaryTag { G0, G1, G2 };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::G0;
};

// Conforming 2D triangulation with tagged boundary. Triangles are
// counterclockwise node triples; boundary edges form one closed loop around
// the domain. Instances are immutable after validate(); all queries are
// const and safe for concurrent readers.
struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  double signed_area(std::size_t t) const;
  Vec2 centroid(std::size_t t) const;
  double min_angle(std::size_t t) const;
  // bounding box of all nodes
  void bbox(Vec2& lo, Vec2& hi) const;
  // longest edge over all triangles
  double max_edge_length() const;

  // node indices that lie on boundary edges with any of the given tags
  std::vector<int> boundary_nodes(std::initializer_list<BoundaryTag> tags) const;
  std::vector<int> all_boundary_nodes() const;

  // Checks every TriMesh invariant; throws GeometryError on the first
  // violation. Degenerate triangles are those with signed area below
  // 1e-14 x bounding-box area.
  void validate() const;
};

// Structured mesh of ]0,width[ x ]0,height[, nx-by-ny cells split into two
// triangles each. Bottom edge tagged G1, top G2, sides G0.
TriMesh make_rect_mesh(int nx, int ny, double width, double height);

// --- text file format ----------------------------------------------------
// nodes N          followed by N lines "x y"
// triangles M      followed by M lines "i j k"   (0-based, CCW)
// boundary B       followed by B lines "i j TAG" (TAG in {G0,G1,G2})
// Coordinates are printed with 17 significant digits so that
// write -> read round-trips doubles exactly.
void write_mesh(const TriMesh& mesh, std::ostream& out);
void write_mesh_file(const TriMesh& mesh, const std::string& path);
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh_file(const std::string& path);

// --- refinement -----------------------------------------------------------
// Red-green refinement: marked triangles are split into four similar
// children (red); the closure promotes any triangle with two split edges to
// red and bisects triangles with exactly one split edge (green). Boundary
// tags are inherited by child edges. Red children preserve the parent's
// angles; green bisection may halve them, so repeatedly refining green
// children degrades quality (acceptable for the couple of rounds used here).
struct RefinedMesh {
  std::shared_ptr<TriMesh> mesh;
  std::vector<int> parent;  // parent[child_tri] = index in the input mesh
};

RefinedMesh refine_with_lineage(const TriMesh& mesh, const std::vector<bool>& marker);
TriMesh refine(const TriMesh& mesh, const std::vector<bool>& marker);

// triangle index sharing each edge; -1 where there is no neighbour
// (boundary). neighbors[t][k] is the triangle across the edge opposite to
// local vertex k.
std::vector<std::array<int, 3>> triangle_neighbors(const TriMesh& mesh);

// Point location by uniform background grid over the mesh bounding box.
class PointLocator {
public:
  explicit PointLocator(const TriMesh& mesh);

  // Triangle containing p (barycentric tolerance 1e-12 x scale); if p lies
  // outside the mesh, the triangle with the nearest centroid is returned.
  int locate(const Vec2& p) const;

private:
  const TriMesh& mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double cell_w_ = 1.0, cell_h_ = 1.0;
  std::vector<std::vector<int>> cells_;

  int cell_index(double x, double y) const;
};

}  // namespace ulfit
