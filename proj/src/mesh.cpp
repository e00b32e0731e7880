#include "ulfit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "ulfit/errors.hpp"

namespace ulfit {

namespace {

std::string tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::G0: return "G0";
    case BoundaryTag::G1: return "G1";
    case BoundaryTag::G2: return "G2";
  }
  return "G0";
}

BoundaryTag tag_from(const std::string& s) {
  if (s == "G0") return BoundaryTag::G0;
  if (s == "G1") return BoundaryTag::G1;
  if (s == "G2") return BoundaryTag::G2;
  throw ValidationError("mesh file: unknown boundary tag '" + s + "'");
}

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

double TriMesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec2& p0 = nodes[tri[0]];
  const Vec2& p1 = nodes[tri[1]];
  const Vec2& p2 = nodes[tri[2]];
  return 0.5 * cross(p1 - p0, p2 - p0);
}

Vec2 TriMesh::centroid(std::size_t t) const {
  const auto& tri = triangles[t];
  return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
}

double TriMesh::min_angle(std::size_t t) const {
  const auto& tri = triangles[t];
  double best = std::numeric_limits<double>::max();
  for (int k = 0; k < 3; ++k) {
    Vec2 a = nodes[tri[(k + 1) % 3]] - nodes[tri[k]];
    Vec2 b = nodes[tri[(k + 2) % 3]] - nodes[tri[k]];
    double ang = std::atan2(std::abs(cross(a, b)), dot(a, b));
    best = std::min(best, ang);
  }
  return best;
}

void TriMesh::bbox(Vec2& lo, Vec2& hi) const {
  lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec2& p : nodes) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
}

double TriMesh::max_edge_length() const {
  double best = 0.0;
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k)
      best = std::max(best, norm(nodes[tri[k]] - nodes[tri[(k + 1) % 3]]));
  return best;
}

std::vector<int> TriMesh::boundary_nodes(std::initializer_list<BoundaryTag> tags) const {
  std::set<int> found;
  for (const BoundaryEdge& e : boundary_edges)
    for (BoundaryTag t : tags)
      if (e.tag == t) {
        found.insert(e.a);
        found.insert(e.b);
      }
  return {found.begin(), found.end()};
}

std::vector<int> TriMesh::all_boundary_nodes() const {
  return boundary_nodes({BoundaryTag::G0, BoundaryTag::G1, BoundaryTag::G2});
}

void TriMesh::validate() const {
  if (nodes.empty() || triangles.empty())
    throw GeometryError("mesh: empty node or triangle list");

  const int n = static_cast<int>(nodes.size());
  Vec2 lo, hi;
  bbox(lo, hi);
  const double box_area = (hi.x - lo.x) * (hi.y - lo.y);
  const double area_floor = 1e-14 * box_area;

  std::vector<char> used(nodes.size(), 0);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int v = triangles[t][k];
      if (v < 0 || v >= n) throw GeometryError("mesh: triangle node index out of range");
      used[v] = 1;
    }
    double a = signed_area(t);
    if (a <= area_floor)
      throw GeometryError("mesh: degenerate or negatively oriented triangle " +
                          std::to_string(t) + " (area " + std::to_string(a) + ")");
  }
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i]) throw GeometryError("mesh: orphan node " + std::to_string(i));

  // every edge is interior (two triangles) or boundary (one triangle plus a
  // tagged boundary edge); boundary edges must form a single closed loop
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k) edge_use[edge_key(tri[k], tri[(k + 1) % 3])]++;

  std::set<std::pair<int, int>> bset;
  bool has_g1 = false, has_g2 = false;
  for (const BoundaryEdge& e : boundary_edges) {
    auto key = edge_key(e.a, e.b);
    if (!bset.insert(key).second) throw GeometryError("mesh: duplicate boundary edge");
    auto it = edge_use.find(key);
    if (it == edge_use.end() || it->second != 1)
      throw GeometryError("mesh: boundary edge not matching exactly one triangle");
    if (e.tag == BoundaryTag::G1) has_g1 = true;
    if (e.tag == BoundaryTag::G2) has_g2 = true;
  }
  for (const auto& [key, count] : edge_use) {
    if (count > 2) throw GeometryError("mesh: edge shared by more than two triangles");
    if (count == 1 && !bset.count(key))
      throw GeometryError("mesh: untagged boundary edge (" + std::to_string(key.first) +
                          "," + std::to_string(key.second) + ")");
  }
  if (!has_g1 || !has_g2) throw GeometryError("mesh: Gamma1 and Gamma2 must both be nonempty");

  // closed loop: every boundary node has exactly two incident boundary edges
  std::map<int, int> degree;
  for (const BoundaryEdge& e : boundary_edges) {
    degree[e.a]++;
    degree[e.b]++;
  }
  for (const auto& [node, d] : degree)
    if (d != 2)
      throw GeometryError("mesh: boundary is not a single closed loop at node " +
                          std::to_string(node));
}

TriMesh make_rect_mesh(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1 || width <= 0 || height <= 0)
    throw ValidationError("make_rect_mesh: invalid dimensions");
  TriMesh m;
  m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes.push_back({width * i / nx, height * j / ny});
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  for (int i = 0; i < nx; ++i) {
    m.boundary_edges.push_back({id(i, 0), id(i + 1, 0), BoundaryTag::G1});
    m.boundary_edges.push_back({id(i + 1, ny), id(i, ny), BoundaryTag::G2});
  }
  for (int j = 0; j < ny; ++j) {
    m.boundary_edges.push_back({id(0, j + 1), id(0, j), BoundaryTag::G0});
    m.boundary_edges.push_back({id(nx, j), id(nx, j + 1), BoundaryTag::G0});
  }
  m.validate();
  return m;
}

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  char buf[80];
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const Vec2& p : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles)
    out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "boundary " << mesh.boundary_edges.size() << "\n";
  for (const BoundaryEdge& e : mesh.boundary_edges)
    out << e.a << " " << e.b << " " << tag_name(e.tag) << "\n";
}

void write_mesh_file(const TriMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open mesh file for writing: " + path);
  write_mesh(mesh, f);
}

TriMesh read_mesh(std::istream& in) {
  TriMesh m;
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "nodes")
    throw ValidationError("mesh file: expected 'nodes N'");
  m.nodes.resize(count);
  for (auto& p : m.nodes)
    if (!(in >> p.x >> p.y)) throw ValidationError("mesh file: bad node line");
  if (!(in >> word >> count) || word != "triangles")
    throw ValidationError("mesh file: expected 'triangles M'");
  m.triangles.resize(count);
  for (auto& t : m.triangles)
    if (!(in >> t[0] >> t[1] >> t[2])) throw ValidationError("mesh file: bad triangle line");
  if (!(in >> word >> count) || word != "boundary")
    throw ValidationError("mesh file: expected 'boundary B'");
  m.boundary_edges.resize(count);
  for (auto& e : m.boundary_edges) {
    std::string tag;
    if (!(in >> e.a >> e.b >> tag)) throw ValidationError("mesh file: bad boundary line");
    e.tag = tag_from(tag);
  }
  m.validate();
  return m;
}

TriMesh read_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open mesh file: " + path);
  return read_mesh(f);
}

std::vector<std::array<int, 3>> triangle_neighbors(const TriMesh& mesh) {
  std::map<std::pair<int, int>, std::array<int, 2>> edge_tris;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      auto key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
      auto it = edge_tris.find(key);
      if (it == edge_tris.end())
        edge_tris[key] = {static_cast<int>(t), -1};
      else
        it->second[1] = static_cast<int>(t);
    }
  }
  std::vector<std::array<int, 3>> nb(mesh.triangles.size(), {-1, -1, -1});
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      auto key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
      const auto& pair = edge_tris[key];
      nb[t][k] = (pair[0] == static_cast<int>(t)) ? pair[1] : pair[0];
    }
  }
  return nb;
}

// --- red-green refinement --------------------------------------------------

RefinedMesh refine_with_lineage(const TriMesh& mesh, const std::vector<bool>& marker) {
  if (marker.size() != mesh.triangles.size())
    throw ValidationError("refine: marker length must equal triangle count");

  const std::size_t nt = mesh.triangles.size();
  bool any = false;
  for (bool b : marker) any = any || b;
  RefinedMesh out;
  if (!any) {  // unchanged copy
    out.mesh = std::make_shared<TriMesh>(mesh);
    out.parent.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) out.parent[t] = static_cast<int>(t);
    return out;
  }

  // split state per undirected edge
  std::map<std::pair<int, int>, bool> split;
  auto mark_edges = [&](std::size_t t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) split[edge_key(tri[k], tri[(k + 1) % 3])] = true;
  };
  for (std::size_t t = 0; t < nt; ++t)
    if (marker[t]) mark_edges(t);

  // closure: two split edges promote the triangle to red
  bool changed = true;
  std::vector<char> red(nt, 0);
  for (std::size_t t = 0; t < nt; ++t) red[t] = marker[t] ? 1 : 0;
  while (changed) {
    changed = false;
    for (std::size_t t = 0; t < nt; ++t) {
      if (red[t]) continue;
      const auto& tri = mesh.triangles[t];
      int n_split = 0;
      for (int k = 0; k < 3; ++k)
        if (split.count(edge_key(tri[k], tri[(k + 1) % 3]))) n_split++;
      if (n_split >= 2) {
        red[t] = 1;
        mark_edges(t);
        changed = true;
      }
    }
  }

  TriMesh fine;
  fine.nodes = mesh.nodes;
  std::map<std::pair<int, int>, int> midpoint;
  for (auto& [key, _] : split) {
    Vec2 mid = (mesh.nodes[key.first] + mesh.nodes[key.second]) * 0.5;
    midpoint[key] = static_cast<int>(fine.nodes.size());
    fine.nodes.push_back(mid);
  }

  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    int m01 = -1, m12 = -1, m20 = -1;
    auto find_mid = [&](int a, int b) {
      auto it = midpoint.find(edge_key(a, b));
      return it == midpoint.end() ? -1 : it->second;
    };
    m01 = find_mid(tri[0], tri[1]);
    m12 = find_mid(tri[1], tri[2]);
    m20 = find_mid(tri[2], tri[0]);
    int n_split = (m01 >= 0) + (m12 >= 0) + (m20 >= 0);

    auto emit = [&](int a, int b, int c) {
      fine.triangles.push_back({a, b, c});
      out.parent.push_back(static_cast<int>(t));
    };

    if (n_split == 0) {
      emit(tri[0], tri[1], tri[2]);
    } else if (n_split == 3) {  // red
      emit(tri[0], m01, m20);
      emit(m01, tri[1], m12);
      emit(m20, m12, tri[2]);
      emit(m01, m12, m20);
    } else if (n_split == 1) {  // green bisection toward the opposite vertex
      if (m01 >= 0) {
        emit(tri[0], m01, tri[2]);
        emit(m01, tri[1], tri[2]);
      } else if (m12 >= 0) {
        emit(tri[1], m12, tri[0]);
        emit(m12, tri[2], tri[0]);
      } else {
        emit(tri[2], m20, tri[1]);
        emit(m20, tri[0], tri[1]);
      }
    } else {
      throw GeometryError("refine: closure left a triangle with two split edges");
    }
  }

  for (const BoundaryEdge& e : mesh.boundary_edges) {
    auto it = midpoint.find(edge_key(e.a, e.b));
    if (it == midpoint.end()) {
      fine.boundary_edges.push_back(e);
    } else {
      fine.boundary_edges.push_back({e.a, it->second, e.tag});
      fine.boundary_edges.push_back({it->second, e.b, e.tag});
    }
  }

  fine.validate();
  out.mesh = std::make_shared<TriMesh>(std::move(fine));
  return out;
}

TriMesh refine(const TriMesh& mesh, const std::vector<bool>& marker) {
  return *refine_with_lineage(mesh, marker).mesh;
}

// --- point location ---------------------------------------------------------

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(mesh) {
  mesh.bbox(lo_, hi_);
  int target = static_cast<int>(std::sqrt(static_cast<double>(mesh.triangle_count()))) + 1;
  nx_ = std::max(1, target);
  ny_ = std::max(1, target);
  cell_w_ = (hi_.x - lo_.x) / nx_;
  cell_h_ = (hi_.y - lo_.y) / ny_;
  if (cell_w_ <= 0) cell_w_ = 1.0;
  if (cell_h_ <= 0) cell_h_ = 1.0;
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double xmin = hi_.x, xmax = lo_.x, ymin = hi_.y, ymax = lo_.y;
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = mesh.nodes[tri[k]];
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    int i0 = std::clamp(static_cast<int>((xmin - lo_.x) / cell_w_), 0, nx_ - 1);
    int i1 = std::clamp(static_cast<int>((xmax - lo_.x) / cell_w_), 0, nx_ - 1);
    int j0 = std::clamp(static_cast<int>((ymin - lo_.y) / cell_h_), 0, ny_ - 1);
    int j1 = std::clamp(static_cast<int>((ymax - lo_.y) / cell_h_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
  }
}

int PointLocator::cell_index(double x, double y) const {
  int i = std::clamp(static_cast<int>((x - lo_.x) / cell_w_), 0, nx_ - 1);
  int j = std::clamp(static_cast<int>((y - lo_.y) / cell_h_), 0, ny_ - 1);
  return j * nx_ + i;
}

int PointLocator::locate(const Vec2& p) const {
  Vec2 span = hi_ - lo_;
  const double tol = 1e-12 * std::max(span.x, span.y);
  const auto& cand = cells_[cell_index(p.x, p.y)];
  for (int t : cand) {
    const auto& tri = mesh_.triangles[t];
    const Vec2& a = mesh_.nodes[tri[0]];
    const Vec2& b = mesh_.nodes[tri[1]];
    const Vec2& c = mesh_.nodes[tri[2]];
    double area2 = cross(b - a, c - a);
    double w0 = cross(b - p, c - p);
    double w1 = cross(c - p, a - p);
    double w2 = cross(a - p, b - p);
    if (w0 >= -tol * area2 && w1 >= -tol * area2 && w2 >= -tol * area2) return t;
  }
  // fall back to the nearest centroid, first within the cell then globally
  auto nearest_in = [&](const std::vector<int>& list) {
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    for (int t : list) {
      double d = norm2(mesh_.centroid(t) - p);
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    return best;
  };
  int best = nearest_in(cand);
  if (best >= 0) return best;
  std::vector<int> all(mesh_.triangle_count());
  for (std::size_t t = 0; t < all.size(); ++t) all[t] = static_cast<int>(t);
  return nearest_in(all);
}

}  // namespace ulfit
