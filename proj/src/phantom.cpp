#include "ulfit/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ulfit/errors.hpp"

namespace ulfit {

bool PhantomShape::contains(const Vec2& p) const {
  if (kind == Kind::Disk) return norm2(p - center) <= extent.x * extent.x;
  return p.x >= center.x && p.x <= extent.x && p.y >= center.y && p.y <= extent.y;
}

namespace {

constexpr double kBoundaryMargin = 0.1;

void check_margin(const PhantomShape& s, const Vec2& lo, const Vec2& hi) {
  double x0, x1, y0, y1;
  if (s.kind == PhantomShape::Kind::Disk) {
    x0 = s.center.x - s.extent.x;
    x1 = s.center.x + s.extent.x;
    y0 = s.center.y - s.extent.x;
    y1 = s.center.y + s.extent.x;
  } else {
    if (!(s.center.x < s.extent.x && s.center.y < s.extent.y))
      throw ValidationError("phantom: rectangle corners out of order");
    x0 = s.center.x;
    x1 = s.extent.x;
    y0 = s.center.y;
    y1 = s.extent.y;
  }
  if (y0 < lo.y + kBoundaryMargin || y1 > hi.y - kBoundaryMargin)
    throw ValidationError("phantom: shape within 0.1 of an electrode");
  if (x0 < lo.x + kBoundaryMargin || x1 > hi.x - kBoundaryMargin)
    throw ValidationError("phantom: shape within 0.1 of the boundary");
}

}  // namespace

ConductivityMap make_phantom(MeshPtr mesh, const PhantomSpec& spec) {
  if (!(spec.sigma_low > 0 && spec.sigma_low <= spec.sigma_high))
    throw ValidationError("phantom: bad sigma bounds");
  if (spec.background < spec.sigma_low || spec.background > spec.sigma_high)
    throw ValidationError("phantom: background outside sigma bounds");
  Vec2 lo, hi;
  mesh->bbox(lo, hi);
  for (const PhantomShape& s : spec.shapes) {
    if (s.value < spec.sigma_low || s.value > spec.sigma_high)
      throw ValidationError("phantom: shape value outside sigma bounds");
    check_margin(s, lo, hi);
  }

  ConductivityMap map;
  map.mesh = mesh;
  map.sigma_low = spec.sigma_low;
  map.sigma_high = spec.sigma_high;
  map.sigma.assign(mesh->triangle_count(), spec.background);
  for (std::size_t t = 0; t < mesh->triangle_count(); ++t) {
    Vec2 c = mesh->centroid(t);
    for (const PhantomShape& s : spec.shapes)  // last shape wins
      if (s.contains(c)) map.sigma[t] = s.value;
  }
  map.validate();
  return map;
}

std::vector<PhantomShape> default_phantom_shapes() {
  // multi-inclusion layout with contrasts between 1 and 8
  return {
      {PhantomShape::Kind::Disk, {0.55, 0.48}, {0.22, 0.22}, 8.0},
      {PhantomShape::Kind::Rect, {1.05, 0.22}, {1.55, 0.52}, 4.0},
      {PhantomShape::Kind::Disk, {1.50, 0.72}, {0.12, 0.12}, 2.0},
  };
}

void write_sigma_csv(const ConductivityMap& sigma, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open sigma csv for writing: " + path);
  f << "tri_id,sigma\n";
  char buf[64];
  for (std::size_t t = 0; t < sigma.sigma.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", t, sigma.sigma[t]);
    f << buf;
  }
}

}  // namespace ulfit
