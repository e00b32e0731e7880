#pragma once

#include <string>
#include <vector>

#include "ulfit/fields.hpp"

namespace ulfit {

// Conductivity inclusions composited over a background value; the last
// shape containing a triangle's centroid wins.
struct PhantomShape {
  enum class Kind { Disk, Rect };
  Kind kind = Kind::Disk;
  Vec2 center;     // disk center / rect lower corner
  Vec2 extent;     // disk: (radius, radius); rect: upper corner
  double value = 1.0;

  bool contains(const Vec2& p) const;
};

struct PhantomSpec {
  double background = 1.0;
  double sigma_low = 0.0;
  double sigma_high = 0.0;
  std::vector<PhantomShape> shapes;
};

// Shapes must stay inside the domain with a 0.1 margin from the whole
// boundary (the measurement identity needs the source support away from the
// electrodes, and the orthogonal-field boundary data needs conductivity
// variations away from the sides).
ConductivityMap make_phantom(MeshPtr mesh, const PhantomSpec& spec);

std::vector<PhantomShape> default_phantom_shapes();

void write_sigma_csv(const ConductivityMap& sigma, const std::string& path);

}  // namespace ulfit
