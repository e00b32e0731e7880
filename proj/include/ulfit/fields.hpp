#pragma once

#include <memory>
#include <vector>

#include "ulfit/errors.hpp"
#include "ulfit/mesh.hpp"

namespace ulfit {

using MeshPtr = std::shared_ptr<const TriMesh>;

// Piecewise-linear nodal data.
struct ScalarField {
  MeshPtr mesh;
  std::vector<double> values;  // one per node

  ScalarField() = default;
  ScalarField(MeshPtr m, double fill = 0.0)
      : mesh(std::move(m)), values(mesh->node_count(), fill) {}
};

// Piecewise-constant per-element vector data.
struct VectorField {
  MeshPtr mesh;
  std::vector<Vec2> values;  // one per triangle

  VectorField() = default;
  explicit VectorField(MeshPtr m, Vec2 fill = {0.0, 0.0})
      : mesh(std::move(m)), values(mesh->triangle_count(), fill) {}
};

// Per-element positive conductivity with box bounds.
struct ConductivityMap {
  MeshPtr mesh;
  std::vector<double> sigma;  // one per triangle
  double sigma_low = 0.0;
  double sigma_high = 0.0;

  ConductivityMap() = default;
  ConductivityMap(MeshPtr m, double value, double lo, double hi)
      : mesh(std::move(m)), sigma(mesh->triangle_count(), value), sigma_low(lo), sigma_high(hi) {
    validate();
  }

  void validate() const {
    if (!(sigma_low > 0.0))
      throw ValidationError("ConductivityMap: sigma_low must be positive");
    if (sigma_low > sigma_high)
      throw ValidationError("ConductivityMap: sigma_low > sigma_high");
    if (sigma.size() != mesh->triangle_count())
      throw ValidationError("ConductivityMap: value count mismatch");
    for (double s : sigma)
      if (!(s >= sigma_low && s <= sigma_high))
        throw ValidationError("ConductivityMap: value outside declared bounds");
  }
};

}  // namespace ulfit
