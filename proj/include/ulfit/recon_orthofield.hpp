#pragma once

#include <optional>
#include <vector>

#include "ulfit/assembly.hpp"
#include "ulfit/fields.hpp"

namespace ulfit {

struct OrthoConfig {
  double epsilon = 1e-3;        // viscosity weight
  int refine_rounds = 2;
  double refine_fraction = 0.2;  // fraction of triangles marked per round
  double sigma_clip_low = 0.0;
  double sigma_clip_high = 0.0;

  void validate() const;
};

struct OrthoRoundDiag {
  int round = 0;
  double eps = 0.0;
  double residual = 0.0;        // ||F . grad u_eps||_L2
  double min_current_e2 = 0.0;  // admissibility proxy: min_T D . e2
};

struct OrthoResult {
  ScalarField u_eps;            // on the final mesh
  ConductivityMap sigma_rec;    // on the final mesh
  std::vector<MeshPtr> meshes;  // refinement generations, coarsest first
  std::vector<OrthoRoundDiag> diagnostics;
  std::size_t flagged = 0;      // triangles filled by neighbour values (last round)
};

// 90-degree rotation F = (D2, -D1); F . D = 0 per triangle.
VectorField orthogonal_field(const VectorField& d);

// Well-posed relaxation of the transport problem along F:
// div[(eps I + F F^T) grad u] = 0 with u = x2 on the whole boundary.
// boundary_data, when given, replaces x2 by that field's trace (used by the
// energy-identity checks; production always uses x2).
ScalarField solve_viscosity(const VectorField& f, double eps,
                            const ScalarField* boundary_data = nullptr);

// sigma = |D|^2 / (D . grad u), clipped to [clip_low, clip_high]. Triangles
// with vanishing |D|^2 (below 1e-10 x max) or a nonpositive/vanishing
// denominator take the average of valid neighbours; more than 10% of such
// triangles rejects the data.
struct RecoverResult {
  ConductivityMap sigma;
  std::vector<bool> flagged;
  std::size_t flagged_count = 0;
};
RecoverResult recover_sigma(const VectorField& d, const ScalarField& u_eps, double clip_low,
                            double clip_high);

// Per-triangle jump indicator (sum over edges of |sigma jump| x length) and
// fraction-based marking of the largest ones.
std::vector<bool> mark_by_sigma_jump(const ConductivityMap& sigma, double fraction);

// Full loop: viscosity solve, conductivity recovery, jump-driven refinement
// (child triangles inherit the parent's D), repeated refine_rounds times.
OrthoResult adaptive_reconstruct(const VectorField& d, const OrthoConfig& cfg);

}  // namespace ulfit
