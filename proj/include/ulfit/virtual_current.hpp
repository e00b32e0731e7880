#pragma once

#include <array>
#include <string>
#include <vector>

#include "ulfit/fields.hpp"
#include "ulfit/forward.hpp"
#include "ulfit/pulse.hpp"
#include "ulfit/wiener.hpp"

namespace ulfit {

// Per-direction data on the reconstruction mesh: psi(x) is the deconvolved
// beam profile of the pulse whose axis passes nearest to x, evaluated at the
// node's axial distance; gamma(x) = (int A dr) tau(xi) is the known weight
// vector the data approximately projects the current onto.
struct DirectionalData {
  MeshPtr mesh;
  Vec2 xi;
  std::vector<double> psi;      // per node
  std::vector<Vec2> gamma;      // per node, parallel to tau(xi)
  std::vector<bool> coverage;   // per node: inside some beam footprint
  std::size_t ambiguous = 0;    // nodes dropped by the exclusivity check
};

// Stacked per-node 2x2 systems Gamma V = Psi for one direction pair.
struct GammaSystem {
  Vec2 xi1, xi2;
  std::vector<std::array<double, 4>> gamma_rows;  // row-major [g1^T; g2^T]
  std::vector<Vec2> psi_pairs;
  std::vector<double> condition;  // 2-norm condition per node
  std::vector<bool> usable;
};

// Parallel fan of identical beams covering the mesh: axes spaced `spacing`
// apart across the domain's projection onto tau(xi), launched `standoff`
// upstream of the domain. Also reports the z extent a grid must cover.
struct PulseFan {
  std::vector<PulseSpec> pulses;
  double z_exit = 0.0;  // axial coordinate at which every pulse has left
};

PulseFan make_parallel_fan(const TriMesh& mesh, Vec2 xi, const PulseProfile& w,
                           const BeamProfile& beam, double spacing, double standoff,
                           double speed = 1.0, double amplitude = 1.0);

// Wiener-deconvolves one measured curve back to the beam density
// Phi(z_k) . tau (the kernel is the pulse shape flipped and sampled on the
// grid; the 1/dz converts the discrete deconvolution to density units).
std::vector<double> deconvolved_profile(const std::vector<double>& curve,
                                        const PulseProfile& w, const ZGrid& grid,
                                        WienerConfig cfg);

// Assigns each mesh node to the nearest pulse axis of one direction's fan
// (unique by the exclusivity check: equidistant axes drop the node) and
// samples psi and gamma there. profiles[p] is the deconvolved density of
// pulses[p] on `grid`.
DirectionalData build_directional_data(const std::vector<PulseSpec>& pulses,
                                       const std::vector<std::vector<double>>& profiles,
                                       const ZGrid& grid, MeshPtr mesh);

GammaSystem build_gamma_system(const DirectionalData& d1, const DirectionalData& d2);

struct InvertResult {
  VectorField current;             // per triangle, vertex-averaged
  std::vector<Vec2> node_values;   // per node
  std::vector<bool> filled;        // true where neighbour averaging stepped in
  std::size_t flagged = 0;
};

// Per-node solve of the stacked gamma system (least squares when more than
// two directions are given). Nodes without coverage or with condition above
// cond_cap are filled by neighbour averaging; if they exceed 1% of all
// nodes the data is rejected.
InvertResult invert_gamma(const std::vector<DirectionalData>& data, double cond_cap = 1e3);
InvertResult invert_gamma(const DirectionalData& d1, const DirectionalData& d2,
                          double cond_cap = 1e3);

// CSV dump "tri_id,Dx,Dy" for inspection.
void write_current_csv(const VectorField& current, const std::string& path);

}  // namespace ulfit
