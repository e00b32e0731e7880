#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ulfit/assembly.hpp"
#include "ulfit/fields.hpp"
#include "ulfit/pulse.hpp"

namespace ulfit {

// Uniform sample grid z_k = z0 + k dz, k = 0..n-1, inside ]0, z_max[.
struct ZGrid {
  double z0 = 0.0;
  double dz = 0.0;
  int n = 0;

  double z(int k) const { return z0 + k * dz; }
};

ZGrid make_z_grid(double z_max, double dz);

// Sampled intensity curves for a family of pulses.
struct MeasurementSet {
  std::vector<PulseSpec> pulses;
  ZGrid grid;
  std::vector<std::vector<double>> curves;  // curves[p].size() == grid.n
  double noise_level = 0.0;                 // std dev of the additive noise

  void validate() const;
};

// Potential with unit voltage between the electrodes:
// div(sigma grad U) = 0, U = 0 on Gamma1, U = 1 on Gamma2, no flux on
// Gamma0. Enforces the discrete maximum principle 0 <= U <= 1 up to 1e-8.
ScalarField solve_virtual_potential(const ConductivityMap& sigma);

// Potential induced by an interior current source:
// -div(sigma grad u) = div j_S, u = 0 on both electrodes, no flux on
// Gamma0. The source support must not touch the electrodes.
ScalarField solve_internal_potential(const ConductivityMap& sigma, const VectorField& source);

// Current density induced by the pulse at time t:
// j_S(x) = sigma(x) v(x, t) tau(xi), evaluated at triangle centroids.
VectorField lorentz_source(const ConductivityMap& sigma, const PulseSpec& pulse, double t);

// Electrode current through Gamma2 for the solved potential u, extracted in
// reaction form I = int (sigma grad u + j_S) . grad chi with chi the hat-sum
// over the electrode's nodes (discretely consistent with the weak solution).
double electrode_intensity(const ConductivityMap& sigma, const ScalarField& u,
                           const VectorField& source, BoundaryTag electrode);

// Intensity curve M(z_k) = int v(x, z_k / c) sigma grad U . tau dx by the
// per-triangle centroid rule. current = sigma grad U on the same mesh.
std::vector<double> measure_with_current(const VectorField& current, const PulseSpec& pulse,
                                         const ZGrid& grid);

// Same quantity synthesized through the factored form: the per-triangle
// beam density is aggregated first (no pulse shape), then convolved with
// W(z) = w(-z). Used to cross-check the time-domain synthesis.
std::vector<double> measure_factored(const VectorField& current, const PulseSpec& pulse,
                                     const ZGrid& grid);

// Convenience: solves the virtual potential, then samples one pulse.
std::vector<double> measure(const ConductivityMap& sigma, const PulseSpec& pulse,
                            const ZGrid& grid);

// All pulses against one conductivity map (one potential solve).
MeasurementSet synthesize(const ConductivityMap& sigma, std::vector<PulseSpec> pulses,
                          const ZGrid& grid);

// Additive white Gaussian noise, one derived RNG stream per curve so the
// result does not depend on evaluation order.
MeasurementSet add_noise(const MeasurementSet& set, double nu, std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// CSV: header "pulse_id,y1,y2,xi1,xi2,z,value", one row per (pulse, sample).
void write_measurements(const MeasurementSet& set, std::ostream& out);
void write_measurements_file(const MeasurementSet& set, const std::string& path);

// Geometry and curves read back from CSV (profiles are configuration, not
// part of the file).
struct MeasurementData {
  std::vector<Vec2> origins;
  std::vector<Vec2> directions;
  ZGrid grid;
  std::vector<std::vector<double>> curves;
};
MeasurementData read_measurements_file(const std::string& path);

}  // namespace ulfit
