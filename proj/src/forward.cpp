#include "ulfit/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ulfit/errors.hpp"

namespace ulfit {

ZGrid make_z_grid(double z_max, double dz) {
  if (dz <= 0 || z_max <= dz) throw ValidationError("make_z_grid: need 0 < dz < z_max");
  ZGrid g;
  g.dz = dz;
  g.z0 = dz;
  g.n = static_cast<int>(std::floor(z_max / dz + 1e-12)) - 1;
  if (g.n < 2) throw ValidationError("make_z_grid: grid too short");
  return g;
}

void MeasurementSet::validate() const {
  if (grid.dz <= 0) throw ValidationError("MeasurementSet: dz must be positive");
  if (curves.size() != pulses.size())
    throw ValidationError("MeasurementSet: curve/pulse count mismatch");
  for (const auto& c : curves)
    if (static_cast<int>(c.size()) != grid.n)
      throw ValidationError("MeasurementSet: curve length mismatch");
}

ScalarField solve_virtual_potential(const ConductivityMap& sigma) {
  sigma.validate();
  SparseSystem sys = assemble_diffusion(
      sigma.mesh, [&](std::size_t t) { return identity_times(sigma.sigma[t]); });
  for (int i : sigma.mesh->boundary_nodes({BoundaryTag::G1})) sys.dirichlet.push_back({i, 0.0});
  for (int i : sigma.mesh->boundary_nodes({BoundaryTag::G2})) sys.dirichlet.push_back({i, 1.0});
  if (sys.dirichlet.empty())
    throw ValidationError("solve_virtual_potential: mesh has no electrodes");
  ScalarField u = solve(sys);
  for (double v : u.values)
    if (v < -1e-8 || v > 1.0 + 1e-8)
      throw NumericalError("solve_virtual_potential: discrete maximum principle violated (" +
                           std::to_string(v) + ")");
  return u;
}

ScalarField solve_internal_potential(const ConductivityMap& sigma, const VectorField& source) {
  sigma.validate();
  const TriMesh& mesh = *sigma.mesh;
  if (source.values.size() != mesh.triangle_count())
    throw ValidationError("solve_internal_potential: source/mesh mismatch");

  auto electrode_vec = mesh.boundary_nodes({BoundaryTag::G1, BoundaryTag::G2});
  std::set<int> electrode(electrode_vec.begin(), electrode_vec.end());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (norm2(source.values[t]) == 0.0) continue;
    for (int k = 0; k < 3; ++k)
      if (electrode.count(mesh.triangles[t][k]))
        throw ValidationError(
            "solve_internal_potential: source support touches an electrode");
  }

  SparseSystem sys = assemble_diffusion(
      sigma.mesh, [&](std::size_t t) { return identity_times(sigma.sigma[t]); });
  add_vector_divergence_load(sys, source, -1.0);
  for (int i : electrode_vec) sys.dirichlet.push_back({i, 0.0});
  return solve(sys);
}

VectorField lorentz_source(const ConductivityMap& sigma, const PulseSpec& pulse, double t) {
  pulse.validate();
  if (t < 0) throw ValidationError("lorentz_source: time must be nonnegative");
  const TriMesh& mesh = *sigma.mesh;
  Vec2 tau = pulse.tau();
  VectorField j(sigma.mesh);
  for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
    double v = pulse.v(mesh.centroid(k), t);
    if (v != 0.0) j.values[k] = sigma.sigma[k] * v * tau;
  }
  return j;
}

double electrode_intensity(const ConductivityMap& sigma, const ScalarField& u,
                           const VectorField& source, BoundaryTag electrode) {
  const TriMesh& mesh = *sigma.mesh;
  auto nodes_vec = mesh.boundary_nodes({electrode});
  std::set<int> enodes(nodes_vec.begin(), nodes_vec.end());
  VectorField grad_u = gradient(u);

  // chi = sum of hat functions on the electrode's nodes
  double intensity = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    bool touches = enodes.count(tri[0]) || enodes.count(tri[1]) || enodes.count(tri[2]);
    if (!touches) continue;
    const Vec2& p0 = mesh.nodes[tri[0]];
    const Vec2& p1 = mesh.nodes[tri[1]];
    const Vec2& p2 = mesh.nodes[tri[2]];
    double twice_area = cross(p1 - p0, p2 - p0);
    Vec2 grads[3] = {perp(p2 - p1) / twice_area, perp(p0 - p2) / twice_area,
                     perp(p1 - p0) / twice_area};
    Vec2 grad_chi{0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      if (enodes.count(tri[k])) grad_chi += grads[k];
    Vec2 flux = sigma.sigma[t] * grad_u.values[t] + source.values[t];
    intensity += 0.5 * twice_area * dot(flux, grad_chi);
  }
  return intensity;
}

namespace {

// per-cell beam density: mass q = a A(r) D . tau and abscissa z, on the
// four midpoint-subdivision children of each triangle inside the footprint
// (composite centroid rule; the plain one-point rule is too rough where the
// beam section is cut by the domain boundary)
struct BeamSample {
  double z = 0.0;
  double mass = 0.0;
};

std::vector<BeamSample> beam_decomposition(const VectorField& current, const PulseSpec& pulse) {
  const TriMesh& mesh = *current.mesh;
  Vec2 tau = pulse.tau();
  const double cull = pulse.beam.radius + mesh.max_edge_length();
  std::vector<BeamSample> out;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec2 c = mesh.centroid(t);
    if (std::abs(pulse.transverse(c)) >= cull) continue;
    const auto& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.nodes[tri[0]];
    const Vec2& p1 = mesh.nodes[tri[1]];
    const Vec2& p2 = mesh.nodes[tri[2]];
    const Vec2 m01 = (p0 + p1) * 0.5, m12 = (p1 + p2) * 0.5, m20 = (p2 + p0) * 0.5;
    const Vec2 sub_centroids[4] = {(p0 + m01 + m20) / 3.0, (m01 + p1 + m12) / 3.0,
                                   (m20 + m12 + p2) / 3.0, (m01 + m12 + m20) / 3.0};
    const double quarter_area = 0.25 * mesh.signed_area(t);
    const double strength = pulse.amplitude * dot(current.values[t], tau);
    if (strength == 0.0) continue;
    for (const Vec2& q : sub_centroids) {
      double r = pulse.transverse(q);
      if (std::abs(r) >= pulse.beam.radius) continue;
      double a = pulse.beam(r);
      if (a == 0.0) continue;
      out.push_back({pulse.axial(q), quarter_area * a * strength});
    }
  }
  return out;
}

}  // namespace

std::vector<double> measure_with_current(const VectorField& current, const PulseSpec& pulse,
                                         const ZGrid& grid) {
  pulse.validate();
  std::vector<double> m(grid.n, 0.0);
  auto samples = beam_decomposition(current, pulse);
  if (samples.empty()) {
    std::fprintf(stderr, "ulfit: warning: pulse beam does not intersect the domain\n");
    return m;
  }
  const double eta = pulse.w.eta;
  for (const BeamSample& s : samples) {
    // w(z_T - z_k) is nonzero for z_k in ]z_T, z_T + eta[
    int k0 = std::max(0, static_cast<int>(std::ceil((s.z - grid.z0) / grid.dz)));
    int k1 = std::min(grid.n - 1,
                      static_cast<int>(std::floor((s.z + eta - grid.z0) / grid.dz)));
    for (int k = k0; k <= k1; ++k) m[k] += s.mass * pulse.w(s.z - grid.z(k));
  }
  return m;
}

std::vector<double> measure_factored(const VectorField& current, const PulseSpec& pulse,
                                     const ZGrid& grid) {
  pulse.validate();
  std::vector<double> m(grid.n, 0.0);
  auto phi = beam_decomposition(current, pulse);
  if (phi.empty()) return m;
  std::sort(phi.begin(), phi.end(),
            [](const BeamSample& a, const BeamSample& b) { return a.z < b.z; });

  // (W * Phi)(z_k) with W(s) = w(-s): contributions from lags s = z_k - z_T
  // inside the support ]0, eta[ of W
  const double eta = pulse.w.eta;
  std::size_t lo = 0;
  for (int k = 0; k < grid.n; ++k) {
    double zk = grid.z(k);
    while (lo < phi.size() && phi[lo].z <= zk - eta) ++lo;
    for (std::size_t i = lo; i < phi.size() && phi[i].z < zk; ++i)
      m[k] += pulse.w(-(zk - phi[i].z)) * phi[i].mass;
  }
  return m;
}

std::vector<double> measure(const ConductivityMap& sigma, const PulseSpec& pulse,
                            const ZGrid& grid) {
  ScalarField u = solve_virtual_potential(sigma);
  VectorField d = gradient(u);
  for (std::size_t t = 0; t < d.values.size(); ++t) d.values[t] = sigma.sigma[t] * d.values[t];
  return measure_with_current(d, pulse, grid);
}

MeasurementSet synthesize(const ConductivityMap& sigma, std::vector<PulseSpec> pulses,
                          const ZGrid& grid) {
  ScalarField u = solve_virtual_potential(sigma);
  VectorField d = gradient(u);
  for (std::size_t t = 0; t < d.values.size(); ++t) d.values[t] = sigma.sigma[t] * d.values[t];
  MeasurementSet set;
  set.grid = grid;
  set.curves.reserve(pulses.size());
  for (const PulseSpec& p : pulses) set.curves.push_back(measure_with_current(d, p, grid));
  set.pulses = std::move(pulses);
  set.validate();
  return set;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over master + golden-ratio stride
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MeasurementSet add_noise(const MeasurementSet& set, double nu, std::uint64_t seed) {
  if (nu < 0) throw ValidationError("add_noise: nu must be nonnegative");
  MeasurementSet out = set;
  out.noise_level = nu;
  if (nu == 0) return out;
  for (std::size_t p = 0; p < out.curves.size(); ++p) {
    std::mt19937_64 rng(derive_seed(seed, p));
    std::normal_distribution<double> gauss(0.0, nu);
    for (double& v : out.curves[p]) v += gauss(rng);
  }
  return out;
}

void write_measurements(const MeasurementSet& set, std::ostream& out) {
  set.validate();
  out << "pulse_id,y1,y2,xi1,xi2,z,value\n";
  char buf[160];
  for (std::size_t p = 0; p < set.pulses.size(); ++p) {
    const PulseSpec& ps = set.pulses[p];
    for (int k = 0; k < set.grid.n; ++k) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p,
                    ps.origin.x, ps.origin.y, ps.xi.x, ps.xi.y, set.grid.z(k),
                    set.curves[p][k]);
      out << buf;
    }
  }
}

void write_measurements_file(const MeasurementSet& set, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open measurement file for writing: " + path);
  write_measurements(set, f);
}

MeasurementData read_measurements_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open measurement file: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "pulse_id,y1,y2,xi1,xi2,z,value")
    throw ValidationError("measurement file: bad header");

  MeasurementData data;
  std::vector<double> zs;
  long last_id = -1;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long id;
    double y1, y2, x1, x2, z, v;
    if (!(ss >> id >> y1 >> y2 >> x1 >> x2 >> z >> v))
      throw ValidationError("measurement file: bad row");
    if (id != last_id) {
      if (id != last_id + 1) throw ValidationError("measurement file: pulse ids not contiguous");
      data.origins.push_back({y1, y2});
      data.directions.push_back({x1, x2});
      data.curves.emplace_back();
      last_id = id;
    }
    data.curves.back().push_back(v);
    if (id == 0) zs.push_back(z);
  }
  if (zs.size() < 2) throw ValidationError("measurement file: need at least two samples");
  data.grid.z0 = zs[0];
  data.grid.dz = zs[1] - zs[0];
  data.grid.n = static_cast<int>(zs.size());
  for (const auto& c : data.curves)
    if (c.size() != zs.size()) throw ValidationError("measurement file: ragged curves");
  return data;
}

}  // namespace ulfit
