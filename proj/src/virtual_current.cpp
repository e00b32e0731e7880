#include "ulfit/virtual_current.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ulfit/errors.hpp"

namespace ulfit {

PulseFan make_parallel_fan(const TriMesh& mesh, Vec2 xi, const PulseProfile& w,
                           const BeamProfile& beam, double spacing, double standoff,
                           double speed, double amplitude) {
  if (std::abs(norm(xi) - 1.0) > 1e-12)
    throw ValidationError("make_parallel_fan: direction must be a unit vector");
  if (spacing <= 0 || spacing > 0.5 * beam.radius + 1e-15)
    throw ValidationError("make_parallel_fan: spacing must be in ]0, R/2]");
  if (standoff <= 0) throw ValidationError("make_parallel_fan: standoff must be positive");

  Vec2 tau = perp(xi);
  Vec2 lo, hi;
  mesh.bbox(lo, hi);
  const Vec2 corners[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
  double o_min = std::numeric_limits<double>::max(), o_max = -o_min;
  double z_min = std::numeric_limits<double>::max(), z_max = -z_min;
  for (const Vec2& c : corners) {
    o_min = std::min(o_min, dot(c, tau));
    o_max = std::max(o_max, dot(c, tau));
    z_min = std::min(z_min, dot(c, xi));
    z_max = std::max(z_max, dot(c, xi));
  }

  PulseFan fan;
  const double z_origin = z_min - standoff;
  // axes offset by an irrational fraction of the spacing so that Voronoi
  // midlines between adjacent beams never coincide with mesh lattice lines
  // (a node equidistant to two axes would fail the exclusivity check);
  // one extra axis beyond each end keeps boundary nodes inside a footprint
  const double golden = 0.6180339887498949;
  double o_start = o_min - (2.0 - golden) * spacing;
  int count = static_cast<int>(std::ceil((o_max - o_start) / spacing)) + 3;
  for (int i = 0; i < count; ++i) {
    PulseSpec p;
    p.origin = z_origin * xi + (o_start + i * spacing) * tau;
    p.xi = xi;
    p.w = w;
    p.beam = beam;
    p.speed = speed;
    p.amplitude = amplitude;
    p.validate();
    fan.pulses.push_back(std::move(p));
  }
  fan.z_exit = (z_max - z_origin) + 2.0 * w.eta;
  return fan;
}

std::vector<double> deconvolved_profile(const std::vector<double>& curve,
                                        const PulseProfile& w, const ZGrid& grid,
                                        WienerConfig cfg) {
  if (static_cast<int>(curve.size()) != grid.n)
    throw ValidationError("deconvolved_profile: curve/grid mismatch");
  int kernel_len = static_cast<int>(std::ceil(w.eta / grid.dz)) + 1;
  std::vector<double> kernel(kernel_len);
  for (int m = 0; m < kernel_len; ++m) kernel[m] = w(-m * grid.dz);
  std::vector<double> phi = wiener_deconvolve(curve, kernel, cfg);
  for (double& v : phi) v /= grid.dz;  // discrete deconvolution -> density
  return phi;
}

namespace {

// transverse integral of A over the part of the beam section lying inside
// the domain box; the current vanishes outside the conductor, so psi only
// aggregates the inside part and gamma must match it (for an interior node
// this reduces to the full transverse integral)
double clipped_transverse_integral(const BeamProfile& beam, const Vec2& axis_point,
                                   const Vec2& tau, const Vec2& lo, const Vec2& hi) {
  const int n = static_cast<int>(beam.samples.size());
  const double dr = beam.radius / (n - 1);
  auto inside = [&](double r) {
    Vec2 p = axis_point + r * tau;
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  };
  double acc = 0.0;
  for (int j = -(n - 1); j < n - 1; ++j) {
    double r0 = j * dr, r1 = (j + 1) * dr;
    double a0 = inside(r0) ? beam(r0) : 0.0;
    double a1 = inside(r1) ? beam(r1) : 0.0;
    acc += 0.5 * (a0 + a1) * dr;
  }
  return acc;
}

}  // namespace

DirectionalData build_directional_data(const std::vector<PulseSpec>& pulses,
                                       const std::vector<std::vector<double>>& profiles,
                                       const ZGrid& grid, MeshPtr mesh) {
  if (pulses.empty()) throw ValidationError("build_directional_data: no pulses");
  if (profiles.size() != pulses.size())
    throw ValidationError("build_directional_data: profile/pulse count mismatch");
  const Vec2 xi = pulses[0].xi;
  for (const PulseSpec& p : pulses) {
    if (std::abs(cross(p.xi, xi)) > 1e-12 || dot(p.xi, xi) < 0)
      throw ValidationError("build_directional_data: pulses must share one direction");
    if (static_cast<int>(profiles[&p - pulses.data()].size()) != grid.n)
      throw ValidationError("build_directional_data: profile length mismatch");
  }

  DirectionalData d;
  d.mesh = mesh;
  d.xi = xi;
  const std::size_t n = mesh->node_count();
  d.psi.assign(n, 0.0);
  d.gamma.assign(n, {0.0, 0.0});
  d.coverage.assign(n, false);

  const Vec2 tau = perp(xi);
  const double z_last = grid.z(grid.n - 1);
  Vec2 box_lo, box_hi;
  mesh->bbox(box_lo, box_hi);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& x = mesh->nodes[i];
    // nearest axis, with the (H2) exclusivity check on ties
    int best = -1;
    double best_off = std::numeric_limits<double>::max();
    double second_off = best_off;
    for (std::size_t p = 0; p < pulses.size(); ++p) {
      double off = std::abs(pulses[p].transverse(x));
      if (off < best_off) {
        second_off = best_off;
        best_off = off;
        best = static_cast<int>(p);
      } else if (off < second_off) {
        second_off = off;
      }
    }
    if (best < 0) continue;
    if (second_off - best_off < 1e-9) {  // two beams claim the node
      d.ambiguous++;
      continue;
    }
    const PulseSpec& pulse = pulses[best];
    if (best_off >= pulse.beam.radius) continue;  // outside every footprint
    double z = pulse.axial(x);
    if (z < grid.z0 || z > z_last) continue;

    // linear interpolation of the deconvolved density along the beam axis
    double s = (z - grid.z0) / grid.dz;
    int k = static_cast<int>(s);
    double f = s - k;
    const auto& prof = profiles[best];
    double value = (k + 1 < grid.n) ? prof[k] * (1.0 - f) + prof[k + 1] * f : prof[k];

    // a section mostly outside the conductor sees too little of the current
    // for the psi/gamma ratio to be stable; such nodes are left to the
    // neighbour fill of the gamma inversion
    Vec2 axis_point = pulse.origin + z * pulse.xi;
    double weight =
        clipped_transverse_integral(pulse.beam, axis_point, tau, box_lo, box_hi);
    if (weight < 0.35 * pulse.beam.transverse_integral()) continue;

    d.psi[i] = value;
    d.gamma[i] = pulse.amplitude * weight * tau;
    d.coverage[i] = true;
  }

  if (d.ambiguous > 0)
    std::fprintf(stderr,
                 "ulfit: warning: %zu nodes dropped by the beam exclusivity check\n",
                 d.ambiguous);
  return d;
}

GammaSystem build_gamma_system(const DirectionalData& d1, const DirectionalData& d2) {
  if (d1.mesh != d2.mesh)
    throw ValidationError("build_gamma_system: datasets on different meshes");
  const std::size_t n = d1.mesh->node_count();
  GammaSystem g;
  g.xi1 = d1.xi;
  g.xi2 = d2.xi;
  g.gamma_rows.resize(n);
  g.psi_pairs.resize(n);
  g.condition.assign(n, std::numeric_limits<double>::infinity());
  g.usable.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!d1.coverage[i] || !d2.coverage[i]) continue;
    const Vec2& a = d1.gamma[i];
    const Vec2& b = d2.gamma[i];
    g.gamma_rows[i] = {a.x, a.y, b.x, b.y};
    g.psi_pairs[i] = {d1.psi[i], d2.psi[i]};
    double det = a.x * b.y - a.y * b.x;
    if (det == 0.0) continue;
    // singular values of the 2x2 row matrix
    double fr = norm2(a) + norm2(b);
    double disc = std::sqrt(std::max(fr * fr - 4.0 * det * det, 0.0));
    double smax = std::sqrt(0.5 * (fr + disc));
    double smin = std::sqrt(std::max(0.5 * (fr - disc), 0.0));
    if (smin > 0) {
      g.condition[i] = smax / smin;
      g.usable[i] = true;
    }
  }
  return g;
}

namespace {

std::vector<std::vector<int>> node_adjacency(const TriMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.node_count());
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      adj[tri[k]].push_back(tri[(k + 1) % 3]);
      adj[tri[k]].push_back(tri[(k + 2) % 3]);
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

}  // namespace

InvertResult invert_gamma(const std::vector<DirectionalData>& data, double cond_cap) {
  if (data.size() < 2) throw ValidationError("invert_gamma: need at least two directions");
  const MeshPtr mesh = data[0].mesh;
  for (const auto& d : data)
    if (d.mesh != mesh) throw ValidationError("invert_gamma: datasets on different meshes");

  bool independent = false;
  for (std::size_t i = 0; i < data.size() && !independent; ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j)
      if (std::abs(cross(data[i].xi, data[j].xi)) > 1e-10) {
        independent = true;
        break;
      }
  if (!independent)
    throw ValidationError("invert_gamma: all directions are parallel ((H1) fails)");

  const std::size_t n = mesh->node_count();
  InvertResult res;
  res.node_values.assign(n, {0.0, 0.0});
  res.filled.assign(n, false);
  std::vector<bool> solved(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    // normal equations of the stacked rows gamma_k^T V = psi_k
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    int rows = 0;
    for (const auto& d : data) {
      if (!d.coverage[i]) continue;
      const Vec2& g = d.gamma[i];
      a11 += g.x * g.x;
      a12 += g.x * g.y;
      a22 += g.y * g.y;
      b1 += g.x * d.psi[i];
      b2 += g.y * d.psi[i];
      ++rows;
    }
    if (rows < 2) continue;
    double tr = a11 + a22;
    double det = a11 * a22 - a12 * a12;
    if (det <= 0) continue;
    double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    double lmax = 0.5 * (tr + disc), lmin = 0.5 * (tr - disc);
    if (lmin <= 0) continue;
    double cond = std::sqrt(lmax / lmin);
    if (cond > cond_cap) continue;
    res.node_values[i] = {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
    solved[i] = true;
  }

  std::size_t unsolved = std::count(solved.begin(), solved.end(), false);
  res.flagged = unsolved;
  if (unsolved > 0) {
    if (static_cast<double>(unsolved) > 0.01 * static_cast<double>(n))
      throw NumericalError("invert_gamma: " + std::to_string(unsolved) + " of " +
                           std::to_string(n) +
                           " nodes unusable (coverage/conditioning); data rejected");
    // neighbour averaging until every node carries a value
    auto adj = node_adjacency(*mesh);
    std::vector<bool> have = solved;
    while (true) {
      bool progress = false;
      std::vector<Vec2> next = res.node_values;
      std::vector<bool> next_have = have;
      for (std::size_t i = 0; i < n; ++i) {
        if (have[i]) continue;
        Vec2 acc{0.0, 0.0};
        int cnt = 0;
        for (int j : adj[i])
          if (have[j]) {
            acc += res.node_values[j];
            ++cnt;
          }
        if (cnt > 0) {
          next[i] = acc / cnt;
          next_have[i] = true;
          res.filled[i] = true;
          progress = true;
        }
      }
      res.node_values = std::move(next);
      have = std::move(next_have);
      if (!progress) break;
      if (std::find(have.begin(), have.end(), false) == have.end()) break;
    }
  }

  res.current = VectorField(mesh);
  for (std::size_t t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tri = mesh->triangles[t];
    res.current.values[t] =
        (res.node_values[tri[0]] + res.node_values[tri[1]] + res.node_values[tri[2]]) / 3.0;
  }
  return res;
}

InvertResult invert_gamma(const DirectionalData& d1, const DirectionalData& d2,
                          double cond_cap) {
  return invert_gamma(std::vector<DirectionalData>{d1, d2}, cond_cap);
}

void write_current_csv(const VectorField& current, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open current dump for writing: " + path);
  f << "tri_id,Dx,Dy\n";
  char buf[96];
  for (std::size_t t = 0; t < current.values.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", t, current.values[t].x,
                  current.values[t].y);
    f << buf;
  }
}

}  // namespace ulfit
