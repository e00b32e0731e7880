#include "ulfit/recon_orthofield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ulfit/errors.hpp"

namespace ulfit {

void OrthoConfig::validate() const {
  if (epsilon <= 0) throw ValidationError("OrthoConfig: epsilon must be positive");
  if (refine_rounds < 0) throw ValidationError("OrthoConfig: negative refine_rounds");
  if (!(refine_fraction > 0 && refine_fraction <= 1))
    throw ValidationError("OrthoConfig: refine_fraction must be in ]0, 1]");
  if (!(sigma_clip_low > 0 && sigma_clip_low <= sigma_clip_high))
    throw ValidationError("OrthoConfig: bad sigma clip bounds");
}

VectorField orthogonal_field(const VectorField& d) {
  VectorField f(d.mesh);
  for (std::size_t t = 0; t < d.values.size(); ++t)
    f.values[t] = {d.values[t].y, -d.values[t].x};
  return f;
}

ScalarField solve_viscosity(const VectorField& f, double eps, const ScalarField* boundary_data) {
  if (eps <= 0) throw ValidationError("solve_viscosity: eps must be positive");
  SparseSystem sys = assemble_diffusion(
      f.mesh, [&](std::size_t t) { return rank_one_plus(eps, f.values[t]); });
  for (int i : f.mesh->all_boundary_nodes()) {
    double value = boundary_data ? boundary_data->values[i] : f.mesh->nodes[i].y;
    sys.dirichlet.push_back({i, value});
  }
  return solve(sys);
}

RecoverResult recover_sigma(const VectorField& d, const ScalarField& u_eps, double clip_low,
                            double clip_high) {
  if (d.mesh != u_eps.mesh)
    throw ValidationError("recover_sigma: current and potential on different meshes");
  if (!(clip_low > 0 && clip_low <= clip_high))
    throw ValidationError("recover_sigma: bad clip bounds");
  const TriMesh& mesh = *d.mesh;
  const std::size_t nt = mesh.triangle_count();
  VectorField grad_u = gradient(u_eps);

  double max_d2 = 0.0, max_denom = 0.0;
  std::vector<double> denom(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    max_d2 = std::max(max_d2, norm2(d.values[t]));
    denom[t] = dot(d.values[t], grad_u.values[t]);
    max_denom = std::max(max_denom, std::abs(denom[t]));
  }
  const double d2_floor = 1e-10 * max_d2;
  const double denom_floor = 1e-10 * max_denom;

  RecoverResult res;
  res.sigma.mesh = d.mesh;
  res.sigma.sigma.assign(nt, clip_low);
  res.sigma.sigma_low = clip_low;
  res.sigma.sigma_high = clip_high;
  res.flagged.assign(nt, false);

  for (std::size_t t = 0; t < nt; ++t) {
    double d2 = norm2(d.values[t]);
    if (d2 < d2_floor || denom[t] <= denom_floor) {
      res.flagged[t] = true;
      continue;
    }
    res.sigma.sigma[t] = std::clamp(d2 / denom[t], clip_low, clip_high);
  }

  res.flagged_count = std::count(res.flagged.begin(), res.flagged.end(), true);
  if (res.flagged_count * 10 > nt)
    throw NumericalError("recover_sigma: " + std::to_string(res.flagged_count) + " of " +
                         std::to_string(nt) + " triangles degenerate; data rejected");

  if (res.flagged_count > 0) {
    auto neighbors = triangle_neighbors(mesh);
    std::vector<bool> have(nt);
    for (std::size_t t = 0; t < nt; ++t) have[t] = !res.flagged[t];
    bool progress = true;
    while (progress) {
      progress = false;
      std::vector<double> next = res.sigma.sigma;
      std::vector<bool> next_have = have;
      for (std::size_t t = 0; t < nt; ++t) {
        if (have[t]) continue;
        double acc = 0.0;
        int cnt = 0;
        for (int nb : neighbors[t])
          if (nb >= 0 && have[nb]) {
            acc += res.sigma.sigma[nb];
            ++cnt;
          }
        if (cnt > 0) {
          next[t] = std::clamp(acc / cnt, clip_low, clip_high);
          next_have[t] = true;
          progress = true;
        }
      }
      res.sigma.sigma = std::move(next);
      have = std::move(next_have);
      if (std::find(have.begin(), have.end(), false) == have.end()) break;
    }
  }
  res.sigma.validate();
  return res;
}

std::vector<bool> mark_by_sigma_jump(const ConductivityMap& sigma, double fraction) {
  const TriMesh& mesh = *sigma.mesh;
  const std::size_t nt = mesh.triangle_count();
  auto neighbors = triangle_neighbors(mesh);
  std::vector<double> indicator(nt, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int nb = neighbors[t][k];
      if (nb < 0) continue;
      double len = norm(mesh.nodes[tri[(k + 1) % 3]] - mesh.nodes[tri[(k + 2) % 3]]);
      indicator[t] += std::abs(sigma.sigma[t] - sigma.sigma[nb]) * len;
    }
  }
  std::vector<std::size_t> order(nt);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (indicator[a] != indicator[b]) return indicator[a] > indicator[b];
    return a < b;  // deterministic ties
  });
  std::size_t n_mark = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * nt));
  std::vector<bool> marker(nt, false);
  for (std::size_t i = 0; i < std::min(n_mark, nt); ++i) marker[order[i]] = true;
  return marker;
}

OrthoResult adaptive_reconstruct(const VectorField& d, const OrthoConfig& cfg) {
  cfg.validate();
  OrthoResult res;
  VectorField current = d;
  res.meshes.push_back(current.mesh);

  for (int round = 0; round <= cfg.refine_rounds; ++round) {
    VectorField f = orthogonal_field(current);
    ScalarField u = solve_viscosity(f, cfg.epsilon);
    RecoverResult rec =
        recover_sigma(current, u, cfg.sigma_clip_low, cfg.sigma_clip_high);

    VectorField grad_u = gradient(u);
    double resid = 0.0;
    double min_e2 = std::numeric_limits<double>::max();
    for (std::size_t t = 0; t < current.values.size(); ++t) {
      double fg = dot(f.values[t], grad_u.values[t]);
      resid += current.mesh->signed_area(t) * fg * fg;
      min_e2 = std::min(min_e2, current.values[t].y);
    }
    res.diagnostics.push_back({round, cfg.epsilon, std::sqrt(resid), min_e2});
    res.u_eps = std::move(u);
    res.sigma_rec = rec.sigma;
    res.flagged = rec.flagged_count;

    if (round == cfg.refine_rounds) break;

    std::vector<bool> marker = mark_by_sigma_jump(rec.sigma, cfg.refine_fraction);
    RefinedMesh fine = refine_with_lineage(*current.mesh, marker);
    VectorField next(fine.mesh);
    for (std::size_t t = 0; t < next.values.size(); ++t)
      next.values[t] = current.values[fine.parent[t]];  // data inherited, not re-solved
    current = std::move(next);
    res.meshes.push_back(current.mesh);
  }
  return res;
}

}  // namespace ulfit
