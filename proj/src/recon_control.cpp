#include "ulfit/recon_control.hpp"

#include <algorithm>
#include <cmath>

#include "ulfit/errors.hpp"
#include "ulfit/forward.hpp"

namespace ulfit {

void ControlConfig::validate() const {
  if (max_iters < 0 || step_init <= 0 || armijo_c <= 0 || grad_tol <= 0 || tv_epsilon < 0 ||
      tv_delta < 0)
    throw ValidationError("ControlConfig: nonpositive parameter");
}

double evaluate_misfit(const ConductivityMap& sigma, const ScalarField& potential,
                       const VectorField& d) {
  const TriMesh& mesh = *sigma.mesh;
  VectorField grad_u = gradient(potential);
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec2 mis = sigma.sigma[t] * grad_u.values[t] - d.values[t];
    acc += mesh.signed_area(t) * norm2(mis);
  }
  return 0.5 * acc;
}

double evaluate_J(const ConductivityMap& sigma, const VectorField& d) {
  return evaluate_misfit(sigma, solve_virtual_potential(sigma), d);
}

namespace {

// helper shared by the adjoint and linearized solves: stiffness for sigma
// with homogeneous Dirichlet data on both electrodes
SparseSystem electrode_system(const ConductivityMap& sigma) {
  SparseSystem sys = assemble_diffusion(
      sigma.mesh, [&](std::size_t t) { return identity_times(sigma.sigma[t]); });
  for (int i : sigma.mesh->boundary_nodes({BoundaryTag::G1, BoundaryTag::G2}))
    sys.dirichlet.push_back({i, 0.0});
  return sys;
}

}  // namespace

ScalarField solve_adjoint(const ConductivityMap& sigma, const ScalarField& potential,
                          const VectorField& d) {
  VectorField grad_u = gradient(potential);
  VectorField g(sigma.mesh);
  for (std::size_t t = 0; t < g.values.size(); ++t) {
    double s = sigma.sigma[t];
    g.values[t] = s * s * grad_u.values[t] - s * d.values[t];
  }
  SparseSystem sys = electrode_system(sigma);
  add_vector_divergence_load(sys, g, 1.0);
  return solve(sys);
}

std::vector<double> gradient_J(const ConductivityMap& sigma, const ScalarField& potential,
                               const ScalarField& adjoint, const VectorField& d) {
  VectorField grad_u = gradient(potential);
  VectorField grad_p = gradient(adjoint);
  std::vector<double> out(sigma.mesh->triangle_count());
  for (std::size_t t = 0; t < out.size(); ++t) {
    Vec2 residual = sigma.sigma[t] * grad_u.values[t] - d.values[t] - grad_p.values[t];
    out[t] = dot(residual, grad_u.values[t]);
  }
  return out;
}

ScalarField solve_linearized(const ConductivityMap& sigma, const ScalarField& potential,
                             const std::vector<double>& h) {
  if (h.size() != sigma.mesh->triangle_count())
    throw ValidationError("solve_linearized: perturbation size mismatch");
  VectorField grad_u = gradient(potential);
  VectorField g(sigma.mesh);
  for (std::size_t t = 0; t < g.values.size(); ++t) g.values[t] = h[t] * grad_u.values[t];
  SparseSystem sys = electrode_system(sigma);
  add_vector_divergence_load(sys, g, -1.0);
  return solve(sys);
}

std::pair<double, std::vector<double>> tv_seminorm(const ConductivityMap& sigma,
                                                   double delta) {
  if (delta <= 0) throw ValidationError("tv_seminorm: delta must be positive");
  const TriMesh& mesh = *sigma.mesh;
  auto neighbors = triangle_neighbors(mesh);
  double value = 0.0;
  std::vector<double> grad(mesh.triangle_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int nb = neighbors[t][k];
      if (nb < 0 || nb < static_cast<int>(t)) continue;  // each interior edge once
      double len = norm(mesh.nodes[tri[(k + 1) % 3]] - mesh.nodes[tri[(k + 2) % 3]]);
      double jump = sigma.sigma[t] - sigma.sigma[nb];
      double smooth = std::sqrt(jump * jump + delta * delta);
      value += len * smooth;
      grad[t] += len * jump / smooth;
      grad[nb] -= len * jump / smooth;
    }
  }
  return {value, std::move(grad)};
}

ReconResult minimize(const ConductivityMap& sigma0, const VectorField& d,
                     const ControlConfig& cfg) {
  cfg.validate();
  sigma0.validate();
  const TriMesh& mesh = *sigma0.mesh;
  const std::size_t nt = mesh.triangle_count();
  const double lo = sigma0.sigma_low, hi = sigma0.sigma_high;
  const double tv_delta = cfg.tv_delta > 0 ? cfg.tv_delta : 1e-3 * (hi - lo);

  std::vector<double> area(nt);
  for (std::size_t t = 0; t < nt; ++t) area[t] = mesh.signed_area(t);

  auto clip = [&](ConductivityMap& s) {
    for (double& v : s.sigma) v = std::clamp(v, lo, hi);
  };

  // objective and compose gradient in density units: the TV partial
  // derivative is a plain derivative, so divide by the triangle area to
  // share the weighted inner product with dJ
  auto objective = [&](const ConductivityMap& s, ScalarField& u_out) {
    u_out = solve_virtual_potential(s);
    double j = evaluate_misfit(s, u_out, d);
    if (cfg.tv_epsilon > 0) j += cfg.tv_epsilon * tv_seminorm(s, tv_delta).first;
    return j;
  };
  auto full_gradient = [&](const ConductivityMap& s, const ScalarField& u) {
    ScalarField p = solve_adjoint(s, u, d);
    std::vector<double> g = gradient_J(s, u, p, d);
    if (cfg.tv_epsilon > 0) {
      auto [tv, tv_grad] = tv_seminorm(s, tv_delta);
      (void)tv;
      for (std::size_t t = 0; t < nt; ++t) g[t] += cfg.tv_epsilon * tv_grad[t] / area[t];
    }
    return g;
  };
  auto weighted_norm = [&](const std::vector<double>& g) {
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) acc += area[t] * g[t] * g[t];
    return std::sqrt(acc);
  };

  ReconResult res;
  res.sigma = sigma0;
  clip(res.sigma);
  res.meshes = {sigma0.mesh};

  ScalarField u;
  double j = objective(res.sigma, u);
  std::vector<double> g = full_gradient(res.sigma, u);
  double gnorm = weighted_norm(g);
  res.history.push_back({0, j, 0.0, gnorm});

  double step = cfg.step_init;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (gnorm < cfg.grad_tol) break;

    int fails = 0;
    bool accepted = false;
    while (fails < 50) {
      ConductivityMap trial = res.sigma;
      for (std::size_t t = 0; t < nt; ++t) trial.sigma[t] -= step * g[t];
      clip(trial);

      double predicted = 0.0;  // <g, sigma - trial>_w, nonnegative after clipping
      for (std::size_t t = 0; t < nt; ++t)
        predicted += area[t] * g[t] * (res.sigma.sigma[t] - trial.sigma[t]);
      if (predicted <= 0.0) {  // projection annihilated the step
        step *= 0.5;
        ++fails;
        continue;
      }

      ScalarField u_trial;
      double j_trial = objective(trial, u_trial);
      if (j_trial <= j - cfg.armijo_c * predicted) {
        res.sigma = std::move(trial);
        u = std::move(u_trial);
        j = j_trial;
        accepted = true;
        break;
      }
      step *= 0.5;
      ++fails;
    }
    if (!accepted) {
      res.converged_with_warning = true;
      break;
    }

    g = full_gradient(res.sigma, u);
    gnorm = weighted_norm(g);
    res.history.push_back({it, j, step, gnorm});
    step = std::min(step * 2.0, cfg.step_init * 1e6);
  }
  return res;
}

}  // namespace ulfit
