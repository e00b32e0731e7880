#pragma once

#include <utility>
#include <vector>

#include "ulfit/assembly.hpp"
#include "ulfit/fields.hpp"

namespace ulfit {

struct ControlConfig {
  int max_iters = 200;
  double step_init = 1.0;
  double armijo_c = 1e-4;     // sufficient-decrease constant
  double tv_epsilon = 0.0;    // regularization weight, >= 0
  double tv_delta = 0.0;      // jump smoothing; 0 = 1e-3 (sigma_high - sigma_low)
  double grad_tol = 1e-8;

  void validate() const;
};

struct HistoryRow {
  int iteration = 0;
  double j_value = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
};

// Current iterate bundle of the descent loop.
struct ControlState {
  ConductivityMap sigma;
  ScalarField potential;          // F[sigma]
  ScalarField adjoint;            // p
  double j_value = 0.0;
  std::vector<double> grad;      // per-triangle dJ density
  std::vector<HistoryRow> history;
};

struct ReconResult {
  ConductivityMap sigma;
  std::vector<HistoryRow> history;
  std::vector<MeshPtr> meshes;
  bool converged_with_warning = false;
};

// J[sigma] = 1/2 int |sigma grad F[sigma] - D|^2  (misfit only, no TV term)
double evaluate_J(const ConductivityMap& sigma, const VectorField& d);
double evaluate_misfit(const ConductivityMap& sigma, const ScalarField& potential,
                       const VectorField& d);

// Adjoint problem div(sigma grad p) = div(sigma^2 grad U - sigma D) with
// p = 0 on both electrodes, no flux on Gamma0.
ScalarField solve_adjoint(const ConductivityMap& sigma, const ScalarField& potential,
                          const VectorField& d);

// dJ = (sigma grad U - D - grad p) . grad U, one value per triangle.
std::vector<double> gradient_J(const ConductivityMap& sigma, const ScalarField& potential,
                               const ScalarField& adjoint, const VectorField& d);

// Linearization dF[sigma](h): div(sigma grad v) = -div(h grad F[sigma]),
// v = 0 on the electrodes. Used by the derivative checks.
ScalarField solve_linearized(const ConductivityMap& sigma, const ScalarField& potential,
                             const std::vector<double>& h);

// Smoothed total variation sum_edges len sqrt(jump^2 + delta^2) over
// interior edges, with its gradient w.r.t. the per-triangle values.
std::pair<double, std::vector<double>> tv_seminorm(const ConductivityMap& sigma,
                                                   double delta);

// Projected gradient descent with Armijo backtracking on J + eps TV.
// Iterates stay inside [sigma_low, sigma_high]; J is nonincreasing along
// accepted steps. Fifty consecutive line-search failures end the run with
// converged_with_warning set.
ReconResult minimize(const ConductivityMap& sigma0, const VectorField& d,
                     const ControlConfig& cfg);

}  // namespace ulfit
