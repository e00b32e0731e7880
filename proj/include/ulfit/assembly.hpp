#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "ulfit/fields.hpp"
#include "ulfit/mesh.hpp"
#include "ulfit/vec2.hpp"

namespace ulfit {

// Node-indexed sparse SPD system. Assembly accumulates the P1 stiffness
// matrix entry (i,j) = sum_T int_T (A grad phi_i) . grad phi_j; Dirichlet
// constraints are eliminated symmetrically (row/column) at solve time, so
// the stored matrix stays symmetric. Assembly over triangles is
// deterministic: a fixed triangle order gives bit-identical matrices.
struct SparseSystem {
  MeshPtr mesh;
  // compressed sparse rows, full (both halves) symmetric storage
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
  std::vector<double> rhs;
  std::vector<std::pair<int, double>> dirichlet;  // node -> prescribed value

  std::size_t size() const { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }
  std::vector<double> multiply(const std::vector<double>& x) const;
  // max |K_ij - K_ji| / max|K|, checked by tests against 1e-12
  double symmetry_defect() const;
};

using CoeffFn = std::function<SymMat2(std::size_t /*triangle*/)>;

// Stiffness matrix for grad . (A grad u) with per-triangle symmetric A.
SparseSystem assemble_diffusion(MeshPtr mesh, const CoeffFn& coeff);

// rhs_i += int_Omega f phi_i, edge-midpoint quadrature (exact for P1 f)
void add_load(SparseSystem& sys, const std::function<double(const Vec2&)>& f);
// rhs_i += sign * int_Omega q . grad phi_i for piecewise-constant q
void add_vector_divergence_load(SparseSystem& sys, const VectorField& q, double sign);

// Direct sparse solve (LDL^T after symmetric elimination of the Dirichlet
// constraints). Post-condition: ||K x - b||_2 <= 1e-10 ||b||_2 on the
// eliminated system; violation raises NumericalError with the residual.
ScalarField solve(const SparseSystem& system);

// Factorization handle for repeated solves with the same matrix and
// constraint set (the right-hand side and constraint values may change).
class FactorizedSystem {
public:
  explicit FactorizedSystem(const SparseSystem& system);
  ~FactorizedSystem();
  FactorizedSystem(FactorizedSystem&&) noexcept;
  FactorizedSystem& operator=(FactorizedSystem&&) noexcept;

  ScalarField solve(const std::vector<double>& rhs,
                    const std::vector<std::pair<int, double>>& dirichlet) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Per-triangle gradient of the P1 interpolant.
VectorField gradient(const ScalarField& field);

// Quadratures and norms used throughout the reconstruction modules.
double integrate_p1_squared(const ScalarField& f);      // int f^2 (exact for P1)
double l2_norm(const ScalarField& f);                   // sqrt(int f^2)
double l2_norm(const VectorField& v);                   // sqrt(sum a_T |v_T|^2)
double l1_norm(const VectorField& v);                   // sum a_T |v_T|
double h1_seminorm(const ScalarField& f);               // ||grad f||_L2
double h1_norm(const ScalarField& f);                   // sqrt(L2^2 + seminorm^2)

}  // namespace ulfit
