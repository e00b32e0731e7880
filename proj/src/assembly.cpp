#include "ulfit/assembly.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>

#include "ulfit/errors.hpp"

namespace ulfit {

namespace {

// gradients of the three barycentric basis functions and the triangle area
struct P1Element {
  Vec2 grad[3];
  double area;
};

P1Element p1_element(const TriMesh& mesh, std::size_t t, double area_floor) {
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.nodes[tri[0]];
  const Vec2& p1 = mesh.nodes[tri[1]];
  const Vec2& p2 = mesh.nodes[tri[2]];
  double twice_area = cross(p1 - p0, p2 - p0);
  if (twice_area <= 2.0 * area_floor)
    throw GeometryError("assembly: degenerate triangle " + std::to_string(t));
  P1Element e;
  e.area = 0.5 * twice_area;
  e.grad[0] = perp(p2 - p1) / twice_area;
  e.grad[1] = perp(p0 - p2) / twice_area;
  e.grad[2] = perp(p1 - p0) / twice_area;
  return e;
}

double mesh_area_floor(const TriMesh& mesh) {
  Vec2 lo, hi;
  mesh.bbox(lo, hi);
  return 1e-14 * (hi.x - lo.x) * (hi.y - lo.y);
}

}  // namespace

std::vector<double> SparseSystem::multiply(const std::vector<double>& x) const {
  std::vector<double> y(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) y[i] += val[k] * x[col[k]];
  return y;
}

double SparseSystem::symmetry_defect() const {
  double max_entry = 0.0, max_diff = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      int j = col[k];
      max_entry = std::max(max_entry, std::abs(val[k]));
      double vji = 0.0;
      for (int l = row_ptr[j]; l < row_ptr[j + 1]; ++l)
        if (col[l] == static_cast<int>(i)) vji = val[l];
      max_diff = std::max(max_diff, std::abs(val[k] - vji));
    }
  }
  return max_entry > 0 ? max_diff / max_entry : 0.0;
}

SparseSystem assemble_diffusion(MeshPtr mesh, const CoeffFn& coeff) {
  const std::size_t n = mesh->node_count();
  const double floor = mesh_area_floor(*mesh);

  // triplet accumulation per row keeps the triangle loop deterministic
  std::vector<std::map<int, double>> rows(n);
  for (std::size_t t = 0; t < mesh->triangle_count(); ++t) {
    P1Element e = p1_element(*mesh, t, floor);
    SymMat2 a = coeff(t);
    const auto& tri = mesh->triangles[t];
    for (int i = 0; i < 3; ++i) {
      Vec2 agi = a.apply(e.grad[i]);
      for (int j = 0; j < 3; ++j)
        rows[tri[i]][tri[j]] += e.area * dot(agi, e.grad[j]);
    }
  }

  SparseSystem sys;
  sys.mesh = std::move(mesh);
  sys.row_ptr.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    sys.row_ptr[i + 1] = sys.row_ptr[i] + static_cast<int>(rows[i].size());
  sys.col.reserve(sys.row_ptr[n]);
  sys.val.reserve(sys.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, v] : rows[i]) {
      sys.col.push_back(j);
      sys.val.push_back(v);
    }
  sys.rhs.assign(n, 0.0);
  return sys;
}

void add_load(SparseSystem& sys, const std::function<double(const Vec2&)>& f) {
  const TriMesh& mesh = *sys.mesh;
  const double floor = mesh_area_floor(mesh);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    P1Element e = p1_element(mesh, t, floor);
    const auto& tri = mesh.triangles[t];
    // edge-midpoint rule; phi_i at the midpoints opposite/adjacent: 0, 1/2, 1/2
    Vec2 m01 = (mesh.nodes[tri[0]] + mesh.nodes[tri[1]]) * 0.5;
    Vec2 m12 = (mesh.nodes[tri[1]] + mesh.nodes[tri[2]]) * 0.5;
    Vec2 m20 = (mesh.nodes[tri[2]] + mesh.nodes[tri[0]]) * 0.5;
    double f01 = f(m01), f12 = f(m12), f20 = f(m20);
    sys.rhs[tri[0]] += e.area / 3.0 * 0.5 * (f01 + f20);
    sys.rhs[tri[1]] += e.area / 3.0 * 0.5 * (f01 + f12);
    sys.rhs[tri[2]] += e.area / 3.0 * 0.5 * (f12 + f20);
  }
}

void add_vector_divergence_load(SparseSystem& sys, const VectorField& q, double sign) {
  const TriMesh& mesh = *sys.mesh;
  if (q.values.size() != mesh.triangle_count())
    throw ValidationError("add_vector_divergence_load: field/mesh mismatch");
  const double floor = mesh_area_floor(mesh);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    P1Element e = p1_element(mesh, t, floor);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      sys.rhs[tri[i]] += sign * e.area * dot(q.values[t], e.grad[i]);
  }
}

// --- solve -------------------------------------------------------------------

struct FactorizedSystem::Impl {
  MeshPtr mesh;
  Eigen::SparseMatrix<double> reduced;   // after symmetric elimination
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  std::vector<int> full_to_red;          // -1 for constrained nodes
  std::vector<int> red_to_full;
  // entries K(i, j) with i free and j constrained, to lift constraint
  // values into the reduced right-hand side
  struct LiftEntry {
    int red_row;
    int constrained_node;
    double value;
  };
  std::vector<LiftEntry> lift;
};

FactorizedSystem::FactorizedSystem(const SparseSystem& system) : impl_(new Impl) {
  const std::size_t n = system.size();
  impl_->mesh = system.mesh;
  impl_->full_to_red.assign(n, 0);
  for (const auto& [node, value] : system.dirichlet) {
    (void)value;
    if (node < 0 || node >= static_cast<int>(n))
      throw ValidationError("solve: Dirichlet node out of range");
    impl_->full_to_red[node] = -1;
  }
  impl_->red_to_full.reserve(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (impl_->full_to_red[i] == 0) {
      impl_->full_to_red[i] = next++;
      impl_->red_to_full.push_back(static_cast<int>(i));
    }
  }
  const int m = next;
  if (m == 0) throw ValidationError("solve: every node constrained");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(system.val.size());
  for (std::size_t i = 0; i < n; ++i) {
    int ri = impl_->full_to_red[i];
    if (ri < 0) continue;
    for (int k = system.row_ptr[i]; k < system.row_ptr[i + 1]; ++k) {
      int j = system.col[k];
      int rj = impl_->full_to_red[j];
      if (rj >= 0)
        trips.emplace_back(ri, rj, system.val[k]);
      else
        impl_->lift.push_back({ri, j, system.val[k]});
    }
  }
  impl_->reduced.resize(m, m);
  impl_->reduced.setFromTriplets(trips.begin(), trips.end());
  impl_->ldlt.compute(impl_->reduced);
  if (impl_->ldlt.info() != Eigen::Success)
    throw NumericalError("solve: sparse factorization failed");
  // the eliminated system must be positive definite
  if (impl_->ldlt.vectorD().minCoeff() <= 0)
    throw NumericalError("solve: matrix is not positive definite after elimination");
}

FactorizedSystem::~FactorizedSystem() = default;
FactorizedSystem::FactorizedSystem(FactorizedSystem&&) noexcept = default;
FactorizedSystem& FactorizedSystem::operator=(FactorizedSystem&&) noexcept = default;

ScalarField FactorizedSystem::solve(const std::vector<double>& rhs,
                                    const std::vector<std::pair<int, double>>& dirichlet) const {
  const std::size_t n = impl_->full_to_red.size();
  if (rhs.size() != n) throw ValidationError("solve: rhs size mismatch");

  std::vector<double> g(n, 0.0);
  for (const auto& [node, value] : dirichlet) {
    if (node < 0 || node >= static_cast<int>(n) || impl_->full_to_red[node] >= 0)
      throw ValidationError("solve: constraint set differs from factorized system");
    g[node] = value;
  }

  // b_red = rhs - K[:,constrained] g
  const int m = static_cast<int>(impl_->red_to_full.size());
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) b(r) = rhs[impl_->red_to_full[r]];
  for (const auto& e : impl_->lift) b(e.red_row) -= e.value * g[e.constrained_node];

  Eigen::VectorXd x = impl_->ldlt.solve(b);
  if (impl_->ldlt.info() != Eigen::Success)
    throw NumericalError("solve: back substitution failed");

  double rnorm = (impl_->reduced * x - b).norm();
  double bnorm = b.norm();
  if (bnorm > 0 && rnorm > 1e-10 * bnorm) {
    // one step of iterative refinement before giving up
    Eigen::VectorXd dx = impl_->ldlt.solve(b - impl_->reduced * x);
    x += dx;
    rnorm = (impl_->reduced * x - b).norm();
    if (rnorm > 1e-10 * bnorm)
      throw NumericalError("solve: residual " + std::to_string(rnorm / bnorm) +
                           " exceeds 1e-10 relative tolerance");
  }

  ScalarField u(impl_->mesh);
  for (std::size_t i = 0; i < n; ++i) u.values[i] = g[i];
  for (int r = 0; r < m; ++r) u.values[impl_->red_to_full[r]] = x(r);
  return u;
}

ScalarField solve(const SparseSystem& system) {
  FactorizedSystem f(system);
  return f.solve(system.rhs, system.dirichlet);
}

VectorField gradient(const ScalarField& field) {
  const TriMesh& mesh = *field.mesh;
  if (field.values.size() != mesh.node_count())
    throw ValidationError("gradient: field/mesh mismatch");
  const double floor = mesh_area_floor(mesh);
  VectorField g(field.mesh);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    P1Element e = p1_element(mesh, t, floor);
    const auto& tri = mesh.triangles[t];
    Vec2 v{0.0, 0.0};
    for (int i = 0; i < 3; ++i) v += field.values[tri[i]] * e.grad[i];
    g.values[t] = v;
  }
  return g;
}

double integrate_p1_squared(const ScalarField& f) {
  const TriMesh& mesh = *f.mesh;
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double a = mesh.signed_area(t);
    double v0 = f.values[tri[0]], v1 = f.values[tri[1]], v2 = f.values[tri[2]];
    acc += a / 6.0 * (v0 * v0 + v1 * v1 + v2 * v2 + v0 * v1 + v1 * v2 + v2 * v0);
  }
  return acc;
}

double l2_norm(const ScalarField& f) { return std::sqrt(integrate_p1_squared(f)); }

double l2_norm(const VectorField& v) {
  double acc = 0.0;
  for (std::size_t t = 0; t < v.mesh->triangle_count(); ++t)
    acc += v.mesh->signed_area(t) * norm2(v.values[t]);
  return std::sqrt(acc);
}

double l1_norm(const VectorField& v) {
  double acc = 0.0;
  for (std::size_t t = 0; t < v.mesh->triangle_count(); ++t)
    acc += v.mesh->signed_area(t) * norm(v.values[t]);
  return acc;
}

double h1_seminorm(const ScalarField& f) { return l2_norm(gradient(f)); }

double h1_norm(const ScalarField& f) {
  double a = integrate_p1_squared(f);
  double b = h1_seminorm(f);
  return std::sqrt(a + b * b);
}

}  // namespace ulfit
