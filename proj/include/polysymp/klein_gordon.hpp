#pragma once

// Klein-Gordon field dynamics in covariant Hamiltonian form. The field
// theory has HH = 1/2 g_{mu nu} p^mu p^nu + 1/2 m^2 v^2 over an n-dimensional
// base with metric diag(+1, -1, ..., -1), x^0 = t. A classical solution
// phi(x) induces the section
//
//   gamma(x) = (x, phi(x), p^mu = g^{mu nu} d_nu phi, e = -HH o gamma)
//
// whose tangent lifts Z_mu = d_mu + (d_mu phi) d_v + (d_mu p^nu) d_{p^nu}
// + (Z_mu)_e d_e wedge (after a factor flip) into a decomposable solution
// X = (-Z_0) ^...^ (-Z_{n-1}) of X _| Omega = dH. This header provides the
// 1+1-dimensional grid machinery (leapfrog integration, discrete lifts,
// grid-backed vector fields) and exact plane-wave solutions in any n.

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "decomposition.hpp"
#include "exterior.hpp"
#include "phase_space.hpp"
#include "schouten.hpp"

namespace polysymp {

struct KGParams {
  int n = 2;        // base dimension (one time + n-1 space)
  double mass = 1.0;

  Metric metric() const { return Metric::minkowski(n); }
  PhaseSpaceShape shape(bool extended) const { return PhaseSpaceShape{n, 1, extended}; }
};

// HH(v, p) = 1/2 g_{mu nu} p^mu p^nu + 1/2 m^2 v^2 on the non-extended
// space, with its analytic gradient.
inline ScalarField dw_hamiltonian(const KGParams& params) {
  const PhaseSpaceShape shape = params.shape(false);
  const std::vector<double> g = params.metric().diag;
  const double m2 = params.mass * params.mass;
  auto eval = [g, m2](const PhasePoint& at) {
    double s = 0.5 * m2 * at.v[0] * at.v[0];
    for (size_t mu = 0; mu < g.size(); ++mu) s += 0.5 * g[mu] * at.p[mu] * at.p[mu];
    return s;
  };
  auto grad = [g, m2, shape](const PhasePoint& at) {
    std::vector<double> out(shape.dim(), 0.0);
    out[shape.n] = m2 * at.v[0];
    for (size_t mu = 0; mu < g.size(); ++mu) out[shape.n + 1 + mu] = g[mu] * at.p[mu];
    return out;
  };
  return ScalarField(shape, std::move(eval), std::move(grad));
}

// First jet of a field configuration: base point, field value, and the
// lower-index derivatives d_mu phi.
struct JetPoint {
  std::vector<double> x;
  double v = 0.0;
  std::vector<double> dv;
};

// Covariant Legendre transform: p^mu = g^{mu nu} d_nu phi and
// e = L - (d_mu phi) p^mu = -HH. Returns the extended phase point over the
// jet.
inline PhasePoint legendre(const KGParams& params, const JetPoint& jet) {
  if (static_cast<int>(jet.x.size()) != params.n || static_cast<int>(jet.dv.size()) != params.n)
    throw std::invalid_argument("legendre: jet dimension mismatch");
  const std::vector<double> g = params.metric().diag;  // diagonal +-1: g^{mu mu} = g_{mu mu}
  PhasePoint pt = PhasePoint::zero(params.shape(true));
  pt.x = jet.x;
  pt.v[0] = jet.v;
  double h = 0.5 * params.mass * params.mass * jet.v * jet.v;
  for (int mu = 0; mu < params.n; ++mu) {
    pt.p[mu] = g[mu] * jet.dv[mu];
    h += 0.5 * g[mu] * pt.p[mu] * pt.p[mu];
  }
  pt.e = -h;
  return pt;
}

// Recovers the jet derivatives from the momenta (the inverse field-velocity
// relation d_mu phi = g_{mu nu} p^nu).
inline std::vector<double> legendre_velocities(const KGParams& params, const PhasePoint& pt) {
  const std::vector<double> g = params.metric().diag;
  std::vector<double> dv(params.n, 0.0);
  for (int mu = 0; mu < params.n; ++mu) dv[mu] = g[mu] * pt.p[mu];
  return dv;
}

// --- 1+1-dimensional periodic grid ------------------------------------------

struct GridSpec {
  double length = 2.0 * M_PI;  // spatial period
  int nx = 64;
  double dt = 0.0;
  int steps = 0;
  double x0 = 0.0;

  double dx() const { return length / nx; }
};

// Rows are time levels (steps + 1 of them), columns the nx periodic spatial
// nodes. pi_t = p^t = d_t phi, pi_x = p^x = -d_x phi (central differences),
// energy = 1/2 pi_t^2 + 1/2 (d_x phi)^2 + 1/2 m^2 phi^2.
struct FieldSolution {
  KGParams params;
  GridSpec grid;
  std::vector<double> phi, pi_t, pi_x, energy;

  size_t index(int k, int i) const { return static_cast<size_t>(k) * grid.nx + i; }
  int wrap(int i) const { return ((i % grid.nx) + grid.nx) % grid.nx; }
  double time(int k) const { return k * grid.dt; }
  double x(int i) const { return grid.x0 + i * grid.dx(); }

  // Central differences of a stored grid array; time requires an interior
  // level, space wraps periodically.
  double dt_of(const std::vector<double>& a, int k, int i) const {
    if (k < 1 || k > grid.steps - 1) throw std::out_of_range("FieldSolution: time derivative needs an interior level");
    return (a[index(k + 1, i)] - a[index(k - 1, i)]) / (2.0 * grid.dt);
  }
  double dx_of(const std::vector<double>& a, int k, int i) const {
    return (a[index(k, wrap(i + 1))] - a[index(k, wrap(i - 1))]) / (2.0 * grid.dx());
  }
};

// Leapfrog (kick-drift-kick) integration of d_t phi = pi, d_t pi = phi_xx -
// m^2 phi on the periodic grid. Refuses time steps beyond the stability
// bound dt <= dx.
inline FieldSolution integrate_kg(const KGParams& params, const GridSpec& grid,
                                  std::span<const double> phi0, std::span<const double> pi0) {
  if (params.n != 2) throw std::invalid_argument("integrate_kg: grid integration is 1+1-dimensional (n = 2)");
  if (grid.nx < 4) throw std::invalid_argument("integrate_kg: need at least 4 spatial nodes");
  if (grid.steps < 1 || grid.dt <= 0.0) throw std::invalid_argument("integrate_kg: bad time grid");
  if (static_cast<int>(phi0.size()) != grid.nx || static_cast<int>(pi0.size()) != grid.nx)
    throw std::invalid_argument("integrate_kg: initial data size mismatch");
  if (grid.dt > grid.dx()) throw std::invalid_argument("integrate_kg: time step violates the stability bound dt <= dx");

  const int nx = grid.nx;
  const double dx2 = grid.dx() * grid.dx();
  const double m2 = params.mass * params.mass;
  auto wrap = [nx](int i) { return ((i % nx) + nx) % nx; };
  auto force = [&](const std::vector<double>& f, int i) {
    return (f[wrap(i + 1)] - 2.0 * f[i] + f[wrap(i - 1)]) / dx2 - m2 * f[i];
  };

  FieldSolution sol;
  sol.params = params;
  sol.grid = grid;
  const size_t total = static_cast<size_t>(grid.steps + 1) * nx;
  sol.phi.resize(total);
  sol.pi_t.resize(total);
  sol.pi_x.resize(total);
  sol.energy.resize(total);

  std::vector<double> f(phi0.begin(), phi0.end());
  std::vector<double> pi(pi0.begin(), pi0.end());
  std::vector<double> half(nx);
  auto store = [&](int k) {
    for (int i = 0; i < nx; ++i) {
      sol.phi[sol.index(k, i)] = f[i];
      sol.pi_t[sol.index(k, i)] = pi[i];
    }
  };
  store(0);
  for (int k = 0; k < grid.steps; ++k) {
    for (int i = 0; i < nx; ++i) half[i] = pi[i] + 0.5 * grid.dt * force(f, i);
    for (int i = 0; i < nx; ++i) f[i] += grid.dt * half[i];
    for (int i = 0; i < nx; ++i) pi[i] = half[i] + 0.5 * grid.dt * force(f, i);
    store(k + 1);
  }

  for (int k = 0; k <= grid.steps; ++k) {
    for (int i = 0; i < nx; ++i) {
      const double dphi = sol.dx_of(sol.phi, k, i);
      const double p = sol.pi_t[sol.index(k, i)];
      const double v = sol.phi[sol.index(k, i)];
      sol.pi_x[sol.index(k, i)] = -dphi;
      sol.energy[sol.index(k, i)] = 0.5 * p * p + 0.5 * dphi * dphi + 0.5 * m2 * v * v;
    }
  }
  return sol;
}

// The section point gamma(t_k, x_i) on the extended space, with e = -HH so
// that the standard-form Hamiltonian vanishes along the solution.
inline PhasePoint section_point(const FieldSolution& sol, int k, int i) {
  PhasePoint pt = PhasePoint::zero(sol.params.shape(true));
  pt.x = {sol.time(k), sol.x(i)};
  pt.v[0] = sol.phi[sol.index(k, i)];
  pt.p[0] = sol.pi_t[sol.index(k, i)];
  pt.p[1] = sol.pi_x[sol.index(k, i)];
  const double m2 = sol.params.mass * sol.params.mass;
  pt.e = -(0.5 * pt.p[0] * pt.p[0] - 0.5 * pt.p[1] * pt.p[1] + 0.5 * m2 * pt.v[0] * pt.v[0]);
  return pt;
}

namespace detail {

// Components of the lifted tangent field Z_mu at a grid node, in flat
// coordinate order (t, x, v, p^t, p^x, e). The e-component is the chain rule
// d_mu(-HH o gamma) assembled from first differences.
inline std::array<double, 6> lifted_components(const FieldSolution& sol, int mu, int k, int i) {
  const double m2 = sol.params.mass * sol.params.mass;
  auto d_of = [&](const std::vector<double>& a) {
    return mu == 0 ? sol.dt_of(a, k, i) : sol.dx_of(a, k, i);
  };
  const double dphi = d_of(sol.phi);
  const double dpt = d_of(sol.pi_t);
  const double dpx = d_of(sol.pi_x);
  const double v = sol.phi[sol.index(k, i)];
  const double pt = sol.pi_t[sol.index(k, i)];
  const double px = sol.pi_x[sol.index(k, i)];
  std::array<double, 6> z{};
  z[mu] = 1.0;
  z[2] = dphi;
  z[3] = dpt;
  z[4] = dpx;
  z[5] = -(m2 * v * dphi + pt * dpt - px * dpx);
  return z;
}

}  // namespace detail

struct SectionLift {
  PhasePoint point;
  std::vector<Multivector> z;  // lifted tangents Z_mu (coefficient +1 on d_mu)

  // The decomposable solution candidate X = (-Z_0) ^...^ (-Z_{n-1}).
  Multivector hamvec() const {
    Multivector x = z.at(0) * -1.0;
    for (size_t mu = 1; mu < z.size(); ++mu) x = wedge(x, z[mu] * -1.0);
    return x;
  }
};

// Discrete lift at an interior grid node: section point plus the two tangent
// fields from central differences.
inline SectionLift lift(const FieldSolution& sol, int k, int i) {
  if (k < 1 || k > sol.grid.steps - 1) throw std::out_of_range("lift: interior time level required");
  SectionLift out;
  out.point = section_point(sol, k, i);
  const GradedBasis basis = sol.params.shape(true).basis();
  for (int mu = 0; mu < 2; ++mu) {
    const std::array<double, 6> c = detail::lifted_components(sol, mu, k, i);
    out.z.push_back(vector_from_components(basis, c));
  }
  return out;
}

struct Prop2Report {
  ResidualReport residual;
  double h_on_section = 0.0;
};

// Residual of X _| Omega = dH for the lifted solution candidate at a node,
// plus the value of the standard-form Hamiltonian on the section (zero for
// honest solutions by the choice of e).
inline Prop2Report verify_solution_lift(const FieldSolution& sol, int k, int i) {
  const ScalarField h = extended_hamiltonian(dw_hamiltonian(sol.params));
  const SectionLift l = lift(sol, k, i);
  Prop2Report report;
  report.residual = verify_hamvec(l.hamvec(), h, l.point);
  report.h_on_section = h.value(l.point);
  return report;
}

// Grid-backed vector fields Z_0, Z_1 on the extended space: fibre-constant,
// evaluated by snapping the horizontal coordinates to the nearest node.
// Jacobians are central differences of the component arrays, so only the
// horizontal columns are populated. Component evaluation needs one interior
// time level, Jacobians two.
inline std::vector<VectorField> lift_fields(const FieldSolution& sol) {
  auto shared = std::make_shared<const FieldSolution>(sol);
  const int dim = sol.params.shape(true).dim();

  auto snap = [shared](std::span<const double> q) {
    const GridSpec& g = shared->grid;
    const int k = static_cast<int>(std::lround(q[0] / g.dt));
    const int i = shared->wrap(static_cast<int>(std::lround((q[1] - g.x0) / g.dx())));
    return std::pair<int, int>{k, i};
  };

  std::vector<VectorField> fields;
  for (int mu = 0; mu < 2; ++mu) {
    VectorField f;
    f.dim = dim;
    f.components = [shared, snap, mu](std::span<const double> q) {
      const auto [k, i] = snap(q);
      const std::array<double, 6> c = detail::lifted_components(*shared, mu, k, i);
      return std::vector<double>(c.begin(), c.end());
    };
    f.jacobian = [shared, snap, mu, dim](std::span<const double> q) {
      const auto [k, i] = snap(q);
      if (k < 2 || k > shared->grid.steps - 2)
        throw std::out_of_range("lift_fields: Jacobian needs two interior time levels");
      Matrix j(dim, dim);
      const auto tp = detail::lifted_components(*shared, mu, k + 1, i);
      const auto tm = detail::lifted_components(*shared, mu, k - 1, i);
      const auto xp = detail::lifted_components(*shared, mu, k, shared->wrap(i + 1));
      const auto xm = detail::lifted_components(*shared, mu, k, shared->wrap(i - 1));
      for (int r = 0; r < dim; ++r) {
        j(r, 0) = (tp[r] - tm[r]) / (2.0 * shared->grid.dt);
        j(r, 1) = (xp[r] - xm[r]) / (2.0 * shared->grid.dx());
      }
      return j;
    };
    fields.push_back(std::move(f));
  }
  return fields;
}

// Max-norm residual of the discrete energy balance d_t energy + d_x flux = 0
// with flux = pi_t pi_x, over all interior nodes.
inline double energy_flux_residual(const FieldSolution& sol) {
  double worst = 0.0;
  for (int k = 1; k <= sol.grid.steps - 1; ++k) {
    for (int i = 0; i < sol.grid.nx; ++i) {
      double dflux = (sol.pi_t[sol.index(k, sol.wrap(i + 1))] * sol.pi_x[sol.index(k, sol.wrap(i + 1))] -
                      sol.pi_t[sol.index(k, sol.wrap(i - 1))] * sol.pi_x[sol.index(k, sol.wrap(i - 1))]) /
                     (2.0 * sol.grid.dx());
      worst = std::max(worst, std::fabs(sol.dt_of(sol.energy, k, i) + dflux));
    }
  }
  return worst;
}

// --- Exact solutions ---------------------------------------------------------

// phi = A cos(k . x_spatial - omega t + theta), omega^2 = |k|^2 + m^2.
struct PlaneWave {
  int n = 2;
  double mass = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;
  std::vector<double> k;  // spatial wave numbers, size n - 1

  double omega() const {
    double k2 = 0.0;
    for (double kj : k) k2 += kj * kj;
    return std::sqrt(k2 + mass * mass);
  }

  double u(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n || static_cast<int>(k.size()) != n - 1)
      throw std::invalid_argument("PlaneWave: dimension mismatch");
    double s = phase - omega() * x[0];
    for (int j = 0; j + 1 < n; ++j) s += k[j] * x[j + 1];
    return s;
  }

  double value(std::span<const double> x) const { return amplitude * std::cos(u(x)); }

  // Lower-index derivatives d_mu phi.
  std::vector<double> gradient(std::span<const double> x) const {
    const double s = amplitude * std::sin(u(x));
    std::vector<double> g(n, 0.0);
    g[0] = omega() * s;
    for (int j = 0; j + 1 < n; ++j) g[j + 1] = -k[j] * s;
    return g;
  }

  Matrix hessian(std::span<const double> x) const {
    std::vector<double> c(n, 0.0);
    c[0] = -omega();
    for (int j = 0; j + 1 < n; ++j) c[j + 1] = k[j];
    const double f = -amplitude * std::cos(u(x));
    Matrix h(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) h(a, b) = f * c[a] * c[b];
    return h;
  }
};

// A smooth field configuration with enough derivatives for analytic lifts.
struct ScalarSolution {
  int n = 0;
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;  // lower index
  std::function<Matrix(std::span<const double>)> hessian;
};

inline ScalarSolution plane_wave_solution(const PlaneWave& w) {
  ScalarSolution s;
  s.n = w.n;
  s.value = [w](std::span<const double> x) { return w.value(x); };
  s.gradient = [w](std::span<const double> x) { return w.gradient(x); };
  s.hessian = [w](std::span<const double> x) { return w.hessian(x); };
  return s;
}

// Node-snapped grid adapter (derivatives by central differences; interior
// time levels only).
inline ScalarSolution grid_solution(const FieldSolution& sol) {
  auto shared = std::make_shared<const FieldSolution>(sol);
  auto snap = [shared](std::span<const double> q) {
    const int k = static_cast<int>(std::lround(q[0] / shared->grid.dt));
    const int i = shared->wrap(static_cast<int>(std::lround((q[1] - shared->grid.x0) / shared->grid.dx())));
    return std::pair<int, int>{k, i};
  };
  ScalarSolution s;
  s.n = 2;
  s.value = [shared, snap](std::span<const double> x) {
    const auto [k, i] = snap(x);
    return shared->phi[shared->index(k, i)];
  };
  s.gradient = [shared, snap](std::span<const double> x) {
    const auto [k, i] = snap(x);
    return std::vector<double>{shared->dt_of(shared->phi, k, i), shared->dx_of(shared->phi, k, i)};
  };
  s.hessian = [shared, snap](std::span<const double> x) {
    const auto [k, i] = snap(x);
    const FieldSolution& f = *shared;
    if (k < 1 || k > f.grid.steps - 1) throw std::out_of_range("grid_solution: interior time level required");
    const double dt2 = f.grid.dt * f.grid.dt;
    const double dx2 = f.grid.dx() * f.grid.dx();
    Matrix h(2, 2);
    h(0, 0) = (f.phi[f.index(k + 1, i)] - 2.0 * f.phi[f.index(k, i)] + f.phi[f.index(k - 1, i)]) / dt2;
    h(1, 1) = (f.phi[f.index(k, f.wrap(i + 1))] - 2.0 * f.phi[f.index(k, i)] + f.phi[f.index(k, f.wrap(i - 1))]) / dx2;
    h(0, 1) = h(1, 0) = (f.dx_of(f.phi, k + 1, i) - f.dx_of(f.phi, k - 1, i)) / (2.0 * f.grid.dt);
    return h;
  };
  return s;
}

// Analytic section point over an exact solution (any n).
inline PhasePoint analytic_section_point(const KGParams& params, const ScalarSolution& sol,
                                         std::span<const double> x) {
  if (sol.n != params.n) throw std::invalid_argument("analytic_section_point: dimension mismatch");
  JetPoint jet;
  jet.x.assign(x.begin(), x.end());
  jet.v = sol.value(x);
  jet.dv = sol.gradient(x);
  return legendre(params, jet);
}

// Analytic lift: tangent fields Z_mu from the exact derivatives, pointwise
// in any base dimension.
inline SectionLift analytic_lift(const KGParams& params, const ScalarSolution& sol,
                                 std::span<const double> x) {
  SectionLift out;
  out.point = analytic_section_point(params, sol, x);
  const GradedBasis basis = params.shape(true).basis();
  const std::vector<double> g = params.metric().diag;
  const std::vector<double> dv = sol.gradient(x);
  const Matrix hess = sol.hessian(x);
  const double m2 = params.mass * params.mass;
  for (int mu = 0; mu < params.n; ++mu) {
    std::vector<double> z(basis.dim(), 0.0);
    z[mu] = 1.0;
    z[params.n] = dv[mu];
    double de = m2 * out.point.v[0] * dv[mu];
    for (int nu = 0; nu < params.n; ++nu) {
      const double dp = g[nu] * hess(mu, nu);  // d_mu p^nu
      z[params.n + 1 + nu] = dp;
      de += g[nu] * out.point.p[nu] * dp;
    }
    z[basis.e_index()] = -de;
    out.z.push_back(vector_from_components(basis, z));
  }
  return out;
}

// Sample a plane wave's t = 0 data onto the grid (n = 2).
inline void plane_wave_initial(const PlaneWave& w, const GridSpec& grid,
                               std::vector<double>& phi0, std::vector<double>& pi0) {
  if (w.n != 2) throw std::invalid_argument("plane_wave_initial: n = 2 required");
  phi0.resize(grid.nx);
  pi0.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    const double x[2] = {0.0, grid.x0 + i * grid.dx()};
    phi0[i] = w.value(x);
    pi0[i] = w.gradient(x)[0];
  }
}

inline void write_solution_csv(const FieldSolution& sol, std::ostream& os) {
  os << "t,x,phi,pi_t,pi_x,energy\n";
  char buf[160];
  for (int k = 0; k <= sol.grid.steps; ++k) {
    for (int i = 0; i < sol.grid.nx; ++i) {
      const size_t idx = sol.index(k, i);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", sol.time(k), sol.x(i),
                    sol.phi[idx], sol.pi_t[idx], sol.pi_x[idx], sol.energy[idx]);
      os << buf;
    }
  }
}

// Observed order from residuals at two resolutions differing by `ratio`.
inline double convergence_order(double coarse, double fine, double ratio = 2.0) {
  if (coarse <= 0.0 || fine <= 0.0) throw std::invalid_argument("convergence_order: residuals must be positive");
  return std::log(coarse / fine) / std::log(ratio);
}

}  // namespace polysymp
