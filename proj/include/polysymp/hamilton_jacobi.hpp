#pragma once

// Covariant Hamilton-Jacobi machinery. A momentum map T assigns to each
// (x, v) the momenta T^mu_A(x, v) and an energy T_0(x, v); embedding graphs
// of solutions requires four pointwise conditions (residuals r1..r4 below).
// Maps induced by a family of generating functions S^mu(x, v) via
// T^mu_A = d_A S^mu, T_0 = d_mu S^mu satisfy the symmetry condition
// identically, and the divergence/horizontal conditions reduce to the
// Hamilton-Jacobi equation d_mu S^mu + HH(x, v, d_A S^mu) = 0.
//
// The header also provides the adapted trivialisation of the Klein-Gordon
// theory around a fixed solution Phi (fibre coordinate w = v - Phi(x)), in
// which the induced map satisfies the conditions up to |m^2 w|, and a
// numerical consistency probe for the defining relation on the space
// without the energy coordinate, X _| Omega_vertical = s_n d_vert HH with
// s_n = (-1)^(n+1): the probe assembles the exact linear system for the
// momentum components of the factors and measures its least-squares
// residual. The relation is solvable precisely when n = 1 or the potential
// has vanishing fibre gradient.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "exterior.hpp"
#include "klein_gordon.hpp"
#include "linalg.hpp"
#include "phase_space.hpp"

namespace polysymp {

struct TValue {
  std::vector<double> tmu;  // n*fibre, mu-major: T^mu_A
  double t0 = 0.0;
};

struct TPartials {
  Matrix dx_tmu;              // (n*fibre) x n: d T^mu_A / d x^nu
  Matrix dv_tmu;              // (n*fibre) x fibre: d T^mu_A / d v^B
  std::vector<double> dx_t0;  // n
  std::vector<double> dv_t0;  // fibre
};

struct TMap {
  int n = 0, fibre = 0;
  std::function<TValue(std::span<const double>, std::span<const double>)> eval;
  // Optional analytic partials; otherwise central differences of eval with
  // step fd_step * (1 + |coordinate|).
  std::function<TPartials(std::span<const double>, std::span<const double>)> partials;
  double fd_step = 1e-5;
};

inline TValue t_eval(const TMap& t, std::span<const double> x, std::span<const double> v) {
  if (static_cast<int>(x.size()) != t.n || static_cast<int>(v.size()) != t.fibre)
    throw std::invalid_argument("t_eval: argument size mismatch");
  TValue val = t.eval(x, v);
  if (static_cast<int>(val.tmu.size()) != t.n * t.fibre)
    throw std::runtime_error("t_eval: momentum block size mismatch");
  return val;
}

inline TPartials t_partials(const TMap& t, std::span<const double> x, std::span<const double> v) {
  if (t.partials) return t.partials(x, v);
  const int rows = t.n * t.fibre;
  TPartials out;
  out.dx_tmu = Matrix(rows, t.n);
  out.dv_tmu = Matrix(rows, t.fibre);
  out.dx_t0.assign(t.n, 0.0);
  out.dv_t0.assign(t.fibre, 0.0);
  std::vector<double> xq(x.begin(), x.end());
  std::vector<double> vq(v.begin(), v.end());
  auto fill = [&](std::vector<double>& q, int c, Matrix& dm, std::vector<double>& d0) {
    const double h = t.fd_step * (1.0 + std::fabs(q[c]));
    const double saved = q[c];
    q[c] = saved + h;
    const TValue plus = t_eval(t, xq, vq);
    q[c] = saved - h;
    const TValue minus = t_eval(t, xq, vq);
    q[c] = saved;
    for (int r = 0; r < rows; ++r) dm(r, c) = (plus.tmu[r] - minus.tmu[r]) / (2.0 * h);
    d0[c] = (plus.t0 - minus.t0) / (2.0 * h);
  };
  for (int c = 0; c < t.n; ++c) fill(xq, c, out.dx_tmu, out.dx_t0);
  for (int c = 0; c < t.fibre; ++c) fill(vq, c, out.dv_tmu, out.dv_t0);
  return out;
}

namespace detail {

inline PhasePoint t_phase_point(const PhaseSpaceShape& shape, std::span<const double> x,
                                std::span<const double> v, const TValue& val) {
  PhasePoint pt = PhasePoint::zero(shape);
  pt.x.assign(x.begin(), x.end());
  pt.v.assign(v.begin(), v.end());
  pt.p = val.tmu;
  return pt;
}

}  // namespace detail

struct TConditionReport {
  double integrability = 0.0;  // r1: max |dHH/dp^mu_A on the image of T|
  double divergence = 0.0;     // r2: max_A |sum_mu d_mu T^mu_A + d_A HH|
  double horizontal = 0.0;     // r3: max_mu |d_mu T_0 + d_mu HH|
  double symmetry = 0.0;       // r4: max_A |sum_mu d_mu T^mu_A - d_A T_0|
  double max_abs = 0.0;
};

// The four pointwise conditions on a momentum map at (x, v), for a
// Hamiltonian density on the non-extended space.
inline TConditionReport check_T_conditions(const ScalarField& hh, const TMap& t,
                                           std::span<const double> x, std::span<const double> v) {
  const PhaseSpaceShape& shape = hh.shape();
  if (shape.extended) throw std::invalid_argument("check_T_conditions: non-extended Hamiltonian expected");
  if (shape.n != t.n || shape.fibre != t.fibre)
    throw std::invalid_argument("check_T_conditions: map and Hamiltonian shapes disagree");

  const TValue val = t_eval(t, x, v);
  const TPartials par = t_partials(t, x, v);
  const std::vector<double> g = hh.gradient(detail::t_phase_point(shape, x, v, val));
  const int n = t.n, nf = t.fibre;

  TConditionReport rep;
  for (int mu = 0; mu < n; ++mu)
    for (int a = 0; a < nf; ++a)
      rep.integrability = std::max(rep.integrability, std::fabs(g[n + nf + mu * nf + a]));
  for (int a = 0; a < nf; ++a) {
    double div = 0.0;
    for (int mu = 0; mu < n; ++mu) div += par.dx_tmu(mu * nf + a, mu);
    rep.divergence = std::max(rep.divergence, std::fabs(div + g[n + a]));
    rep.symmetry = std::max(rep.symmetry, std::fabs(div - par.dv_t0[a]));
  }
  for (int mu = 0; mu < n; ++mu)
    rep.horizontal = std::max(rep.horizontal, std::fabs(par.dx_t0[mu] + g[mu]));
  rep.max_abs = std::max(std::max(rep.integrability, rep.divergence),
                         std::max(rep.horizontal, rep.symmetry));
  return rep;
}

// Max-norm gradient of the composed standard-form Hamiltonian
// h_T(x, v) = -HH(x, v, T(x, v)) - T_0(x, v); a vanishing gradient means
// H o T is (locally) constant.
inline double closedness_residual(const ScalarField& hh, const TMap& t,
                                  std::span<const double> x, std::span<const double> v) {
  const PhaseSpaceShape& shape = hh.shape();
  if (shape.extended) throw std::invalid_argument("closedness_residual: non-extended Hamiltonian expected");
  if (shape.n != t.n || shape.fibre != t.fibre)
    throw std::invalid_argument("closedness_residual: map and Hamiltonian shapes disagree");

  const TValue val = t_eval(t, x, v);
  const TPartials par = t_partials(t, x, v);
  const std::vector<double> g = hh.gradient(detail::t_phase_point(shape, x, v, val));
  const int n = t.n, nf = t.fibre;

  double worst = 0.0;
  for (int mu = 0; mu < n; ++mu) {
    double s = g[mu] + par.dx_t0[mu];
    for (int r = 0; r < n * nf; ++r) s += g[n + nf + r] * par.dx_tmu(r, mu);
    worst = std::max(worst, std::fabs(s));
  }
  for (int a = 0; a < nf; ++a) {
    double s = g[n + a] + par.dv_t0[a];
    for (int r = 0; r < n * nf; ++r) s += g[n + nf + r] * par.dv_tmu(r, a);
    worst = std::max(worst, std::fabs(s));
  }
  return worst;
}

// A family of generating functions S^mu(x, v), with optional analytic first
// partials (dx entry (mu, nu) = d_nu S^mu, dv entry (mu, A) = d_A S^mu).
struct SFamily {
  int n = 0, fibre = 0;
  std::function<std::vector<double>(std::span<const double>, std::span<const double>)> value;
  std::function<Matrix(std::span<const double>, std::span<const double>)> dx;
  std::function<Matrix(std::span<const double>, std::span<const double>)> dv;
  double fd_step = 1e-5;
};

namespace detail {

inline Matrix s_partials(const SFamily& s, std::span<const double> x, std::span<const double> v,
                         bool horizontal) {
  if (horizontal && s.dx) return s.dx(x, v);
  if (!horizontal && s.dv) return s.dv(x, v);
  const int cols = horizontal ? s.n : s.fibre;
  Matrix out(s.n, cols);
  std::vector<double> xq(x.begin(), x.end());
  std::vector<double> vq(v.begin(), v.end());
  std::vector<double>& q = horizontal ? xq : vq;
  for (int c = 0; c < cols; ++c) {
    const double h = s.fd_step * (1.0 + std::fabs(q[c]));
    const double saved = q[c];
    q[c] = saved + h;
    const std::vector<double> plus = s.value(xq, vq);
    q[c] = saved - h;
    const std::vector<double> minus = s.value(xq, vq);
    q[c] = saved;
    for (int mu = 0; mu < s.n; ++mu) out(mu, c) = (plus[mu] - minus[mu]) / (2.0 * h);
  }
  return out;
}

}  // namespace detail

inline Matrix s_dx(const SFamily& s, std::span<const double> x, std::span<const double> v) {
  return detail::s_partials(s, x, v, true);
}
inline Matrix s_dv(const SFamily& s, std::span<const double> x, std::span<const double> v) {
  return detail::s_partials(s, x, v, false);
}

// The momentum map induced by a generating family: T^mu_A = d_A S^mu,
// T_0 = d_mu S^mu. Its partials come from differences of those first
// partials.
inline TMap induced_tmap(const SFamily& s) {
  TMap t;
  t.n = s.n;
  t.fibre = s.fibre;
  t.fd_step = s.fd_step;
  t.eval = [s](std::span<const double> x, std::span<const double> v) {
    const Matrix dv = s_dv(s, x, v);
    const Matrix dx = s_dx(s, x, v);
    TValue val;
    val.tmu.resize(static_cast<size_t>(s.n) * s.fibre);
    for (int mu = 0; mu < s.n; ++mu)
      for (int a = 0; a < s.fibre; ++a) val.tmu[mu * s.fibre + a] = dv(mu, a);
    for (int mu = 0; mu < s.n; ++mu) val.t0 += dx(mu, mu);
    return val;
  };
  return t;
}

// Residual of the Hamilton-Jacobi equation d_mu S^mu + HH(x, v, d_A S^mu)
// at (x, v).
inline double hj_residual(const SFamily& s, const ScalarField& hh, std::span<const double> x,
                          std::span<const double> v) {
  const PhaseSpaceShape& shape = hh.shape();
  if (shape.extended) throw std::invalid_argument("hj_residual: non-extended Hamiltonian expected");
  if (shape.n != s.n || shape.fibre != s.fibre)
    throw std::invalid_argument("hj_residual: family and Hamiltonian shapes disagree");
  const Matrix dx = s_dx(s, x, v);
  const Matrix dv = s_dv(s, x, v);
  PhasePoint pt = PhasePoint::zero(shape);
  pt.x.assign(x.begin(), x.end());
  pt.v.assign(v.begin(), v.end());
  for (int mu = 0; mu < s.n; ++mu)
    for (int a = 0; a < s.fibre; ++a) pt.p[mu * s.fibre + a] = dv(mu, a);
  double div = 0.0;
  for (int mu = 0; mu < s.n; ++mu) div += dx(mu, mu);
  return std::fabs(div + hh.value(pt));
}

// Generating family around a Klein-Gordon solution Phi:
// S^mu = (v - Phi/2) g^{mu nu} d_nu Phi. Solves the Hamilton-Jacobi
// equation up to 1/2 m^2 (v - Phi)^2, exactly on the graph v = Phi(x).
inline SFamily kg_hj_family(const KGParams& params, const ScalarSolution& sol) {
  if (sol.n != params.n) throw std::invalid_argument("kg_hj_family: dimension mismatch");
  SFamily s;
  s.n = params.n;
  s.fibre = 1;
  const std::vector<double> g = params.metric().diag;
  s.value = [sol, g](std::span<const double> x, std::span<const double> v) {
    const std::vector<double> dphi = sol.gradient(x);
    const double c = v[0] - 0.5 * sol.value(x);
    std::vector<double> out(sol.n, 0.0);
    for (int mu = 0; mu < sol.n; ++mu) out[mu] = c * g[mu] * dphi[mu];
    return out;
  };
  s.dx = [sol, g](std::span<const double> x, std::span<const double> v) {
    const std::vector<double> dphi = sol.gradient(x);
    const Matrix hess = sol.hessian(x);
    const double c = v[0] - 0.5 * sol.value(x);
    Matrix out(sol.n, sol.n);
    for (int mu = 0; mu < sol.n; ++mu)
      for (int nu = 0; nu < sol.n; ++nu)
        out(mu, nu) = c * g[mu] * hess(nu, mu) - 0.5 * dphi[nu] * g[mu] * dphi[mu];
    return out;
  };
  s.dv = [sol, g](std::span<const double> x, std::span<const double>) {
    const std::vector<double> dphi = sol.gradient(x);
    Matrix out(sol.n, 1);
    for (int mu = 0; mu < sol.n; ++mu) out(mu, 0) = g[mu] * dphi[mu];
    return out;
  };
  return s;
}

// Klein-Gordon theory rewritten in the trivialisation adapted to a solution
// Phi: fibre coordinate w = v - Phi(x). The Hamiltonian picks up a
// connection term,
//
//   HH(x, w, p) = 1/2 g_{mu nu} p^mu p^nu - p^mu d_mu Phi + 1/2 m^2 (w + Phi)^2,
//
// and the induced momentum map T^mu = g^{mu nu} d_nu Phi, T_0 = -HH o T
// satisfies the integrability and horizontal conditions identically and the
// divergence/symmetry conditions up to |m^2 w|.
struct AdaptedChart {
  ScalarField hamiltonian;
  TMap tmap;
};

inline AdaptedChart adapted_chart(const KGParams& params, const ScalarSolution& sol) {
  if (sol.n != params.n) throw std::invalid_argument("adapted_chart: dimension mismatch");
  const int n = params.n;
  const PhaseSpaceShape shape = params.shape(false);
  const std::vector<double> g = params.metric().diag;
  const double m2 = params.mass * params.mass;

  auto eval = [sol, g, m2, n](const PhasePoint& at) {
    const std::vector<double> dphi = sol.gradient(at.x);
    const double f = at.v[0] + sol.value(at.x);
    double h = 0.5 * m2 * f * f;
    for (int mu = 0; mu < n; ++mu) h += 0.5 * g[mu] * at.p[mu] * at.p[mu] - at.p[mu] * dphi[mu];
    return h;
  };
  auto grad = [sol, g, m2, n, shape](const PhasePoint& at) {
    const std::vector<double> dphi = sol.gradient(at.x);
    const Matrix hess = sol.hessian(at.x);
    const double f = at.v[0] + sol.value(at.x);
    std::vector<double> out(shape.dim(), 0.0);
    for (int nu = 0; nu < n; ++nu) {
      double s = m2 * f * dphi[nu];
      for (int mu = 0; mu < n; ++mu) s -= at.p[mu] * hess(nu, mu);
      out[nu] = s;
    }
    out[n] = m2 * f;
    for (int mu = 0; mu < n; ++mu) out[n + 1 + mu] = g[mu] * at.p[mu] - dphi[mu];
    return out;
  };

  TMap t;
  t.n = n;
  t.fibre = 1;
  t.eval = [sol, g, m2, n](std::span<const double> x, std::span<const double> w) {
    const std::vector<double> dphi = sol.gradient(x);
    const double f = w[0] + sol.value(x);
    TValue val;
    val.tmu.resize(n);
    val.t0 = -0.5 * m2 * f * f;
    for (int mu = 0; mu < n; ++mu) {
      val.tmu[mu] = g[mu] * dphi[mu];
      val.t0 += 0.5 * g[mu] * dphi[mu] * dphi[mu];
    }
    return val;
  };
  t.partials = [sol, g, m2, n](std::span<const double> x, std::span<const double> w) {
    const std::vector<double> dphi = sol.gradient(x);
    const Matrix hess = sol.hessian(x);
    const double f = w[0] + sol.value(x);
    TPartials par;
    par.dx_tmu = Matrix(n, n);
    par.dv_tmu = Matrix(n, 1);
    par.dx_t0.assign(n, 0.0);
    par.dv_t0.assign(1, -m2 * f);
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) par.dx_tmu(mu, nu) = g[mu] * hess(nu, mu);
      double s = -m2 * f * dphi[mu];
      for (int a = 0; a < n; ++a) s += g[a] * dphi[a] * hess(mu, a);
      par.dx_t0[mu] = s;
    }
    return par;
  };

  return AdaptedChart{ScalarField(shape, std::move(eval), std::move(grad)), std::move(t)};
}

// --- Consistency probe for the equation without the energy coordinate -------

inline constexpr double kNoGoConsistentTol = 1e-10;
inline constexpr double kNoGoCriticalGradientTol = 1e-12;

// V(x, v) with its fibre gradient.
struct Potential {
  int n = 0, fibre = 0;
  std::function<double(std::span<const double>, std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>, std::span<const double>)> grad_v;
};

struct NoGoReport {
  bool consistent = false;
  double residual = 0.0;
  bool predicted_consistent = false;
  double potential_gradient_norm = 0.0;
  int unknowns = 0;
  int equations = 0;
};

// Tests the solvability of X _| Omega_vertical = s_n d_vert HH for a
// decomposable X = Z_1 ^...^ Z_n with unit horizontal components, for
// HH = 1/2 g_{mu nu} eta^{AB} p^mu_A p^nu_B + V(x, v). The fibre-velocity
// components of the factors are fixed by the momentum block of the
// equation; the remaining unknowns are the n^2 N momentum components. The
// probe stacks the horizontal block at the base point p0 and at unit
// momentum shifts (the equation's contraction is exactly multilinear, so
// these rows capture its full p-dependence to first order) together with
// the fibre block, and reports the least-squares residual. A solution
// exists precisely when n = 1 or grad_v V = 0; otherwise the residual is of
// the order of |grad_v V|.
inline NoGoReport no_go_probe(const Potential& pot, const Metric& g, const Metric& eta,
                              std::span<const double> x, std::span<const double> v,
                              std::span<const double> p0) {
  const int n = pot.n, nf = pot.fibre;
  if (g.dim() != n || eta.dim() != nf) throw std::invalid_argument("no_go_probe: metric dimension mismatch");
  if (static_cast<int>(x.size()) != n || static_cast<int>(v.size()) != nf ||
      static_cast<int>(p0.size()) != n * nf)
    throw std::invalid_argument("no_go_probe: argument size mismatch");

  const PhaseSpaceShape shape{n, nf, false};
  const GradedBasis basis = shape.basis();
  const Form omega = build_omega_vertical(shape);
  const double sn = (n % 2 == 1) ? 1.0 : -1.0;
  const int na = n * nf;      // fibre-velocity unknowns (stage one)
  const int nb = n * n * nf;  // momentum unknowns (stage two)

  // Components of X _| Omega_vertical for factor data a (mu-major fibre
  // velocities) and b ((mu, nu, A) momentum components).
  auto contraction = [&](const std::vector<double>& a, const std::vector<double>& b) {
    Multivector xv = Multivector::scalar_value(basis, 1.0);
    for (int mu = 0; mu < n; ++mu) {
      std::vector<double> z(basis.dim(), 0.0);
      z[basis.x_index(mu)] = 1.0;
      for (int aa = 0; aa < nf; ++aa) z[basis.v_index(aa)] = a[mu * nf + aa];
      for (int nu = 0; nu < n; ++nu)
        for (int aa = 0; aa < nf; ++aa)
          z[basis.p_index(nu, aa)] = b[(static_cast<size_t>(mu) * n + nu) * nf + aa];
      xv = wedge(xv, vector_from_components(basis, z));
    }
    return vector_components(contract(xv, omega));
  };

  const std::vector<double> zero_a(na, 0.0);
  const std::vector<double> zero_b(nb, 0.0);

  // Stage one: the momentum block is linear in a and independent of b; its
  // coefficient matrix does not depend on the evaluation point.
  Matrix mp(na, na);
  for (int j = 0; j < na; ++j) {
    std::vector<double> a = zero_a;
    a[j] = 1.0;
    const std::vector<double> c = contraction(a, zero_b);
    for (int mu = 0; mu < n; ++mu)
      for (int aa = 0; aa < nf; ++aa) mp(mu * nf + aa, j) = c[basis.p_index(mu, aa)];
  }

  // Evaluation points: base momenta plus one unit shift per component.
  std::vector<std::vector<double>> points;
  points.emplace_back(p0.begin(), p0.end());
  for (int t = 0; t < na; ++t) {
    points.push_back(points[0]);
    points.back()[t] += 1.0;
  }
  std::vector<std::vector<double>> a_at;
  for (const auto& pe : points) {
    std::vector<double> rhs(na, 0.0);
    for (int mu = 0; mu < n; ++mu)
      for (int aa = 0; aa < nf; ++aa)
        rhs[mu * nf + aa] = sn * g.diag[mu] * eta.diag[aa] * pe[mu * nf + aa];
    a_at.push_back(least_squares(mp, rhs));
  }

  // Stage two: horizontal rows at every evaluation point, fibre rows once.
  const int rows = n * static_cast<int>(points.size()) + nf;
  Matrix sys(rows, nb);
  std::vector<double> rhs(rows, 0.0);
  for (size_t e = 0; e < points.size(); ++e) {
    const std::vector<double> base = contraction(a_at[e], zero_b);
    for (int j = 0; j < nb; ++j) {
      std::vector<double> b = zero_b;
      b[j] = 1.0;
      const std::vector<double> c = contraction(a_at[e], b);
      for (int tau = 0; tau < n; ++tau)
        sys(static_cast<int>(e) * n + tau, j) = c[basis.x_index(tau)] - base[basis.x_index(tau)];
    }
    for (int tau = 0; tau < n; ++tau) rhs[static_cast<int>(e) * n + tau] = -base[basis.x_index(tau)];
  }
  const std::vector<double> gv = pot.grad_v(x, v);
  if (static_cast<int>(gv.size()) != nf) throw std::runtime_error("no_go_probe: fibre gradient size mismatch");
  const int vrow = n * static_cast<int>(points.size());
  {
    const std::vector<double> base = contraction(a_at[0], zero_b);
    for (int j = 0; j < nb; ++j) {
      std::vector<double> b = zero_b;
      b[j] = 1.0;
      const std::vector<double> c = contraction(a_at[0], b);
      for (int aa = 0; aa < nf; ++aa)
        sys(vrow + aa, j) = c[basis.v_index(aa)] - base[basis.v_index(aa)];
    }
    for (int aa = 0; aa < nf; ++aa) rhs[vrow + aa] = sn * gv[aa] - base[basis.v_index(aa)];
  }

  NoGoReport report;
  report.unknowns = nb;
  report.equations = rows;
  least_squares(sys, rhs, &report.residual);
  report.consistent = report.residual < kNoGoConsistentTol;
  for (double c : gv) report.potential_gradient_norm = std::max(report.potential_gradient_norm, std::fabs(c));
  report.predicted_consistent = (n == 1) || report.potential_gradient_norm < kNoGoCriticalGradientTol;
  return report;
}

}  // namespace polysymp
