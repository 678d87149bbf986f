#pragma once

// The polymomentum phase spaces of a first-order field theory over an
// n-dimensional base with an N-dimensional fibre, in the global adapted
// chart: coordinates x^1..x^n, v^1..v^N, p^mu_A (mu-major), and on the
// extended space the energy coordinate e. The multisymplectic (n+1)-form is
//
//   Omega = dv^A ^ dp^mu_A ^ (d_mu _| dx) - de ^ dx,   dx = dx^1 ^...^ dx^n,
//
// with constant +-1 coefficients; build_omega_vertical keeps only the first
// summand (the form on the space without e, flat connection).

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "exterior.hpp"

namespace polysymp {

struct PhaseSpaceShape {
  int n = 1;
  int fibre = 1;
  bool extended = true;

  int dim() const { return n + fibre + n * fibre + (extended ? 1 : 0); }
  GradedBasis basis() const { return GradedBasis::phase(n, fibre, extended); }
  PhaseSpaceShape with_extended(bool ext) const { return PhaseSpaceShape{n, fibre, ext}; }
  bool operator==(const PhaseSpaceShape& o) const {
    return n == o.n && fibre == o.fibre && extended == o.extended;
  }
};

inline GradedBasis build_basis(const PhaseSpaceShape& shape) { return shape.basis(); }

struct PhasePoint {
  PhaseSpaceShape shape;
  std::vector<double> x;  // n
  std::vector<double> v;  // N
  std::vector<double> p;  // n*N, mu-major: p[mu * N + A]
  double e = 0.0;

  static PhasePoint zero(const PhaseSpaceShape& shape) {
    PhasePoint pt;
    pt.shape = shape;
    pt.x.assign(shape.n, 0.0);
    pt.v.assign(shape.fibre, 0.0);
    pt.p.assign(static_cast<size_t>(shape.n) * shape.fibre, 0.0);
    return pt;
  }

  static PhasePoint from_flat(const PhaseSpaceShape& shape, std::span<const double> q) {
    if (static_cast<int>(q.size()) != shape.dim())
      throw std::invalid_argument("PhasePoint: flat coordinate size mismatch");
    PhasePoint pt = zero(shape);
    int i = 0;
    for (double& c : pt.x) c = q[i++];
    for (double& c : pt.v) c = q[i++];
    for (double& c : pt.p) c = q[i++];
    if (shape.extended) pt.e = q[i];
    return pt;
  }

  std::vector<double> flat() const {
    std::vector<double> q;
    q.reserve(shape.dim());
    q.insert(q.end(), x.begin(), x.end());
    q.insert(q.end(), v.begin(), v.end());
    q.insert(q.end(), p.begin(), p.end());
    if (shape.extended) q.push_back(e);
    return q;
  }

  double momentum(int mu, int a) const { return p[static_cast<size_t>(mu) * shape.fibre + a]; }
  double& momentum(int mu, int a) { return p[static_cast<size_t>(mu) * shape.fibre + a]; }
};

// A scalar function on a phase space with an optional analytic gradient;
// without one, gradients fall back to central differences with step
// fd_step * (1 + |coordinate|).
class ScalarField {
 public:
  using Eval = std::function<double(const PhasePoint&)>;
  using Grad = std::function<std::vector<double>(const PhasePoint&)>;

  ScalarField(PhaseSpaceShape shape, Eval eval, Grad grad = nullptr, double fd_step = 1e-5)
      : shape_(shape), eval_(std::move(eval)), grad_(std::move(grad)), fd_step_(fd_step) {
    if (!eval_) throw std::invalid_argument("ScalarField: missing evaluator");
    if (fd_step_ <= 0.0) throw std::invalid_argument("ScalarField: nonpositive step");
  }

  const PhaseSpaceShape& shape() const { return shape_; }
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }
  double fd_step() const { return fd_step_; }

  double value(const PhasePoint& at) const {
    require_shape(at);
    return eval_(at);
  }

  std::vector<double> gradient(const PhasePoint& at) const {
    require_shape(at);
    if (grad_) {
      std::vector<double> g = grad_(at);
      if (static_cast<int>(g.size()) != shape_.dim())
        throw std::runtime_error("ScalarField: analytic gradient size mismatch");
      return g;
    }
    std::vector<double> q = at.flat();
    std::vector<double> g(shape_.dim(), 0.0);
    for (int i = 0; i < shape_.dim(); ++i) {
      const double h = fd_step_ * (1.0 + std::fabs(q[i]));
      const double saved = q[i];
      q[i] = saved + h;
      const double plus = eval_(PhasePoint::from_flat(shape_, q));
      q[i] = saved - h;
      const double minus = eval_(PhasePoint::from_flat(shape_, q));
      q[i] = saved;
      g[i] = (plus - minus) / (2.0 * h);
    }
    return g;
  }

 private:
  void require_shape(const PhasePoint& at) const {
    if (!(at.shape == shape_)) throw std::invalid_argument("ScalarField: phase point shape mismatch");
  }

  PhaseSpaceShape shape_;
  Eval eval_;
  Grad grad_;
  double fd_step_;
};

namespace detail {

inline Form horizontal_volume(const GradedBasis& basis, int n) {
  std::vector<int> idx(n);
  for (int mu = 0; mu < n; ++mu) idx[mu] = basis.x_index(mu);
  return Form::from_indices(basis, idx);
}

}  // namespace detail

// The multisymplectic (n+1)-form on the extended space.
inline Form build_omega(const PhaseSpaceShape& shape) {
  if (!shape.extended) throw std::invalid_argument("build_omega: extended shape required");
  const GradedBasis basis = shape.basis();
  const Form dx = detail::horizontal_volume(basis, shape.n);
  Form omega(basis, shape.n + 1);
  for (int mu = 0; mu < shape.n; ++mu) {
    const Form dmux = contract(unit_vector(basis, basis.x_index(mu)), dx);
    for (int a = 0; a < shape.fibre; ++a) {
      omega += wedge(unit_form(basis, basis.v_index(a)),
                     wedge(unit_form(basis, basis.p_index(mu, a)), dmux));
    }
  }
  omega -= wedge(unit_form(basis, basis.e_index()), dx);
  return omega;
}

// The vertical part dv^A ^ dp^mu_A ^ (d_mu _| dx) on the space without the
// energy coordinate (flat connection).
inline Form build_omega_vertical(const PhaseSpaceShape& shape) {
  if (shape.extended) throw std::invalid_argument("build_omega_vertical: non-extended shape required");
  const GradedBasis basis = shape.basis();
  const Form dx = detail::horizontal_volume(basis, shape.n);
  Form omega(basis, shape.n + 1);
  for (int mu = 0; mu < shape.n; ++mu) {
    const Form dmux = contract(unit_vector(basis, basis.x_index(mu)), dx);
    for (int a = 0; a < shape.fibre; ++a) {
      omega += wedge(unit_form(basis, basis.v_index(a)),
                     wedge(unit_form(basis, basis.p_index(mu, a)), dmux));
    }
  }
  return omega;
}

// Exterior derivative of a scalar at a point: the gradient as a 1-form.
inline Form d_scalar(const ScalarField& h, const PhasePoint& at) {
  const std::vector<double> g = h.gradient(at);
  Form df(h.shape().basis(), 1);
  for (size_t i = 0; i < g.size(); ++i)
    if (g[i] != 0.0) df.add_blade(uint64_t{1} << i, g[i]);
  return df;
}

// dH/de: the pairing of dH with the energy direction. The decomposition
// construction requires the value -1.
inline double xi_pairing(const ScalarField& h, const PhasePoint& at) {
  if (!h.shape().extended) throw std::invalid_argument("xi_pairing: extended shape required");
  return h.gradient(at)[h.shape().dim() - 1];
}

// Lift a function HH on the non-extended space to H = -HH - e on the
// extended space (the standard-form Hamiltonian of the theory). Analytic
// gradients are carried over when present.
inline ScalarField extended_hamiltonian(const ScalarField& dw) {
  if (dw.shape().extended)
    throw std::invalid_argument("extended_hamiltonian: input must live on the non-extended space");
  const PhaseSpaceShape tilde = dw.shape();
  const PhaseSpaceShape ext = tilde.with_extended(true);

  auto restrict_point = [tilde](const PhasePoint& at) {
    PhasePoint pt = PhasePoint::zero(tilde);
    pt.x = at.x;
    pt.v = at.v;
    pt.p = at.p;
    return pt;
  };

  ScalarField::Eval eval = [dw, restrict_point](const PhasePoint& at) {
    return -dw.value(restrict_point(at)) - at.e;
  };
  ScalarField::Grad grad = [dw, restrict_point, ext](const PhasePoint& at) {
    std::vector<double> g = dw.gradient(restrict_point(at));
    for (double& c : g) c = -c;
    g.push_back(-1.0);
    return g;
  };
  return ScalarField(ext, std::move(eval), std::move(grad), dw.fd_step());
}

}  // namespace polysymp
