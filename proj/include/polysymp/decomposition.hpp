#pragma once

// Construction and verification of decomposable solutions X = Z_1 ^...^ Z_n
// of the defining equation X _| Omega = dH on the extended phase space, for
// Hamiltonians in standard form (dH/de = -1, i.e. H = -HH - e). The factor
// components, in the adapted chart and with the slot convention of
// exterior.hpp, are
//
//   (Z_mu)^nu   = -delta_mu^nu
//   (Z_mu)^A    = dH/dp^mu_A
//   (Z_mu)^nu_A = -(1/n) delta_mu^nu dH/dv^A + (Z'_mu)^nu_A
//   (Z_mu)_e    = -dH/dx^mu - sum_{nu,A} [ (Z_mu)^A (Z_nu)^nu_A
//                                          - (Z_nu)^A (Z_mu)^nu_A ]
//
// where the gauge tensor Z' is free up to the no-sum diagonal condition
// (Z'_mu)^mu_A = 0 for every mu, A. The verifier classifies the residual
// 1-form components of X _| Omega - dH by the coordinate block of the free
// index (field / momentum / horizontal / energy equations).

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "exterior.hpp"
#include "phase_space.hpp"

namespace polysymp {

inline constexpr double kXiTolerance = 1e-9;

// (Z'_mu)^nu_A, stored mu-major then nu then A.
struct GaugeTensor {
  int n = 0;
  int fibre = 0;
  std::vector<double> z;

  static GaugeTensor zero(int n, int fibre) {
    GaugeTensor g;
    g.n = n;
    g.fibre = fibre;
    g.z.assign(static_cast<size_t>(n) * n * fibre, 0.0);
    return g;
  }

  double at(int mu, int nu, int a) const { return z[(static_cast<size_t>(mu) * n + nu) * fibre + a]; }
  double& at(int mu, int nu, int a) { return z[(static_cast<size_t>(mu) * n + nu) * fibre + a]; }

  double max_diagonal_abs() const {
    double m = 0.0;
    for (int mu = 0; mu < n; ++mu)
      for (int a = 0; a < fibre; ++a) m = std::max(m, std::fabs(at(mu, mu, a)));
    return m;
  }
};

struct HamiltonianDecomposition {
  std::vector<Multivector> factors;  // n grade-1 multivectors
  GaugeTensor gauge;
  PhasePoint point;

  Multivector product() const {
    Multivector x = factors.at(0);
    for (size_t i = 1; i < factors.size(); ++i) x = wedge(x, factors[i]);
    return x;
  }
};

// Builds the factors above at a point. Refuses Hamiltonians that are not in
// standard form (|dH/de + 1| > kXiTolerance) and gauges violating the
// diagonal condition.
inline HamiltonianDecomposition construct_decomposition(const ScalarField& h, const PhasePoint& at,
                                                        const GaugeTensor* gauge = nullptr) {
  const PhaseSpaceShape& shape = h.shape();
  if (!shape.extended) throw std::invalid_argument("construct_decomposition: extended shape required");
  const int n = shape.n, nf = shape.fibre;

  GaugeTensor zprime = gauge ? *gauge : GaugeTensor::zero(n, nf);
  if (zprime.n != n || zprime.fibre != nf)
    throw std::invalid_argument("construct_decomposition: gauge tensor shape mismatch");
  if (zprime.max_diagonal_abs() > 1e-12)
    throw std::invalid_argument("construct_decomposition: gauge violates the diagonal condition");

  const std::vector<double> g = h.gradient(at);
  const GradedBasis basis = shape.basis();
  const double xi = g[basis.e_index()];
  if (std::fabs(xi + 1.0) > kXiTolerance)
    throw std::invalid_argument("construct_decomposition: Hamiltonian is not in standard form (dH/de != -1)");

  // Component tables: a[mu][A] = (Z_mu)^A, b[mu][nu][A] = (Z_mu)^nu_A.
  auto a = [&](int mu, int A) { return g[basis.p_index(mu, A)]; };
  auto b = [&](int mu, int nu, int A) {
    double val = zprime.at(mu, nu, A);
    if (mu == nu) val -= g[basis.v_index(A)] / n;
    return val;
  };

  HamiltonianDecomposition dec;
  dec.gauge = zprime;
  dec.point = at;
  for (int mu = 0; mu < n; ++mu) {
    Multivector z(basis, 1);
    z.add_blade(uint64_t{1} << basis.x_index(mu), -1.0);
    for (int A = 0; A < nf; ++A) {
      const double za = a(mu, A);
      if (za != 0.0) z.add_blade(uint64_t{1} << basis.v_index(A), za);
    }
    for (int nu = 0; nu < n; ++nu) {
      for (int A = 0; A < nf; ++A) {
        const double zb = b(mu, nu, A);
        if (zb != 0.0) z.add_blade(uint64_t{1} << basis.p_index(nu, A), zb);
      }
    }
    double bracket = 0.0;
    for (int nu = 0; nu < n; ++nu)
      for (int A = 0; A < nf; ++A) bracket += a(mu, A) * b(nu, nu, A) - a(nu, A) * b(mu, nu, A);
    const double ze = -g[basis.x_index(mu)] - bracket;
    if (ze != 0.0) z.add_blade(uint64_t{1} << basis.e_index(), ze);
    dec.factors.push_back(std::move(z));
  }
  return dec;
}

struct ResidualReport {
  double max_abs = 0.0;
  // Max-abs residual per equation family, keyed by the coordinate block of
  // the free index of X _| Omega - dH.
  double field_eq = 0.0;       // dH/dv^A components
  double momentum_eq = 0.0;    // dH/dp^mu_A components
  double horizontal_eq = 0.0;  // dH/dx^mu components
  double energy_eq = 0.0;      // dH/de component
  std::vector<double> components;  // full residual 1-form, flat index order
};

// Residual of the defining equation for a candidate grade-n multivector.
inline ResidualReport verify_hamvec(const Multivector& x, const ScalarField& h, const PhasePoint& at) {
  const PhaseSpaceShape& shape = h.shape();
  if (!shape.extended) throw std::invalid_argument("verify_hamvec: extended shape required");
  if (x.grade() != shape.n) throw std::invalid_argument("verify_hamvec: multivector grade must equal n");
  const GradedBasis basis = shape.basis();
  if (x.basis() != basis) throw std::invalid_argument("verify_hamvec: basis mismatch");

  const Form residual = contract(x, build_omega(shape)) - d_scalar(h, at);
  ResidualReport report;
  report.components.assign(basis.dim(), 0.0);
  for (const auto& [blade, c] : residual.terms()) {
    const int idx = std::countr_zero(blade);
    report.components[idx] = c;
    const double a = std::fabs(c);
    report.max_abs = std::max(report.max_abs, a);
    switch (basis.block_of(idx)) {
      case CoordBlock::Field: report.field_eq = std::max(report.field_eq, a); break;
      case CoordBlock::Momentum: report.momentum_eq = std::max(report.momentum_eq, a); break;
      case CoordBlock::Horizontal: report.horizontal_eq = std::max(report.horizontal_eq, a); break;
      case CoordBlock::Energy: report.energy_eq = std::max(report.energy_eq, a); break;
    }
  }
  return report;
}

struct GaugeParameter {
  int mu = 0, nu = 0, a = 0;
};

// The free entries of the gauge tensor: all off-diagonal (mu != nu) slots.
// Count: n^2 N - n N.
inline std::vector<GaugeParameter> enumerate_gauge_freedom(const PhaseSpaceShape& shape) {
  std::vector<GaugeParameter> out;
  for (int mu = 0; mu < shape.n; ++mu)
    for (int nu = 0; nu < shape.n; ++nu)
      for (int a = 0; a < shape.fibre; ++a)
        if (mu != nu) out.push_back(GaugeParameter{mu, nu, a});
  return out;
}

}  // namespace polysymp
