#pragma once

// Vector fields over a flat chart, Lie brackets and the Schouten bracket of
// decomposable multivector fields given by factor lists:
//
//   [X, Y] = sum_{i,j} (-1)^{i+j} [X_i, Y_j] ^ X_1 ^...^i^...^ X_p
//                                            ^ Y_1 ^...^j^...^ Y_q
//
// (hats dropping factor i resp. j; i, j counted from 1). For p = q = 1 this
// reduces to the ordinary Lie bracket; the overall sign is fixed by that
// case. Sign conventions for this bracket vary in the literature by a global
// factor per (p, q); tests pin the one implemented here.
//
// Brackets use analytic Jacobians when a field provides one and central
// finite differences otherwise (step cbrt(machine eps) * (1 + |coord|)).

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "exterior.hpp"
#include "linalg.hpp"

namespace polysymp {

struct VectorField {
  int dim = 0;
  // Components at a chart point (dim values in, dim values out).
  std::function<std::vector<double>(std::span<const double>)> components;
  // Optional analytic Jacobian, entry (i, j) = d components_i / d coord_j.
  std::function<Matrix(std::span<const double>)> jacobian;
};

inline Matrix field_jacobian(const VectorField& f, std::span<const double> at) {
  if (static_cast<int>(at.size()) != f.dim) throw std::invalid_argument("field_jacobian: coordinate size mismatch");
  if (f.jacobian) return f.jacobian(at);
  static const double base_step = std::cbrt(std::numeric_limits<double>::epsilon());
  Matrix j(f.dim, f.dim);
  std::vector<double> q(at.begin(), at.end());
  for (int c = 0; c < f.dim; ++c) {
    const double h = base_step * (1.0 + std::fabs(at[c]));
    const double saved = q[c];
    q[c] = saved + h;
    const std::vector<double> plus = f.components(q);
    q[c] = saved - h;
    const std::vector<double> minus = f.components(q);
    q[c] = saved;
    for (int r = 0; r < f.dim; ++r) j(r, c) = (plus[r] - minus[r]) / (2.0 * h);
  }
  return j;
}

// [u, v]^i = u^j d_j v^i - v^j d_j u^i at the given point.
inline std::vector<double> lie_bracket(const VectorField& u, const VectorField& v,
                                       std::span<const double> at) {
  if (u.dim != v.dim) throw std::invalid_argument("lie_bracket: dimension mismatch");
  const std::vector<double> uc = u.components(at);
  const std::vector<double> vc = v.components(at);
  const Matrix ju = field_jacobian(u, at);
  const Matrix jv = field_jacobian(v, at);
  std::vector<double> out(u.dim, 0.0);
  for (int i = 0; i < u.dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < u.dim; ++j) s += uc[j] * jv(i, j) - vc[j] * ju(i, j);
    out[i] = s;
  }
  return out;
}

namespace detail {

inline Multivector wedge_values(const GradedBasis& basis,
                                const std::vector<std::vector<double>>& values,
                                int skip = -1) {
  Multivector out = Multivector::scalar_value(basis, 1.0);
  for (size_t i = 0; i < values.size(); ++i) {
    if (static_cast<int>(i) == skip) continue;
    out = wedge(out, vector_from_components(basis, values[i]));
  }
  return out;
}

}  // namespace detail

// Schouten bracket of the decomposable fields X = X_1 ^...^ X_p and
// Y = Y_1 ^...^ Y_q, evaluated at a point. Result has grade p + q - 1.
inline Multivector schouten_decomposable(std::span<const VectorField> xs,
                                         std::span<const VectorField> ys,
                                         const GradedBasis& basis,
                                         std::span<const double> at) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("schouten_decomposable: empty factor list");
  for (const auto& f : xs)
    if (f.dim != basis.dim()) throw std::invalid_argument("schouten_decomposable: field dimension mismatch");
  for (const auto& f : ys)
    if (f.dim != basis.dim()) throw std::invalid_argument("schouten_decomposable: field dimension mismatch");
  const int p = static_cast<int>(xs.size());
  const int q = static_cast<int>(ys.size());
  if (p + q - 1 > basis.dim()) throw std::invalid_argument("schouten_decomposable: grade exceeds dimension");

  std::vector<std::vector<double>> xv, yv;
  for (const auto& f : xs) xv.push_back(f.components(at));
  for (const auto& f : ys) yv.push_back(f.components(at));

  Multivector out(basis, p + q - 1);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      const std::vector<double> br = lie_bracket(xs[i], ys[j], at);
      Multivector term = vector_from_components(basis, br);
      term = wedge(term, detail::wedge_values(basis, xv, i));
      term = wedge(term, detail::wedge_values(basis, yv, j));
      const int sign = ((i + 1 + j + 1) & 1) ? -1 : 1;
      out += sign * term;
    }
  }
  return out;
}

struct InvolutivityReport {
  bool involutive = false;
  double residual = 0.0;              // max over factors of the fit residual
  std::vector<double> lambdas;        // least-squares coefficients, one per factor
};

// Involutivity test for the span of k factor fields: computes the Schouten
// bracket [X_i, X] of each factor with X = X_1 ^...^ X_k and fits the
// proportionality [X_i, X] = lambda_i X by least squares. The distribution
// is reported involutive when the largest fit residual (Euclidean norm over
// blade coefficients) stays below tol.
inline InvolutivityReport involutivity_check(std::span<const VectorField> fields,
                                             const GradedBasis& basis,
                                             std::span<const double> at,
                                             double tol) {
  if (fields.empty()) throw std::invalid_argument("involutivity_check: no factor fields");
  std::vector<std::vector<double>> values;
  for (const auto& f : fields) values.push_back(f.components(at));
  const Multivector x = detail::wedge_values(basis, values);
  const double x2 = x.norm2() * x.norm2();
  if (x2 == 0.0) throw std::invalid_argument("involutivity_check: factors are linearly dependent at the point");

  InvolutivityReport report;
  for (size_t i = 0; i < fields.size(); ++i) {
    const Multivector bracket = schouten_decomposable({&fields[i], 1}, fields, basis, at);
    double dot = 0.0;
    for (const auto& [blade, c] : bracket.terms()) {
      auto it = x.terms().find(blade);
      if (it != x.terms().end()) dot += c * it->second;
    }
    const double lambda = dot / x2;
    Multivector resid = bracket - lambda * x;
    report.lambdas.push_back(lambda);
    report.residual = std::max(report.residual, resid.norm2());
  }
  report.involutive = report.residual < tol;
  return report;
}

}  // namespace polysymp
