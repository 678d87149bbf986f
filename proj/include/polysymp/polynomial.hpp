#pragma once

// Sparse polynomials over flat chart coordinates, stored as monomial lists
// (coefficient times a product of coordinate factors, repeats allowed).
// Used to generate random Hamiltonians with exact analytic gradients for the
// verification sweeps.

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "phase_space.hpp"

namespace polysymp {

struct Monomial {
  double coeff = 0.0;
  std::vector<int> vars;  // coordinate indices, one per factor
};

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  void add_term(double coeff, std::vector<int> vars) {
    for (int v : vars)
      if (v < 0 || v >= dim_) throw std::out_of_range("Polynomial: variable index out of range");
    terms_.push_back(Monomial{coeff, std::move(vars)});
  }

  double value(std::span<const double> q) const {
    double s = 0.0;
    for (const Monomial& m : terms_) {
      double t = m.coeff;
      for (int v : m.vars) t *= q[v];
      s += t;
    }
    return s;
  }

  std::vector<double> gradient(std::span<const double> q) const {
    std::vector<double> g(dim_, 0.0);
    for (const Monomial& m : terms_) {
      for (size_t k = 0; k < m.vars.size(); ++k) {
        double t = m.coeff;
        for (size_t j = 0; j < m.vars.size(); ++j)
          if (j != k) t *= q[m.vars[j]];
        g[m.vars[k]] += t;
      }
    }
    return g;
  }

  // Random polynomial over the allowed coordinate indices: term_count
  // monomials with coefficients uniform in [-1, 1] and degrees uniform in
  // [0, max_degree].
  static Polynomial random(int dim, std::span<const int> allowed, int max_degree, int term_count,
                           std::mt19937_64& rng) {
    if (allowed.empty()) throw std::invalid_argument("Polynomial::random: no variables allowed");
    Polynomial p(dim);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> degree(0, max_degree);
    std::uniform_int_distribution<size_t> pick(0, allowed.size() - 1);
    for (int t = 0; t < term_count; ++t) {
      std::vector<int> vars;
      const int d = degree(rng);
      for (int k = 0; k < d; ++k) vars.push_back(allowed[pick(rng)]);
      p.add_term(coeff(rng), std::move(vars));
    }
    return p;
  }

 private:
  int dim_ = 0;
  std::vector<Monomial> terms_;
};

// Wrap a polynomial in the non-extended coordinates (x, v, p) as a scalar
// field on that space, with its analytic gradient.
inline ScalarField polynomial_field(const PhaseSpaceShape& shape, Polynomial poly) {
  if (shape.extended) throw std::invalid_argument("polynomial_field: non-extended shape expected");
  if (poly.dim() != shape.dim()) throw std::invalid_argument("polynomial_field: dimension mismatch");
  auto eval = [poly](const PhasePoint& at) { return poly.value(at.flat()); };
  auto grad = [poly](const PhasePoint& at) { return poly.gradient(at.flat()); };
  return ScalarField(shape, std::move(eval), std::move(grad));
}

}  // namespace polysymp
