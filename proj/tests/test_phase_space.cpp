#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "polysymp/linalg.hpp"
#include "polysymp/phase_space.hpp"

using namespace polysymp;

namespace {

// All grade-k blades over dim indices, as index lists.
std::vector<std::vector<int>> all_blades(int dim, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> tuple(k);
  std::function<void(int, int)> walk = [&](int slot, int start) {
    if (slot == k) {
      out.push_back(tuple);
      return;
    }
    for (int i = start; i < dim; ++i) {
      tuple[slot] = i;
      walk(slot + 1, i + 1);
    }
  };
  walk(0, 0);
  return out;
}

}  // namespace

TEST_CASE("phase point flattening round-trips") {
  const PhaseSpaceShape shape{2, 3, true};
  PhasePoint q = PhasePoint::zero(shape);
  for (size_t i = 0; i < q.x.size(); ++i) q.x[i] = 0.1 * (1 + i);
  for (size_t i = 0; i < q.v.size(); ++i) q.v[i] = -0.2 * (1 + i);
  for (size_t i = 0; i < q.p.size(); ++i) q.p[i] = 0.05 * (1 + i);
  q.e = 1.5;
  const PhasePoint back = PhasePoint::from_flat(shape, q.flat());
  CHECK(back.flat() == q.flat());
  CHECK(q.momentum(1, 2) == Catch::Approx(q.p[1 * 3 + 2]));
}

TEST_CASE("canonical form in the smallest extended space") {
  // One base and one fibre coordinate: the form is dv ^ dp + dx ^ de.
  const PhaseSpaceShape shape{1, 1, true};
  const GradedBasis basis = shape.basis();
  const Form omega = build_omega(shape);
  CHECK(omega.grade() == 2);
  CHECK(omega.terms().size() == 2);
  CHECK(omega.component({basis.v_index(0), basis.p_index(0, 0)}) == Catch::Approx(1.0));
  CHECK(omega.component({basis.x_index(0), basis.e_index()}) == Catch::Approx(1.0));
}

TEST_CASE("canonical form monomial counts and unit coefficients") {
  for (int n = 1; n <= 3; ++n) {
    for (int fibre = 1; fibre <= 2; ++fibre) {
      const PhaseSpaceShape shape{n, fibre, true};
      const Form omega = build_omega(shape);
      CHECK(omega.grade() == n + 1);
      CHECK(static_cast<int>(omega.terms().size()) == n * fibre + 1);
      for (const auto& [blade, coeff] : omega.terms()) CHECK(std::fabs(coeff) == 1.0);

      const Form vertical = build_omega_vertical(shape.with_extended(false));
      CHECK(static_cast<int>(vertical.terms().size()) == n * fibre);
      for (const auto& [blade, coeff] : vertical.terms()) CHECK(std::fabs(coeff) == 1.0);
    }
  }
}

TEST_CASE("the canonical form pairs vectors with n-forms injectively") {
  for (int n = 1; n <= 3; ++n) {
    for (int fibre = 1; fibre <= 2; ++fibre) {
      const PhaseSpaceShape shape{n, fibre, true};
      const GradedBasis basis = shape.basis();
      const Form omega = build_omega(shape);
      const auto rows = all_blades(basis.dim(), n);
      Matrix pairing(static_cast<int>(rows.size()), basis.dim());
      for (int col = 0; col < basis.dim(); ++col) {
        const Form image = contract(unit_vector(basis, col), omega);
        for (size_t r = 0; r < rows.size(); ++r) pairing(static_cast<int>(r), col) = image.component(rows[r]);
      }
      CHECK(rank(pairing) == basis.dim());
    }
  }
}

TEST_CASE("scalar fields differentiate linear functions exactly") {
  const PhaseSpaceShape shape{2, 1, true};
  const ScalarField f(shape, [](const PhasePoint& q) {
    return 2.0 * q.x[0] - 3.0 * q.x[1] + 0.5 * q.v[0] + q.momentum(1, 0) - 4.0 * q.e;
  });
  PhasePoint q = PhasePoint::zero(shape);
  q.x = {0.3, -0.7};
  q.v = {1.1};
  q.p = {0.2, -0.4};
  q.e = 0.9;
  const Form df = d_scalar(f, q);
  const GradedBasis basis = shape.basis();
  CHECK(df.component({basis.x_index(0)}) == Catch::Approx(2.0).margin(1e-9));
  CHECK(df.component({basis.x_index(1)}) == Catch::Approx(-3.0).margin(1e-9));
  CHECK(df.component({basis.v_index(0)}) == Catch::Approx(0.5).margin(1e-9));
  CHECK(df.component({basis.p_index(0, 0)}) == Catch::Approx(0.0).margin(1e-9));
  CHECK(df.component({basis.p_index(1, 0)}) == Catch::Approx(1.0).margin(1e-9));
  CHECK(df.component({basis.e_index()}) == Catch::Approx(-4.0).margin(1e-9));
}

TEST_CASE("finite-difference gradients track analytic ones") {
  const PhaseSpaceShape shape{2, 2, false};
  const auto eval = [](const PhasePoint& q) {
    return std::sin(q.x[0]) * q.v[1] + std::exp(0.3 * q.momentum(1, 0)) + q.v[0] * q.v[0] * q.x[1];
  };
  const ScalarField numeric(shape, eval);
  const ScalarField analytic(shape, eval, [](const PhasePoint& q) {
    std::vector<double> g(q.shape.dim(), 0.0);
    g[0] = std::cos(q.x[0]) * q.v[1];
    g[1] = q.v[0] * q.v[0];
    g[2] = 2.0 * q.v[0] * q.x[1];
    g[3] = std::sin(q.x[0]);
    g[6] = 0.3 * std::exp(0.3 * q.momentum(1, 0));
    return g;
  });
  PhasePoint q = PhasePoint::zero(shape);
  q.x = {0.4, -0.8};
  q.v = {0.6, 1.2};
  q.p = {0.1, -0.3, 0.7, 0.2};
  const std::vector<double> fd = numeric.gradient(q);
  const std::vector<double> exact = analytic.gradient(q);
  REQUIRE(fd.size() == exact.size());
  for (size_t i = 0; i < fd.size(); ++i) CHECK(fd[i] == Catch::Approx(exact[i]).margin(2e-6));
}

TEST_CASE("standard-form lift pairs with the energy direction at -1") {
  const PhaseSpaceShape tilde{2, 1, false};
  const ScalarField dw(tilde, [](const PhasePoint& q) {
    return 0.5 * (q.momentum(0, 0) * q.momentum(0, 0) - q.momentum(1, 0) * q.momentum(1, 0)) +
           0.5 * q.v[0] * q.v[0];
  });
  const ScalarField h = extended_hamiltonian(dw);
  PhasePoint q = PhasePoint::zero(tilde.with_extended(true));
  q.x = {0.1, 0.2};
  q.v = {0.5};
  q.p = {1.0, -0.5};
  q.e = 0.25;
  CHECK(xi_pairing(h, q) == Catch::Approx(-1.0).margin(1e-9));
  CHECK(h.value(q) == Catch::Approx(-(0.5 * (1.0 - 0.25) + 0.125) - 0.25).margin(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  const PhaseSpaceShape shape{1, 1, false};
  CHECK_THROWS_AS(build_omega(shape), std::invalid_argument);
  CHECK_THROWS_AS(build_omega_vertical(shape.with_extended(true)), std::invalid_argument);
  const ScalarField f(shape, [](const PhasePoint&) { return 0.0; });
  CHECK_THROWS_AS(xi_pairing(f, PhasePoint::zero(shape)), std::invalid_argument);
  CHECK_THROWS_AS(f.value(PhasePoint::zero(shape.with_extended(true))), std::invalid_argument);
}
