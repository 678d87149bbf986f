// Acceptance checks for the library: each criterion prints one PASS/FAIL
// line with its key numbers, and the process exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>

#include "polysymp/polysymp.hpp"

using namespace polysymp;

namespace {

int g_criterion = 0;

bool report(bool ok, const char* fmt, ...) {
  std::printf("%s  %d  ", ok ? "PASS" : "FAIL", ++g_criterion);
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
  return ok;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1: construction of the defining-equation solution ----------------------

bool criterion_construction() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  const std::pair<int, int> shapes[] = {{1, 1}, {2, 1}, {2, 2}, {3, 1}, {4, 1}};
  for (const auto [n, fibre] : shapes) {
    const PhaseSpaceShape tilde{n, fibre, false};
    std::vector<int> allowed(tilde.dim());
    for (size_t i = 0; i < allowed.size(); ++i) allowed[i] = static_cast<int>(i);
    const auto slots = enumerate_gauge_freedom(tilde);
    for (int h = 0; h < 10; ++h) {
      const Polynomial poly = Polynomial::random(tilde.dim(), allowed, 3, 6, rng);
      const ScalarField ham = extended_hamiltonian(polynomial_field(tilde, poly));
      for (int pt = 0; pt < 100; ++pt) {
        PhasePoint q = PhasePoint::zero(tilde.with_extended(true));
        for (double& c : q.x) c = u(rng);
        for (double& c : q.v) c = u(rng);
        for (double& c : q.p) c = u(rng);
        q.e = u(rng);
        GaugeTensor gauge = GaugeTensor::zero(n, fibre);
        if (pt % 2 == 1) {
          for (const GaugeParameter& gp : slots) gauge.at(gp.mu, gp.nu, gp.a) = u(rng);
        }
        const HamiltonianDecomposition dec = construct_decomposition(ham, q, &gauge);
        worst = std::max(worst, verify_hamvec(dec.product(), ham, q).max_abs);
      }
    }
  }
  const double secs = seconds_since(t0);
  return report(worst < 1e-8 && secs < 30.0,
                "constructed multivectors solve their defining equation: "
                "worst residual %.3e over 5000 random cases (5 shapes, tol 1e-8), %.1f s",
                worst, secs);
}

// --- 2: decomposability test against the quadratic-relations oracle ---------

// Contraction of X with the basis (k-1)-form indexed by jmask, by the dual
// pairing: component i of the result is the signed coefficient of X on the
// blade jmask | {i}.
std::vector<double> pluecker_vector(const Multivector& x, uint64_t jmask) {
  std::vector<double> v(x.basis().dim(), 0.0);
  for (const auto& [blade, coeff] : x.terms()) {
    if ((blade & jmask) != jmask) continue;
    const uint64_t rest = blade & ~jmask;
    if (std::popcount(rest) != 1) continue;
    const int i = std::countr_zero(rest);
    const int above = std::popcount(jmask >> (i + 1));  // J entries past i
    v[i] = (above % 2 ? -1.0 : 1.0) * coeff;
  }
  return v;
}

bool pluecker_decomposable(const Multivector& x) {
  const int k = x.grade();
  const int d = x.basis().dim();
  const double scale = x.max_abs();
  double worst = 0.0;
  std::vector<int> tuple(k - 1);
  std::function<void(int, int)> walk = [&](int slot, int start) {
    if (slot == k - 1) {
      uint64_t jmask = 0;
      for (int j : tuple) jmask |= uint64_t{1} << j;
      const auto v = pluecker_vector(x, jmask);
      const Multivector vx = wedge(vector_from_components(x.basis(), v), x);
      worst = std::max(worst, vx.max_abs());
      return;
    }
    for (int j = start; j < d; ++j) {
      tuple[slot] = j;
      walk(slot + 1, j + 1);
    }
  };
  walk(0, 0);
  return worst <= 1e-9 * scale * scale;
}

bool criterion_decomposability() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int disagreements = 0, decomposable_count = 0;
  double worst_reconstruction = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = std::uniform_int_distribution<int>(4, 6)(rng);
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    const GradedBasis basis = GradedBasis::plain(d);
    Multivector x(basis, 0);
    if (trial % 2 == 0) {
      // A genuine wedge of k random vectors.
      std::vector<double> f(d);
      for (double& c : f) c = u(rng);
      x = vector_from_components(basis, f);
      for (int i = 1; i < k; ++i) {
        for (double& c : f) c = u(rng);
        x = wedge(x, vector_from_components(basis, f));
      }
    } else {
      Multivector y(basis, k);
      std::vector<int> idx(k);
      for (int t = 0; t < 2 * d; ++t) {
        int lo = 0;
        for (int s = 0; s < k; ++s) {
          idx[s] = std::uniform_int_distribution<int>(lo, d - k + s)(rng);
          lo = idx[s] + 1;
        }
        y.set_component(idx, u(rng));
      }
      x = y;
    }
    if (x.is_zero()) continue;

    const DecomposabilityReport got = is_decomposable(x);
    if (got.decomposable != pluecker_decomposable(x)) ++disagreements;
    if (got.decomposable) {
      ++decomposable_count;
      Multivector w = got.factors[0];
      for (size_t i = 1; i < got.factors.size(); ++i) w = wedge(w, got.factors[i]);
      const double err = (w * got.scale - x).max_abs() / std::max(1.0, x.max_abs());
      worst_reconstruction = std::max(worst_reconstruction, err);
    }
  }

  // The classic indecomposable example and a forced quadratic relation.
  const GradedBasis b4 = GradedBasis::plain(4);
  Multivector mixed(b4, 2);
  mixed.set_component({0, 1}, 1.0);
  mixed.set_component({2, 3}, 1.0);
  const bool mixed_rejected = !is_decomposable(mixed).decomposable;

  const bool ok = disagreements == 0 && mixed_rejected && decomposable_count >= 240 &&
                  worst_reconstruction < 1e-8;
  return report(ok,
                "decomposability matches the quadratic-relations oracle: "
                "0 of 500 disagreements required (got %d), %d decomposable, "
                "worst factor reconstruction %.3e",
                disagreements, decomposable_count, worst_reconstruction);
}

// --- 3: lifted grid solutions solve the defining equation at second order ---

FieldSolution integrate_modes(const KGParams& params, int nx, const std::vector<PlaneWave>& modes) {
  GridSpec grid;
  grid.nx = nx;
  grid.dt = grid.dx() / 2.0;
  grid.steps = nx / 2;
  std::vector<double> phi0(nx, 0.0), pi0(nx, 0.0);
  for (int i = 0; i < nx; ++i) {
    const double x[2] = {0.0, grid.x0 + i * grid.dx()};
    for (const PlaneWave& w : modes) {
      phi0[i] += w.value(x);
      pi0[i] += w.gradient(x)[0];
    }
  }
  return integrate_kg(params, grid, phi0, pi0);
}

bool criterion_grid_lift() {
  const auto t0 = std::chrono::steady_clock::now();
  PlaneWave wave;
  wave.mass = 0.6;
  wave.amplitude = 0.7;
  wave.phase = 0.3;
  wave.k = {1.0};
  const KGParams params{2, wave.mass};
  std::vector<double> residuals;
  double worst_h = 0.0;
  for (int nx : {64, 128, 256}) {
    const FieldSolution sol = integrate_modes(params, nx, {wave});
    const int interior = sol.grid.steps - 1;
    std::vector<double> row_res(interior, 0.0), row_h(interior, 0.0);
    parallel_for(interior, [&](int kk) {
      for (int i = 0; i < sol.grid.nx; ++i) {
        const Prop2Report rep = verify_solution_lift(sol, kk + 1, i);
        row_res[kk] = std::max(row_res[kk], rep.residual.max_abs);
        row_h[kk] = std::max(row_h[kk], std::fabs(rep.h_on_section));
      }
    });
    residuals.push_back(*std::max_element(row_res.begin(), row_res.end()));
    worst_h = std::max(worst_h, *std::max_element(row_h.begin(), row_h.end()));
  }
  const double order_a = convergence_order(residuals[0], residuals[1]);
  const double order_b = convergence_order(residuals[1], residuals[2]);
  const double secs = seconds_since(t0);
  const bool ok = order_a >= 1.9 && order_b >= 1.9 && worst_h < 1e-10 && secs < 60.0;
  return report(ok,
                "lifted field solutions verify at second order: residuals %.3e / %.3e / %.3e "
                "(orders %.2f, %.2f, need >= 1.9), energy offset %.1e (tol 1e-10), %.1f s",
                residuals[0], residuals[1], residuals[2], order_a, order_b, worst_h, secs);
}

// --- 4: the vertical-form obstruction matches its prediction ----------------

bool criterion_obstruction() {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> curv(0.5, 1.5);
  int total = 0, agreements = 0, inconsistent = 0;
  double min_inconsistent = 1e300;
  for (const int n : {1, 2, 3}) {
    for (const int nf : {1, 2}) {
      for (int c = 0; c < 50; ++c) {
        const bool critical = c < 25;
        std::vector<double> curvature(nf), shift(nf), slope(nf, 0.0);
        for (double& a : curvature) a = curv(rng);
        for (double& a : shift) a = u(rng);
        std::vector<double> x(n), v(nf), p0(static_cast<size_t>(n) * nf);
        for (double& a : x) a = u(rng);
        for (double& a : p0) a = u(rng);
        if (critical) {
          v = shift;
        } else {
          for (double& a : slope) a = (u(rng) < 0.0 ? -1.0 : 1.0) * curv(rng);
          double gnorm = 0.0;
          do {
            for (double& a : v) a = u(rng);
            gnorm = 0.0;
            for (int i = 0; i < nf; ++i)
              gnorm = std::max(gnorm, std::fabs(curvature[i] * (v[i] - shift[i]) + slope[i]));
          } while (gnorm < 0.1);
        }
        Potential pot;
        pot.n = n;
        pot.fibre = nf;
        pot.value = [curvature, shift, slope](std::span<const double>, std::span<const double> vv) {
          double s = 0.0;
          for (size_t i = 0; i < vv.size(); ++i)
            s += 0.5 * curvature[i] * (vv[i] - shift[i]) * (vv[i] - shift[i]) + slope[i] * vv[i];
          return s;
        };
        pot.grad_v = [curvature, shift, slope](std::span<const double>, std::span<const double> vv) {
          std::vector<double> g(vv.size(), 0.0);
          for (size_t i = 0; i < vv.size(); ++i) g[i] = curvature[i] * (vv[i] - shift[i]) + slope[i];
          return g;
        };
        const NoGoReport rep = no_go_probe(pot, Metric::minkowski(n), Metric::euclidean(nf), x, v, p0);
        ++total;
        if (rep.consistent == rep.predicted_consistent) ++agreements;
        if (!rep.consistent) {
          ++inconsistent;
          min_inconsistent = std::min(min_inconsistent, rep.residual);
        }
      }
    }
  }
  const bool ok = agreements == total && inconsistent > 0 && min_inconsistent >= 1e-3;
  return report(ok,
                "vertical-pairing solvability matches the analytic prediction: "
                "%d/%d agreements, %d obstructed cases, smallest obstruction residual %.3e (floor 1e-3)",
                agreements, total, inconsistent, min_inconsistent);
}

// --- 5: generating families and the adapted chart ----------------------------

bool criterion_generating_families() {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst_hj = 0.0, worst_sym = 0.0;
  for (const int n : {2, 4}) {
    PlaneWave wave;
    wave.n = n;
    wave.mass = (n == 2) ? 1.1 : 1.3;
    wave.amplitude = 0.7;
    wave.phase = 0.3;
    wave.k.assign(n - 1, 1.0);
    if (n == 4) wave.k = {1.0, -2.0, 0.5};
    const KGParams params{n, wave.mass};
    const ScalarSolution sol = plane_wave_solution(wave);
    const SFamily s = kg_hj_family(params, sol);
    const ScalarField hh = dw_hamiltonian(params);
    const TMap t = induced_tmap(s);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(n);
      for (double& c : x) c = u(rng);
      const std::vector<double> v{sol.value(x)};
      worst_hj = std::max(worst_hj, hj_residual(s, hh, x, v));
      worst_sym = std::max(worst_sym, check_T_conditions(hh, t, x, v).symmetry);
    }
  }

  double worst_grid = 0.0, bound = 0.0;
  for (const double mass : {1.0, 0.0}) {
    PlaneWave wave;
    wave.mass = mass;
    wave.amplitude = 0.7;
    wave.phase = 0.3;
    wave.k = {1.0};
    const FieldSolution sol = integrate_modes(KGParams{2, mass}, 64, {wave});
    const AdaptedChart chart = adapted_chart(sol.params, grid_solution(sol));
    const std::vector<double> w0{0.0};
    for (int k = 1; k <= sol.grid.steps - 1; ++k) {
      for (int i = 0; i < sol.grid.nx; ++i) {
        const std::vector<double> x{sol.time(k), sol.x(i)};
        worst_grid = std::max(worst_grid, check_T_conditions(chart.hamiltonian, chart.tmap, x, w0).max_abs);
      }
    }
    bound = 5.0 * sol.grid.dx() * sol.grid.dx();
  }

  const bool ok = worst_hj <= 1e-8 && worst_sym <= 1e-8 && worst_grid < bound;
  return report(ok,
                "generating families pass their pointwise conditions: "
                "equation residual %.3e on solutions (tol 1e-8), symmetry defect %.3e (tol 1e-8), "
                "adapted-chart grid conditions %.3e (bound %.1e)",
                worst_hj, worst_sym, worst_grid, bound);
}

// --- 6: involutivity of the lifted tangent distribution ----------------------

bool criterion_involutivity() {
  std::vector<PlaneWave> modes(2);
  modes[0].mass = modes[1].mass = 1.0;
  modes[0].amplitude = 0.7;
  modes[0].phase = 0.3;
  modes[0].k = {1.0};
  modes[1].amplitude = 0.4;
  modes[1].phase = -0.8;
  modes[1].k = {2.0};
  const KGParams params{2, 1.0};
  const GradedBasis basis = params.shape(true).basis();
  const std::pair<int, int> nodes[] = {{8, 8}, {10, 40}, {14, 20}};

  std::vector<double> residuals;
  for (int nx : {64, 128, 256}) {
    const FieldSolution sol = integrate_modes(params, nx, modes);
    const std::vector<VectorField> fields = lift_fields(sol);
    const int s = nx / 64;
    double worst = 0.0;
    for (const auto [k, i] : nodes) {
      const std::vector<double> at = section_point(sol, k * s, i * s).flat();
      worst = std::max(worst, involutivity_check(fields, basis, at, 1e-2).residual);
    }
    residuals.push_back(worst);
  }
  const double order_a = convergence_order(residuals[0], residuals[1]);
  const double order_b = convergence_order(residuals[1], residuals[2]);

  // A distribution that genuinely fails to close under brackets.
  VectorField a, b;
  a.dim = b.dim = 3;
  a.components = [](std::span<const double>) { return std::vector<double>{1.0, 0.0, 0.0}; };
  b.components = [](std::span<const double> q) { return std::vector<double>{0.0, 1.0, q[0]}; };
  const std::vector<VectorField> twisted{a, b};
  const std::vector<double> origin{0.0, 0.0, 0.0};
  const double counter = involutivity_check(twisted, GradedBasis::plain(3), origin, 1e-2).residual;

  const bool ok = order_a >= 1.9 && order_b >= 1.9 && counter > 1e-2;
  return report(ok,
                "lifted tangent planes close under brackets as the grid refines: "
                "residuals %.3e / %.3e / %.3e (orders %.2f, %.2f, need >= 1.9), "
                "non-closing pair scores %.2f",
                residuals[0], residuals[1], residuals[2], order_a, order_b, counter);
}

// --- 7: the mechanics limit ---------------------------------------------------

bool criterion_mechanics() {
  const PhaseSpaceShape tilde{1, 1, false};
  const ScalarField h = extended_hamiltonian(ScalarField(
      tilde,
      [](const PhasePoint& q) { return 0.5 * q.p[0] * q.p[0] + 0.5 * q.v[0] * q.v[0]; },
      [](const PhasePoint& q) {
        return std::vector<double>{0.0, q.v[0], q.p[0]};
      }));
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_factor = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    PhasePoint q = PhasePoint::zero(tilde.with_extended(true));
    q.x = {u(rng)};
    q.v = {u(rng)};
    q.p = {u(rng)};
    q.e = u(rng);
    const HamiltonianDecomposition dec = construct_decomposition(h, q);
    worst = std::max(worst, verify_hamvec(dec.product(), h, q).max_abs);
    // -Z must be d/dt + p d/dv - v d/dp with no energy drift.
    const std::vector<double> z = vector_components(dec.factors[0]);
    worst_factor = std::max({worst_factor, std::fabs(z[0] + 1.0), std::fabs(z[1] + q.p[0]),
                             std::fabs(z[2] - q.v[0]), std::fabs(z[3])});
  }
  const bool ok = worst <= 1e-12 && worst_factor <= 1e-12;
  return report(ok,
                "one base dimension reduces to canonical mechanics: "
                "defining-equation residual %.1e (tol 1e-12), factor deviation %.1e from "
                "d/dt + p d/dv - v d/dp",
                worst, worst_factor);
}

}  // namespace

int main() {
  int failures = 0;
  failures += !criterion_construction();
  failures += !criterion_decomposability();
  failures += !criterion_grid_lift();
  failures += !criterion_obstruction();
  failures += !criterion_generating_families();
  failures += !criterion_involutivity();
  failures += !criterion_mechanics();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
