// polysymp: numerical checks for the multisymplectic machinery, driven by
// JSON configs. Every subcommand writes a deterministic JSON report (stdout,
// or <prefix>.report.json with --out) and exits 0 when all checks pass, 1 on
// a failed check, 2 on a config error, 3 on an internal error. Wall time
// goes to stderr so reports stay byte-stable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polysymp/polysymp.hpp"

using nlohmann::json;
using namespace polysymp;

namespace {

struct CheckList {
  json rows = json::array();

  void add(const std::string& name, double value, bool pass) {
    rows.push_back(json{{"name", name}, {"value", value}, {"pass", pass}});
  }
  bool all_pass() const {
    for (const auto& row : rows)
      if (!row.at("pass").get<bool>()) return false;
    return true;
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
  return cfg;
}

template <typename T>
T field(const json& cfg, const std::string& key, const T& fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

template <typename T>
T required_field(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("config field '" + key + "' is required");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

GridSpec grid_from(const json& cfg, int nx) {
  GridSpec grid;
  grid.length = field<double>(cfg, "length", 2.0 * M_PI);
  grid.nx = nx;
  grid.dt = field<double>(cfg, "cfl", 0.5) * grid.dx();
  const double time = field<double>(cfg, "time", grid.length / 4.0);
  grid.steps = std::max(4, static_cast<int>(std::lround(time / grid.dt)));
  return grid;
}

std::vector<PlaneWave> waves_from(const json& cfg, int n, double mass) {
  std::vector<PlaneWave> out;
  const json modes = cfg.contains("modes") ? cfg.at("modes") : json::array({json::object()});
  if (!modes.is_array() || modes.empty()) throw ConfigError("config field 'modes' must be a nonempty array");
  for (const json& m : modes) {
    PlaneWave w;
    w.n = n;
    w.mass = mass;
    w.amplitude = field<double>(m, "amplitude", 0.7);
    w.phase = field<double>(m, "phase", 0.3);
    if (n == 2) {
      w.k = {field<double>(m, "k", 1.0)};
    } else {
      w.k = required_field<std::vector<double>>(m, "k");
      if (static_cast<int>(w.k.size()) != n - 1) throw ConfigError("mode 'k' must have n - 1 entries");
    }
    out.push_back(std::move(w));
  }
  return out;
}

FieldSolution integrate_waves(const KGParams& params, const GridSpec& grid,
                              const std::vector<PlaneWave>& waves) {
  std::vector<double> phi0(grid.nx, 0.0), pi0(grid.nx, 0.0);
  for (int i = 0; i < grid.nx; ++i) {
    const double x[2] = {0.0, grid.x0 + i * grid.dx()};
    for (const PlaneWave& w : waves) {
      phi0[i] += w.value(x);
      pi0[i] += w.gradient(x)[0];
    }
  }
  return integrate_kg(params, grid, phi0, pi0);
}

// --- Subcommand bodies -------------------------------------------------------

void run_verify_hamvec(const json& cfg, CheckList& checks, const std::string&) {
  const int n = field<int>(cfg, "n", 2);
  const int nf = field<int>(cfg, "fibre", 1);
  const int points = field<int>(cfg, "points", 20);
  const int hams = field<int>(cfg, "hamiltonians", 5);
  const int degree = field<int>(cfg, "degree", 3);
  const int terms = field<int>(cfg, "terms", 6);
  const double tol = field<double>(cfg, "tolerance", 1e-8);
  const bool random_gauge = field<std::string>(cfg, "gauge", "zero") == "random";
  const uint64_t seed = field<uint64_t>(cfg, "seed", 1);
  if (n < 1 || nf < 1 || points < 1 || hams < 1) throw ConfigError("verify-hamvec: sizes must be positive");

  const PhaseSpaceShape tilde{n, nf, false};
  std::vector<int> allowed(tilde.dim());
  for (size_t i = 0; i < allowed.size(); ++i) allowed[i] = static_cast<int>(i);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst = 0.0;
  for (int h = 0; h < hams; ++h) {
    const Polynomial poly = Polynomial::random(tilde.dim(), allowed, degree, terms, rng);
    const ScalarField ham = extended_hamiltonian(polynomial_field(tilde, poly));
    for (int pt = 0; pt < points; ++pt) {
      PhasePoint q = PhasePoint::zero(tilde.with_extended(true));
      for (double& c : q.x) c = u(rng);
      for (double& c : q.v) c = u(rng);
      for (double& c : q.p) c = u(rng);
      q.e = u(rng);
      GaugeTensor gauge = GaugeTensor::zero(n, nf);
      if (random_gauge) {
        for (const GaugeParameter& gp : enumerate_gauge_freedom(tilde))
          gauge.at(gp.mu, gp.nu, gp.a) = u(rng);
      }
      const HamiltonianDecomposition dec = construct_decomposition(ham, q, &gauge);
      worst = std::max(worst, verify_hamvec(dec.product(), ham, q).max_abs);
    }
  }
  checks.add("construction-residual", worst, worst < tol);
}

void run_kg(const json& cfg, CheckList& checks, const std::string& out_prefix) {
  const double mass = field<double>(cfg, "mass", 1.0);
  const std::vector<int> resolutions = field<std::vector<int>>(cfg, "nx", {64, 128});
  const double min_order = field<double>(cfg, "min_order", 1.9);
  const double bound_scale = field<double>(cfg, "flux_bound_scale", 5.0);
  if (resolutions.empty()) throw ConfigError("run-kg: 'nx' must be nonempty");

  const KGParams params{2, mass};
  std::vector<double> flux;
  for (int nx : resolutions) {
    const GridSpec grid = grid_from(cfg, nx);
    const FieldSolution sol = integrate_waves(params, grid, waves_from(cfg, 2, mass));
    const double r = energy_flux_residual(sol);
    flux.push_back(r);
    checks.add("energy-flux-nx" + std::to_string(nx), r, r < bound_scale * grid.dx() * grid.dx());
    if (!out_prefix.empty()) {
      std::ofstream csv(out_prefix + "-nx" + std::to_string(nx) + ".csv");
      if (!csv) throw std::runtime_error("run-kg: cannot write CSV output");
      write_solution_csv(sol, csv);
    }
  }
  for (size_t i = 0; i + 1 < flux.size(); ++i) {
    const double order = convergence_order(flux[i], flux[i + 1]);
    checks.add("energy-flux-order-" + std::to_string(resolutions[i]) + "-" + std::to_string(resolutions[i + 1]),
               order, order >= min_order);
  }
}

void run_prop2(const json& cfg, CheckList& checks, const std::string&) {
  const double mass = field<double>(cfg, "mass", 0.6);
  const std::vector<int> resolutions = field<std::vector<int>>(cfg, "nx", {64, 128, 256});
  const double min_order = field<double>(cfg, "min_order", 1.9);
  const double bound_scale = field<double>(cfg, "residual_bound_scale", 1.0);
  const double tol_h = field<double>(cfg, "section_tolerance", 1e-10);
  if (resolutions.empty()) throw ConfigError("prop2: 'nx' must be nonempty");

  const KGParams params{2, mass};
  std::vector<double> worst_by_nx;
  for (int nx : resolutions) {
    const GridSpec grid = grid_from(cfg, nx);
    const FieldSolution sol = integrate_waves(params, grid, waves_from(cfg, 2, mass));
    const int interior = sol.grid.steps - 1;
    std::vector<double> row_res(interior, 0.0), row_h(interior, 0.0);
    parallel_for(interior, [&](int kk) {
      for (int i = 0; i < sol.grid.nx; ++i) {
        const Prop2Report rep = verify_solution_lift(sol, kk + 1, i);
        row_res[kk] = std::max(row_res[kk], rep.residual.max_abs);
        row_h[kk] = std::max(row_h[kk], std::fabs(rep.h_on_section));
      }
    });
    const double worst = *std::max_element(row_res.begin(), row_res.end());
    const double worst_h = *std::max_element(row_h.begin(), row_h.end());
    worst_by_nx.push_back(worst);
    checks.add("solution-lift-residual-nx" + std::to_string(nx), worst,
               worst < bound_scale * grid.dx() * grid.dx());
    checks.add("hamiltonian-on-section-nx" + std::to_string(nx), worst_h, worst_h < tol_h);
  }
  for (size_t i = 0; i + 1 < worst_by_nx.size(); ++i) {
    const double order = convergence_order(worst_by_nx[i], worst_by_nx[i + 1]);
    checks.add("residual-order-" + std::to_string(resolutions[i]) + "-" + std::to_string(resolutions[i + 1]),
               order, order >= min_order);
  }
}

void run_check_hj(const json& cfg, CheckList& checks, const std::string&) {
  const std::string kind = required_field<std::string>(cfg, "kind");
  const double mass = field<double>(cfg, "mass", 1.0);

  if (kind == "plane-wave") {
    const int n = field<int>(cfg, "n", 2);
    const double tol = field<double>(cfg, "tolerance", 1e-8);
    const int samples = field<int>(cfg, "samples", 10);
    const uint64_t seed = field<uint64_t>(cfg, "seed", 1);
    PlaneWave w;
    w.n = n;
    w.mass = mass;
    w.amplitude = field<double>(cfg, "amplitude", 0.7);
    w.phase = field<double>(cfg, "phase", 0.3);
    w.k = field<std::vector<double>>(cfg, "k", std::vector<double>(n - 1, 1.0));
    if (static_cast<int>(w.k.size()) != n - 1) throw ConfigError("check-hj: 'k' must have n - 1 entries");

    const KGParams params{n, mass};
    const ScalarSolution sol = plane_wave_solution(w);
    const ScalarField hh = dw_hamiltonian(params);
    const SFamily s = kg_hj_family(params, sol);
    const TMap t = induced_tmap(s);
    const AdaptedChart chart = adapted_chart(params, sol);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_hj = 0.0, worst_sym = 0.0, worst_closed = 0.0, worst_adapted = 0.0;
    for (int trial = 0; trial < samples; ++trial) {
      std::vector<double> x(n);
      for (double& c : x) c = u(rng);
      const std::vector<double> v{sol.value(x)};  // on the graph of the solution
      worst_hj = std::max(worst_hj, hj_residual(s, hh, x, v));
      worst_sym = std::max(worst_sym, check_T_conditions(hh, t, x, v).symmetry);
      worst_closed = std::max(worst_closed, closedness_residual(hh, t, x, v));
      const std::vector<double> zero{0.0};
      worst_adapted = std::max(worst_adapted,
                               check_T_conditions(chart.hamiltonian, chart.tmap, x, zero).max_abs);
    }
    checks.add("hj-residual", worst_hj, worst_hj < tol);
    checks.add("symmetry-identity", worst_sym, worst_sym < tol);
    checks.add("closedness", worst_closed, worst_closed < tol);
    checks.add("adapted-conditions", worst_adapted, worst_adapted < tol);
    return;
  }

  if (kind == "adapted-grid") {
    const std::vector<int> resolutions = field<std::vector<int>>(cfg, "nx", {64, 128});
    const double bound_scale = field<double>(cfg, "bound_scale", 5.0);
    const KGParams params{2, mass};
    for (int nx : resolutions) {
      const GridSpec grid = grid_from(cfg, nx);
      const FieldSolution sol = integrate_waves(params, grid, waves_from(cfg, 2, mass));
      const AdaptedChart chart = adapted_chart(params, grid_solution(sol));
      double worst = 0.0;
      const std::vector<double> zero{0.0};
      for (int k = 1; k <= sol.grid.steps - 1; k += std::max(1, sol.grid.steps / 8)) {
        for (int i = 0; i < sol.grid.nx; i += std::max(1, sol.grid.nx / 8)) {
          const std::vector<double> x{sol.time(k), sol.x(i)};
          worst = std::max(worst, check_T_conditions(chart.hamiltonian, chart.tmap, x, zero).max_abs);
        }
      }
      checks.add("adapted-conditions-nx" + std::to_string(nx), worst,
                 worst < bound_scale * grid.dx() * grid.dx());
    }
    return;
  }

  throw ConfigError("check-hj: unknown kind '" + kind + "'");
}

void run_no_go(const json& cfg, CheckList& checks, const std::string&) {
  const int n = field<int>(cfg, "n", 2);
  const int nf = field<int>(cfg, "fibre", 1);
  const int cases = field<int>(cfg, "cases", 50);
  const double critical_fraction = field<double>(cfg, "critical_fraction", 0.5);
  const double floor = field<double>(cfg, "min_inconsistent_residual", 1e-3);
  const uint64_t seed = field<uint64_t>(cfg, "seed", 1);
  if (n < 1 || nf < 1 || cases < 1) throw ConfigError("no-go: sizes must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> curv(0.5, 1.5);

  int agreements = 0, inconsistent = 0;
  double min_inconsistent = 0.0, worst_consistent = 0.0;
  for (int c = 0; c < cases; ++c) {
    const bool critical = c < static_cast<int>(critical_fraction * cases);
    std::vector<double> curvature(nf), shift(nf), slope(nf, 0.0);
    for (double& a : curvature) a = curv(rng);
    for (double& a : shift) a = u(rng);
    std::vector<double> x(n), v(nf), p0(static_cast<size_t>(n) * nf);
    for (double& a : x) a = u(rng);
    for (double& a : p0) a = u(rng);
    if (critical) {
      v = shift;  // exact critical point of V
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
    if (rep.consistent == rep.predicted_consistent) ++agreements;
    if (!rep.consistent) {
      min_inconsistent = (inconsistent == 0) ? rep.residual : std::min(min_inconsistent, rep.residual);
      ++inconsistent;
    } else {
      worst_consistent = std::max(worst_consistent, rep.residual);
    }
  }

  checks.add("prediction-agreement", static_cast<double>(agreements), agreements == cases);
  checks.add("inconsistent-cases", static_cast<double>(inconsistent), true);
  checks.add("inconsistent-residual-floor", min_inconsistent,
             inconsistent == 0 || min_inconsistent >= floor);
  checks.add("consistent-residual-ceiling", worst_consistent, worst_consistent < kNoGoConsistentTol);
}

void run_decompose(const json& cfg, CheckList& checks, const std::string&, json& extra) {
  const int dim = required_field<int>(cfg, "dim");
  const int grade = required_field<int>(cfg, "grade");
  const bool expect = required_field<bool>(cfg, "expect_decomposable");
  const double pivot_tol = field<double>(cfg, "tolerance", 1e-10);
  if (dim < 1 || dim > kMaxDim) throw ConfigError("decompose: 'dim' out of range");
  if (grade < 1 || grade > dim) throw ConfigError("decompose: 'grade' out of range");

  const GradedBasis basis = GradedBasis::plain(dim);
  Multivector x(basis, grade);
  const json comps = required_field<json>(cfg, "components");
  if (!comps.is_array() || comps.empty()) throw ConfigError("decompose: 'components' must be a nonempty array");
  for (const json& c : comps) {
    const std::vector<int> indices = required_field<std::vector<int>>(c, "indices");
    const double value = required_field<double>(c, "value");
    std::vector<int> zero_based;
    for (int i : indices) {
      if (i < 1 || i > dim) throw ConfigError("decompose: component index out of range (indices are 1-based)");
      zero_based.push_back(i - 1);
    }
    x.set_component(zero_based, value);
  }

  const DecomposabilityReport rep = is_decomposable(x, pivot_tol);
  extra["decomposable"] = rep.decomposable;
  extra["annihilator_dim"] = rep.annihilator_dim;
  if (rep.decomposable) {
    json factors = json::array();
    for (const auto& f : rep.factors) factors.push_back(vector_components(f));
    extra["factors"] = factors;
    extra["scale"] = rep.scale;
  }
  checks.add("annihilator-dimension", static_cast<double>(rep.annihilator_dim), true);
  checks.add("decomposable-matches-expectation", rep.decomposable ? 1.0 : 0.0,
             rep.decomposable == expect);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multisymplectic verification toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_prefix;
  int64_t seed_override = -1;
  const std::vector<std::string> names{"verify-hamvec", "run-kg", "prop2", "check-hj", "no-go", "decompose"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_prefix, "output file prefix");
    sub->add_option("--seed", seed_override, "override the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  json report;
  int exit_code = 0;
  try {
    json cfg = load_config(config_path);
    if (seed_override >= 0) cfg["seed"] = static_cast<uint64_t>(seed_override);
    const std::string command = app.get_subcommands().front()->get_name();

    CheckList checks;
    json extra = json::object();
    if (command == "verify-hamvec") run_verify_hamvec(cfg, checks, out_prefix);
    else if (command == "run-kg") run_kg(cfg, checks, out_prefix);
    else if (command == "prop2") run_prop2(cfg, checks, out_prefix);
    else if (command == "check-hj") run_check_hj(cfg, checks, out_prefix);
    else if (command == "no-go") run_no_go(cfg, checks, out_prefix);
    else run_decompose(cfg, checks, out_prefix, extra);

    report = json{{"schema", 1},
                  {"command", command},
                  {"config", cfg},
                  {"checks", checks.rows},
                  {"summary",
                   {{"pass", checks.all_pass()},
                    {"total", checks.rows.size()},
                    {"failures", [&] {
                       size_t n = 0;
                       for (const auto& row : checks.rows)
                         if (!row.at("pass").get<bool>()) ++n;
                       return n;
                     }()}}}};
    if (!extra.empty()) report["result"] = extra;
    exit_code = checks.all_pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }

  const std::string text = report.dump(2) + "\n";
  if (out_prefix.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_prefix + ".report.json");
    if (!out) {
      std::cerr << "internal error: cannot write report\n";
      return 3;
    }
    out << text;
  }
  const auto t1 = std::chrono::steady_clock::now();
  std::fprintf(stderr, "wall_seconds=%.3f\n", std::chrono::duration<double>(t1 - t0).count());
  return exit_code;
}
