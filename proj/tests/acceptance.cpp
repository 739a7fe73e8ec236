// One line per acceptance criterion: PASS/FAIL, the measured quantities and
// the wall time. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/geometry.hpp"
#include "varfn/grid.hpp"
#include "varfn/measure.hpp"
#include "varfn/model.hpp"
#include "varfn/quadrature.hpp"
#include "varfn/rip.hpp"
#include "varfn/rng.hpp"
#include "varfn/solver.hpp"
#include "varfn/variation.hpp"

using namespace varfn;
using model::ModelClass;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < time_limit;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs, time_limit, in_time ? "" : ", too slow");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CoeffTensor random_rank1(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> f;
  for (std::size_t d : dims) {
    std::vector<double> v(d);
    for (double& x : v) x = normal(rng);
    f.push_back(std::move(v));
  }
  return CoeffTensor::rank1(std::move(f));
}

Outcome criterion1() {
  double worst_sup = 0.0;
  double worst_l1 = 0.0;
  const Grid grid = standard_grid(1);
  for (std::size_t d = 1; d <= 15; ++d) {
    const VariationFn k = variation_exact(ModelClass::first_functions(d));
    const auto r = variation_norms(k, WeightFunction::uniform(1), grid);
    const double dd = static_cast<double>(d);
    worst_sup = std::max(worst_sup, std::abs(r.sup_norm - dd * dd));
    worst_l1 = std::max(worst_l1, std::abs(r.l1_norm - dd));
  }
  return {worst_sup <= 1e-9 && worst_l1 <= 1e-8,
          fmt("max |sup - d^2| = %.2e", worst_sup) + fmt(", max |L1 - d| = %.2e", worst_l1)};
}

Outcome criterion2() {
  double worst_const = 0.0;
  double worst_mass = 0.0;
  const Grid grid = standard_grid(1);
  const QuadratureRule& gl = gauss_legendre_64();
  for (std::size_t d = 1; d <= 15; ++d) {
    const VariationFn k = variation_exact(ModelClass::first_functions(d));
    const WeightFunction w = optimal_weight(k, DomainSpec(1));
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst_const = std::max(worst_const, std::abs(w(grid.point(i)) * k(grid.point(i)) - static_cast<double>(d)));
    double mass = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) mass += gl.weights[q] * w.density(std::span(&gl.nodes[q], 1));
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
  }
  return {worst_const <= 1e-8 && worst_mass <= 1e-8,
          fmt("max |wK - d| = %.2e", worst_const) + fmt(", max |int 1/w - 1| = %.2e", worst_mass)};
}

Outcome criterion3() {
  double worst_witness = 0.0;
  double worst_excess = -1.0;
  for (std::size_t order : {2, 3})
    for (std::size_t d : {2, 5}) {
      const std::vector<std::size_t> dims(order, d);
      const ModelClass cone = ModelClass::rank1_cone(dims);
      const VariationFn exact = variation_exact(cone);
      const VariationFn mc = variation_estimate(cone, 10000, 7 + order * 10 + d);
      const Grid grid = uniform_random_grid(order, 100, 1000 + order * 10 + d);
      const TensorBasis basis = TensorBasis::legendre(dims);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto y = grid.point(i);
        // Per-mode maximiser: normalised vector of basis values at y_m.
        std::vector<std::vector<double>> f = basis.mode_values(y);
        for (auto& v : f) {
          double n = 0.0;
          for (double x : v) n += x * x;
          for (double& x : v) x /= std::sqrt(n);
        }
        const CoeffTensor a = CoeffTensor::rank1(f);
        const double value = eval_function(a, basis, y);
        const double k = exact(y);
        worst_witness = std::max(worst_witness, std::abs(value * value - k) / k);
        worst_excess = std::max(worst_excess, (mc(y) - k) / k);
      }
    }
  return {worst_witness <= 1e-10 && worst_excess <= 1e-12,
          fmt("max rel |a(y)^2 - K| = %.2e", worst_witness) + fmt(", max rel (MC - K) = %.2e", worst_excess)};
}

Outcome criterion4() {
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t d = 1; d <= 4; ++d) {
    const ModelClass span = ModelClass::first_functions(d);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const SampleBatch batch = draw_samples(DomainSpec(1), WeightFunction::uniform(1), 50, 100 * d + s);
      const double spectral = rip_delta_linear(span, batch).delta_hat;
      const double mc = rip_delta_mc(span, batch, 100000, 5000 + 100 * d + s).delta_hat;
      const double ratio = spectral <= 1e-14 ? (mc <= 1e-14 ? 1.0 : 2.0) : mc / spectral;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo >= 0.95 && hi <= 1.0 + 1e-12, fmt("MC/spectral in [%.4f, ", lo) + fmt("%.6f]", hi)};
}

Outcome criterion5() {
  const ModelClass singleton = ModelClass::linear_span({2}, {{1}});
  const double delta = 0.3;
  const std::size_t trials = 10000;
  std::vector<RipProbEstimate> rows;
  bool bound_ok = true;
  std::string detail = "rates";
  for (std::size_t n : {25, 50, 100, 200, 400}) {
    const RipProbEstimate e =
        rip_probability(singleton, WeightFunction::uniform(1), n, delta, trials, 31 * n);
    const double se = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(trials));
    bound_ok = bound_ok && e.rate <= 2.0 * std::exp(-e.exponent) + 3.0 * se;
    detail += fmt(" %.4f", e.rate);
    rows.push_back(e);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < rows.size(); ++k)
    monotone = monotone && (rows[k].rate <= rows[k - 1].rate || rows[k].wilson_lo <= rows[k - 1].wilson_hi);
  detail += bound_ok ? ", below 2exp(-exponent)+3se" : ", bound violated";
  detail += monotone ? ", non-increasing" : ", not monotone";
  return {bound_ok && monotone, detail};
}

Outcome criterion6() {
  PhaseConfig cfg;
  cfg.orders = {2};
  cfg.samples = {15, 50, 150, 500};
  cfg.d = 15;
  cfg.trials = 20;
  cfg.seed = 2024;
  const auto cells = phase_diagram(cfg);
  std::string detail = "mean errors";
  for (const auto& c : cells) detail += fmt(" %.2e", c.mean_rel_error);
  const double first = cells.front().mean_rel_error;
  const double last = cells.back().mean_rel_error;
  detail += fmt(", success(500) = %.2f", cells.back().success_rate);
  const bool ok = !cells.front().failed && !cells.back().failed && last * 100.0 <= first &&
                  cells.back().success_rate >= 0.9;
  return {ok, detail};
}

Outcome criterion7() {
  const std::vector<std::size_t> dims{4, 4};
  const std::size_t n = 160;
  const WeightFunction weight = ambient_optimal_weight({4, 4});
  const Grid grid = standard_grid(2);
  const TensorBasis basis = TensorBasis::legendre(dims);
  std::size_t applicable = 0;
  std::size_t passed = 0;
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const std::uint64_t seed = 7000 + inst;
    const CoeffTensor core = random_rank1(dims, seed);
    Rng rng = make_rng(derive_seed(seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> tail(16);
    for (double& x : tail) x = normal(rng);
    const CoeffTensor t = CoeffTensor::dense(dims, tail);
    const CoeffTensor u = linear_combination(1.0, core, 1e-3 / t.norm(), t);
    const CoeffTensor best = model::project(ModelClass::rank1_cone(dims), u).point;
    const SampleBatch batch = draw_samples(DomainSpec(2), weight, n, derive_seed(seed, 2));
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = eval_function(u, basis, batch.point(i));
    IhtOptions opts;
    opts.seed = seed;
    const SolveResult r = solve_iht_rank1(basis, batch, values, opts);
    const double delta =
        rip_delta_mc(ModelClass::shift(best, ModelClass::rank1_cone(dims)), batch, 2000, derive_seed(seed, 3))
            .delta_hat;
    const QuasiOptReport q = quasi_opt_check(u, best, batch, r, delta, weight, grid);
    if (!q.applicable) continue;
    ++applicable;
    if (q.pass) ++passed;
    worst = std::max(worst, q.lhs / q.rhs);
  }
  return {applicable > 0 && passed == applicable,
          std::to_string(passed) + "/" + std::to_string(applicable) + " instances with delta < 1 satisfy the bound" +
              fmt(", worst lhs/rhs = %.3e", worst)};
}

Outcome criterion8() {
  using namespace geometry;
  std::vector<CheckRecord> recs;
  const CircleChart circle(1.0);
  const ParabolaChart parabola(0.1);
  const CheckRecord eq = check_tangent_projection(circle, 1.0, std::sqrt(2.0), 1000, 11);
  recs.push_back(eq);
  recs.push_back(check_tangent_projection(parabola, 10.0, 1.0, 1000, 12));
  recs.push_back(check_manifold_projection(circle, 1.0, 0.5, 1000, 13));
  recs.push_back(check_manifold_projection(parabola, 10.0, 0.5, 1000, 14));
  for (const auto& r : check_hausdorff_rates(circle, 1.0, {0.5, 0.4, 0.2, 0.1}, 1000)) recs.push_back(r);
  for (const auto& r : check_hausdorff_rates(parabola, 10.0, {1.0, 0.5, 0.25}, 1000)) recs.push_back(r);
  const CoeffTensor v = random_rank1({4, 4}, 99).to_dense();
  const double sigma = reach_lowrank_ball(v, 1, 1e-300).sigma_rank;
  const CheckRecord pert = check_reach_perturbations(v, 1, sigma, 1000, 15);
  recs.push_back(pert);
  std::size_t ok = 0;
  for (const auto& r : recs) ok += r.pass ? 1 : 0;
  const bool equality = eq.equality_gap <= 1e-12;
  return {ok == recs.size() && equality,
          std::to_string(ok) + "/" + std::to_string(recs.size()) + " checks" +
              fmt(", circle equality gap %.2e", eq.equality_gap) + ", perturbations " +
              std::to_string(pert.samples - pert.failures) + "/" + std::to_string(pert.samples)};
}

Outcome criterion9() {
  using namespace geometry;
  const CoeffTensor at = random_rank1({4, 4}, 4242).to_dense();
  const LowRankChart chart(at, 1);
  const double s = chart.sigma_max();
  const KlimitReport rep = klimit_check(chart, {0.5 * s, 0.25 * s, 0.125 * s}, standard_grid(2), 20000, 77);
  std::string detail = "gaps";
  for (const auto& st : rep.steps) detail += fmt(" %.3e", st.gap);
  detail += rep.upper_ok ? ", estimate <= local bound everywhere" : ", local bound exceeded";
  detail += rep.monotone ? ", gap non-increasing" : ", gap increased";
  return {rep.upper_ok && rep.monotone, detail};
}

}  // namespace

int main() {
  run(1, "variation norms of Legendre spans", 1.0, criterion1);
  run(2, "optimal weight", 1.0, criterion2);
  run(3, "rank-1 cone equals ambient variation", 10.0, criterion3);
  run(4, "spectral vs Monte-Carlo deviation", 30.0, criterion4);
  run(5, "singleton failure rates", 120.0, criterion5);
  run(6, "phase-diagram trend", 300.0, criterion6);
  run(7, "quasi-optimality", 120.0, criterion7);
  run(8, "geometry suite", 60.0, criterion8);
  run(9, "local variation bounds", 120.0, criterion9);
  return failures;
}
