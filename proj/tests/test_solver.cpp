#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/grid.hpp"
#include "varfn/measure.hpp"
#include "varfn/model.hpp"
#include "varfn/solver.hpp"
#include "varfn/variation.hpp"

using namespace varfn;
using model::ModelClass;

namespace {

std::vector<double> values_of(const CoeffTensor& u, const TensorBasis& basis, const SampleBatch& b) {
  std::vector<double> v(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) v[i] = eval_function(u, basis, b.point(i));
  return v;
}

}  // namespace

TEST_CASE("weighted least squares recovers a member of the span") {
  const ModelClass cls = ModelClass::first_functions(5);
  const TensorBasis basis = TensorBasis::legendre({5});
  const CoeffTensor u = CoeffTensor::dense({5}, {1, -2, 0.5, 0.25, 3});
  const WeightFunction w = optimal_weight(variation_exact(cls), DomainSpec(1));
  const SampleBatch b = draw_samples(DomainSpec(1), w, 30, 1);
  const SolveResult r = solve_linear(cls, b, values_of(u, basis, b));
  CHECK(distance(r.estimate, u) < 1e-10);
  CHECK_FALSE(r.rank_deficient);
}

TEST_CASE("too few samples are flagged as rank deficient") {
  const ModelClass cls = ModelClass::first_functions(5);
  const SampleBatch b = draw_samples(DomainSpec(1), WeightFunction::uniform(1), 3, 1);
  const SolveResult r = solve_linear(cls, b, std::vector<double>(3, 1.0));
  CHECK(r.rank_deficient);
}

TEST_CASE("hard thresholding recovers a rank-1 matrix and matches the reference") {
  const std::vector<std::size_t> dims{4, 4};
  const TensorBasis basis = TensorBasis::legendre(dims);
  const CoeffTensor u = CoeffTensor::rank1({{1, 0.5, -0.2, 0.1}, {0.8, 0.3, 0.0, -0.4}});
  const SampleBatch b = draw_samples(DomainSpec(2), ambient_optimal_weight(dims), 80, 3);
  const auto v = values_of(u, basis, b);
  IhtOptions o;
  o.seed = 5;
  const SolveResult fast = solve_iht_rank1(basis, b, v, o);
  const SolveResult ref = reference::solve_iht_rank1(basis, b, v, o);
  CHECK(fast.converged);
  CHECK(distance(fast.estimate, u) < 1e-6 * u.norm());
  CHECK(distance(ref.estimate, u) < 1e-6 * u.norm());
  for (std::size_t i = 1; i < fast.residual_history.size(); ++i)
    CHECK(fast.residual_history[i] <= fast.residual_history[i - 1]);
}

TEST_CASE("implicit operator path for three modes") {
  const std::vector<std::size_t> dims{3, 3, 3};
  const TensorBasis basis = TensorBasis::legendre(dims);
  const CoeffTensor u = CoeffTensor::rank1({{1, 0.5, 0.1}, {1, -0.3, 0.2}, {1, 0.2, -0.1}});
  const SampleBatch b = draw_samples(DomainSpec(3), ambient_optimal_weight(dims), 120, 4);
  IhtOptions o;
  o.seed = 2;
  const SolveResult r = solve_iht_rank1(basis, b, values_of(u, basis, b), o);
  CHECK(distance(r.estimate, u) < 1e-6 * u.norm());
}

TEST_CASE("quasi-optimality factor") {
  CHECK(quasi_opt_factor(0.0) == doctest::Approx(3.0));
  CHECK(quasi_opt_factor(0.75) == doctest::Approx(5.0));
}

TEST_CASE("quasi-optimality check on an exact member") {
  const std::vector<std::size_t> dims{3, 3};
  const TensorBasis basis = TensorBasis::legendre(dims);
  const CoeffTensor u = CoeffTensor::rank1({{1, 0.2, 0.1}, {1, -0.5, 0.3}});
  const WeightFunction w = ambient_optimal_weight(dims);
  const SampleBatch b = draw_samples(DomainSpec(2), w, 60, 8);
  const SolveResult r = solve_iht_rank1(basis, b, values_of(u, basis, b));
  const QuasiOptReport q = quasi_opt_check(u, u, b, r, 0.5, w, standard_grid(2));
  CHECK(q.applicable);
  CHECK(q.factor == doctest::Approx(quasi_opt_factor(0.5)));
  CHECK(q.tail_sup == doctest::Approx(0.0).epsilon(1e-12));
  const QuasiOptReport na = quasi_opt_check(u, u, b, r, 1.2, w, standard_grid(2));
  CHECK_FALSE(na.applicable);
}

TEST_CASE("phase targets") {
  const CoeffTensor ones = phase_target(PhaseTarget::Ones, 2, 4);
  CHECK(ones.dims() == std::vector<std::size_t>{4, 4});
  CHECK(ones.is_rank1());
  const CoeffTensor e = phase_target(PhaseTarget::Exp, 1, 15);
  const double y[1] = {0.5};
  CHECK(eval_function(e, TensorBasis::legendre({15}), y) == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("phase diagram is reproducible and thread independent") {
  PhaseConfig c;
  c.orders = {2};
  c.samples = {40, 80};
  c.d = 4;
  c.trials = 3;
  c.seed = 11;
  const auto a = phase_diagram(c, Exec{0, true});
  const auto b = phase_diagram(c, Exec{3, false});
  REQUIRE(a.size() == 2);
  std::ostringstream sa, sb;
  write_phase_csv(sa, a);
  write_phase_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("M,n,trials,mean_rel_error,success_rate,seed\n", 0) == 0);
}
