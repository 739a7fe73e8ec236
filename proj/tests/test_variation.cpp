#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "varfn/grid.hpp"
#include "varfn/kernels.hpp"
#include "varfn/model.hpp"
#include "varfn/variation.hpp"

using namespace varfn;
using model::ModelClass;

namespace {

double grid_max(const VariationFn& k, const Grid& g) {
  const auto v = kernels::tabulate(k.evaluator(), g);
  return *std::max_element(v.begin(), v.end());
}

}  // namespace

TEST_CASE("span of the first d functions") {
  for (std::size_t d = 1; d <= 8; ++d) {
    const VariationFn k = variation_exact(ModelClass::first_functions(d));
    CHECK(k.certificate() == Certificate::Exact);
    const double y1[1] = {1.0};
    CHECK(k(y1) == doctest::Approx(double(d * d)).epsilon(1e-12));
    CHECK(l1_norm(k) == doctest::Approx(double(d)).epsilon(1e-12));
    CHECK(k.linear_dimension().value() == d);
  }
}

TEST_CASE("full space variation factorises") {
  const VariationFn k = variation_exact(ModelClass::full_space({3, 4}));
  const double y[2] = {1.0, -1.0};
  CHECK(k(y) == doctest::Approx(9.0 * 16.0).epsilon(1e-12));
  CHECK(l1_norm(k) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("rank-1 cone has the ambient variation") {
  const VariationFn k = variation_exact(ModelClass::rank1_cone({3, 3}));
  const VariationFn f = variation_exact(ModelClass::full_space({3, 3}));
  const Grid g = standard_grid(2);
  CHECK(grid_max(k, g) == doctest::Approx(grid_max(f, g)));
}

TEST_CASE("monte-carlo estimate is a lower bound that approaches the exact value") {
  const ModelClass cls = ModelClass::linear_span({4}, {{0}, {1}, {2}, {3}});
  const VariationFn exact = variation_exact(cls);
  const VariationFn est = variation_estimate(cls, 20000, 3);
  CHECK(est.certificate() == Certificate::McLowerBound);
  for (double y : {-1.0, -0.5, 0.2, 0.9}) {
    const double p[1] = {y};
    CHECK(est(p) <= exact(p) * (1.0 + 1e-12));
    CHECK(est(p) >= 0.9 * exact(p));
  }
}

TEST_CASE("grid estimate matches the evaluator") {
  const ModelClass cls = ModelClass::rank1_cone({3, 2});
  const Grid g = standard_grid(2);
  const GridEstimate e = variation_estimate(cls, g, 200, 4);
  for (std::size_t i = 0; i < g.size(); i += 997)
    CHECK(e.values[i] == doctest::Approx(e.fn(g.point(i))).epsilon(1e-10));
}

TEST_CASE("combination rules") {
  const VariationFn a = variation_exact(ModelClass::first_functions(2));
  const VariationFn b = variation_exact(ModelClass::first_functions(3));
  const double y[1] = {0.4};
  CHECK(variation_combine(CombineRule::Union, a, b)(y) == doctest::Approx(std::max(a(y), b(y))));
  CHECK(variation_combine(CombineRule::SumOrthogonal, a, b)(y) == doctest::Approx(a(y) + b(y)));
  CHECK(variation_combine(CombineRule::Union, a, variation_estimate(ModelClass::first_functions(2), 10, 1))
            .certificate() != Certificate::Exact);
}

TEST_CASE("optimal weight normalises the variation") {
  const VariationFn k = variation_exact(ModelClass::full_space({3}));
  const WeightFunction w = optimal_weight(k, DomainSpec(1));
  const VariationNormReport r = variation_norms(k, w, standard_grid(1));
  CHECK(r.sup_norm == doctest::Approx(3.0).epsilon(1e-10));  // equals the L1 norm
  CHECK(r.l1_norm == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("optimal weight rejects a vanishing variation") {
  const VariationFn k = variation_exact(ModelClass::linear_span({2}, {{1}}));
  CHECK_THROWS_AS(optimal_weight(k, DomainSpec(1)), std::domain_error);
}

TEST_CASE("ambient optimal weight matches the closed form") {
  const WeightFunction w = ambient_optimal_weight({4});
  const VariationFn k = variation_exact(ModelClass::full_space({4}));
  for (double y : {-1.0, 0.0, 0.7}) {
    const double p[1] = {y};
    CHECK(w(p) == doctest::Approx(4.0 / k(p)).epsilon(1e-12));
  }
}

TEST_CASE("sparse variation is a pointwise knapsack") {
  const ModelClass cls = ModelClass::weighted_sparse({3}, {1, 1, 1}, std::sqrt(2.0));
  const VariationFn k = variation_exact(cls);
  const double y[1] = {1.0};
  CHECK(k(y) == doctest::Approx(3.0 + 5.0));  // two largest of 1, 3, 5
}

TEST_CASE("ball variation has no closed form") {
  const ModelClass ball = ModelClass::ball(CoeffTensor::zeros({2}), 1.0, ModelClass::full_space({2}));
  CHECK_FALSE(has_exact_variation(ball));
  CHECK_THROWS(variation_exact(ball));
}

TEST_CASE("variation csv layout") {
  const VariationFn k = variation_exact(ModelClass::first_functions(2));
  const Grid g(1, {-1.0, 0.0});
  const std::vector<double> v{4.0, 1.0};
  std::ostringstream out;
  write_variation_csv(out, k, g, v);
  CHECK(out.str() == "y_1,K_value,certificate\n-1,4,exact\n0,1,exact\n");
}
