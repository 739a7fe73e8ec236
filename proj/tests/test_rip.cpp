#include <doctest.h>

#include <cmath>
#include <sstream>

#include "varfn/measure.hpp"
#include "varfn/model.hpp"
#include "varfn/rip.hpp"

using namespace varfn;
using model::ModelClass;

TEST_CASE("spectral deviation of a singleton is the weighted mean deviation") {
  const ModelClass cls = ModelClass::linear_span({3}, {{2}});
  const SampleBatch b = draw_samples(DomainSpec(1), WeightFunction::uniform(1), 40, 9);
  double mean = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double p = eval_legendre(2, b.points[i]);
    mean += p * p;
  }
  mean /= 40.0;
  const RipReport r = rip_delta_linear(cls, b);
  CHECK(r.delta_hat == doctest::Approx(std::abs(mean - 1.0)).epsilon(1e-12));
  CHECK(r.method == RipMethod::Spectral);
}

TEST_CASE("monte-carlo deviation never exceeds the spectral one") {
  const ModelClass cls = ModelClass::first_functions(3);
  const SampleBatch b = draw_samples(DomainSpec(1), WeightFunction::uniform(1), 50, 2);
  const RipReport s = rip_delta_linear(cls, b);
  const RipReport m = rip_delta_mc(cls, b, 20000, 3);
  CHECK(m.delta_hat <= s.delta_hat + 1e-12);
  CHECK(m.delta_hat >= 0.95 * s.delta_hat);
  CHECK(m.num_test == 20000);
}

TEST_CASE("deviation does not depend on the thread budget") {
  const ModelClass cls = ModelClass::full_space({3, 3});
  const SampleBatch b = draw_samples(DomainSpec(2), WeightFunction::uniform(2), 80, 4);
  const double d1 = rip_delta_linear(cls, b, Exec{1, false}).delta_hat;
  CHECK(rip_delta_linear(cls, b, Exec{3, false}).delta_hat == d1);
  CHECK(rip_delta_linear(cls, b, Exec{0, true}).delta_hat == doctest::Approx(d1).epsilon(1e-13));
  CHECK(rip_delta_mc(ModelClass::rank1_cone({3, 3}), b, 500, 1, Exec{0, true}).delta_hat ==
        rip_delta_mc(ModelClass::rank1_cone({3, 3}), b, 500, 1, Exec{3, false}).delta_hat);
}

TEST_CASE("wilson interval") {
  const auto [lo, hi] = wilson_interval(10, 100);
  CHECK(lo == doctest::Approx(0.0552).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.1744).epsilon(1e-3));
  const auto [lo0, hi0] = wilson_interval(0, 50);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
  CHECK(wilson_interval(50, 50).second == 1.0);
}

TEST_CASE("failure rate decreases with n and the exponent is reported") {
  const ModelClass cls = ModelClass::linear_span({2}, {{1}});
  const WeightFunction w = WeightFunction::uniform(1);
  const RipProbEstimate a = rip_probability(cls, w, 20, 0.3, 2000, 1);
  const RipProbEstimate b = rip_probability(cls, w, 80, 0.3, 2000, 1);
  CHECK(a.rate > b.rate);
  CHECK(a.variation_sup == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(a.exponent == doctest::Approx(10.0 * 0.01).epsilon(1e-12));
  CHECK(a.wilson_lo <= a.rate);
  CHECK(a.rate <= a.wilson_hi);
  const RipProbEstimate again = rip_probability(cls, w, 20, 0.3, 2000, 1, {}, Exec{0, true});
  CHECK(again.failures == a.failures);
}

TEST_CASE("rip csv header") {
  std::ostringstream out;
  write_rip_csv(out, {});
  CHECK(out.str() == "n,delta,trials,failures,rate,wilson_lo,wilson_hi,exponent\n");
}
