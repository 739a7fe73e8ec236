#include <doctest.h>

#include <cmath>
#include <vector>

#include "varfn/grid.hpp"
#include "varfn/measure.hpp"
#include "varfn/quadrature.hpp"

using namespace varfn;

TEST_CASE("chebyshev-lobatto nodes") {
  const auto n = chebyshev_lobatto_nodes(129);
  CHECK(n.size() == 129);
  CHECK(n.front() == -1.0);
  CHECK(n.back() == 1.0);
  CHECK(std::abs(n[64]) < 1e-15);
  for (std::size_t i = 1; i < n.size(); ++i) CHECK(n[i] > n[i - 1]);
}

TEST_CASE("standard grid shape") {
  CHECK(standard_grid(1).size() == 129);
  CHECK(standard_grid(2).size() == 129 * 129);
  const Grid g = standard_grid(4, 3);
  CHECK(g.size() == 10000);
  CHECK(g.num_modes() == 4);
  for (double x : g.coords()) CHECK(std::abs(x) <= 1.0);
  CHECK(standard_grid(4, 3).coords() == g.coords());
}

TEST_CASE("uniform samples have unit weights and are reproducible") {
  const auto a = draw_samples(DomainSpec(2), WeightFunction::uniform(2), 100, 5);
  const auto b = draw_samples(DomainSpec(2), WeightFunction::uniform(2), 100, 5);
  CHECK(a.points == b.points);
  for (double w : a.weights) CHECK(w == 1.0);
  const auto c = draw_samples(DomainSpec(2), WeightFunction::uniform(2), 100, 6);
  CHECK(a.points != c.points);
}

TEST_CASE("separable weight: density normalised and samples follow it") {
  const WeightFunction w = WeightFunction::separable({[](double y) { return 1.0 + y; }});
  const auto& q = gauss_legendre_64();
  double mass = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double y[1] = {q.nodes[i]};
    mass += q.weights[i] * w.density(y);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  const auto s = draw_samples(DomainSpec(1), w, 20000, 1);
  double mean = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    mean += s.points[i];
    CHECK(s.weights[i] == doctest::Approx(1.0 / (1.0 + s.points[i])).epsilon(1e-9));
  }
  mean /= 20000.0;
  CHECK(std::abs(mean - 1.0 / 3.0) < 0.02);  // E[y] under (1+y)dy/2
}

TEST_CASE("rejection sampling from a density") {
  auto dens = [](std::span<const double> y) { return 1.5 * y[0] * y[0]; };
  const WeightFunction w = WeightFunction::from_density(1, dens, 1.5);
  const auto s = draw_samples(DomainSpec(1), w, 5000, 2);
  double m2 = 0.0;
  for (double y : s.points) m2 += y * y;
  CHECK(std::abs(m2 / 5000.0 - 0.6) < 0.02);  // E[y^2] = 3/5
}

TEST_CASE("envelope violation is reported") {
  auto dens = [](std::span<const double> y) { return 1.5 * y[0] * y[0]; };
  const WeightFunction w = WeightFunction::from_density(1, dens, 0.5);
  CHECK_THROWS_AS(draw_samples(DomainSpec(1), w, 5000, 2), EnvelopeViolation);
}

TEST_CASE("norms") {
  const CoeffTensor c = CoeffTensor::dense({3}, {3.0, 0.0, 4.0});
  CHECK(ambient_norm(c) == doctest::Approx(5.0));
  SampleBatch b;
  b.num_modes = 1;
  b.points = {0.0, 0.5};
  b.weights = {1.0, 3.0};
  const std::vector<double> v{2.0, 1.0};
  CHECK(empirical_norm(v, b) == doctest::Approx(std::sqrt((4.0 + 3.0) / 2.0)));
  const Evaluable f = [](std::span<const double> y) { return y[0]; };
  CHECK(weighted_sup_norm(f, WeightFunction::uniform(1), standard_grid(1)) == doctest::Approx(1.0));
}
