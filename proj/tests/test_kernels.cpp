#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "varfn/grid.hpp"
#include "varfn/kernels.hpp"

using namespace varfn;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_CASE("tabulate: serial and parallel agree exactly") {
  const Grid g = standard_grid(2);
  const Evaluable f = [](std::span<const double> y) { return std::sin(3 * y[0]) * y[1]; };
  const auto s = kernels::serial::tabulate(f, g);
  for (int t : {1, 2, 4}) CHECK(kernels::parallel::tabulate(f, g, t) == s);
}

TEST_CASE("weighted gram: parallel result does not depend on the thread count") {
  const std::size_t n = 1000, dim = 7;
  const auto feats = random_vec(n * dim, 1);
  auto w = random_vec(n, 2);
  for (double& x : w) x = std::abs(x) + 0.1;
  const auto p1 = kernels::parallel::weighted_gram(feats, dim, w, 1);
  const auto ser = kernels::serial::weighted_gram(feats, dim, w);
  for (int t : {2, 3, 8}) CHECK(kernels::parallel::weighted_gram(feats, dim, w, t) == p1);
  for (std::size_t i = 0; i < dim * dim; ++i) CHECK(p1[i] == doctest::Approx(ser[i]).epsilon(1e-13));
  CHECK(p1[1] == p1[dim]);
  CHECK_THROWS_AS(kernels::serial::weighted_gram(feats, dim, std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("hausdorff: serial and parallel agree exactly") {
  const auto a = random_vec(600, 3), b = random_vec(900, 4);
  const kernels::CloudView va{a, 3}, vb{b, 3};
  const double s = kernels::serial::hausdorff(va, vb);
  for (int t : {1, 2, 5}) CHECK(kernels::parallel::hausdorff(va, vb, t) == s);
  CHECK(kernels::serial::directed_hausdorff(va, va) == 0.0);
}

TEST_CASE("for_each_index visits every index once") {
  std::vector<int> hits(257, 0);
  kernels::parallel::for_each_index(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 3);
  for (int h : hits) CHECK(h == 1);
  std::vector<int> seen(10, 0);
  kernels::for_each_index(seen.size(), [&](std::size_t i) { seen[i] = int(i); }, Exec{0, true});
  CHECK(seen[9] == 9);
}
