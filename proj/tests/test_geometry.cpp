#include <doctest.h>

#include <cmath>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/geometry.hpp"
#include "varfn/grid.hpp"

using namespace varfn;
using namespace varfn::geometry;

TEST_CASE("hausdorff distance of small clouds") {
  const PointCloud a(2, {0, 0, 1, 0});
  const PointCloud b(2, {0, 0, 1, 0, 1, 2});
  CHECK(hausdorff(a, b) == doctest::Approx(2.0));
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(hausdorff(a, b, Exec{0, true}) == hausdorff(a, b, Exec{2, false}));
  CHECK_THROWS_AS(truncated_hausdorff(PointCloud(2, {2, 0}, true), a), std::invalid_argument);
}

TEST_CASE("circle chart geometry") {
  const CircleChart c(2.0);
  CHECK(*c.reach() == 2.0);
  const auto p = c.at(0.0);
  CHECK(std::abs(p[0]) < 1e-15);
  CHECK(std::abs(p[1]) < 1e-15);
  CHECK(c.implicit(c.at(0.7)) == doctest::Approx(0.0).epsilon(1e-12));
  const double w[2] = {0.3, 0.0};
  const auto q = c.manifold_point_toward(w);
  REQUIRE(q.has_value());
  CHECK(std::hypot((*q)[0], (*q)[1] + 2.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("tangent projection bound is attained on the circle") {
  const CircleChart c(1.0);
  const CheckRecord r = check_tangent_projection(c, 1.0, std::sqrt(2.0), 500, 1);
  CHECK(r.pass);
  CHECK(r.failures == 0);
  CHECK(r.equality_gap <= 1e-12);
}

TEST_CASE("projection checks on the parabola") {
  const ParabolaChart p(0.2);
  CHECK(*p.reach() == doctest::Approx(5.0));
  CHECK(check_tangent_projection(p, 5.0, 1.0, 500, 2).pass);
  CHECK(check_manifold_projection(p, 5.0, 1.0, 500, 3).pass);
}

TEST_CASE("hausdorff rates") {
  const CircleChart c(1.0);
  for (const auto& r : check_hausdorff_rates(c, 1.0, {0.4, 0.2}, 400)) CHECK(r.pass);
}

TEST_CASE("low-rank chart") {
  const CoeffTensor at = CoeffTensor::rank1({{2, 0, 0}, {1, 1, 0}}).to_dense();
  const LowRankChart ch(at, 1);
  CHECK(ch.sigma_rank() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ch.r_star() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ch.tangent_frame().size() == 3 + 2);
  CHECK(tangent_lowrank(at, 1).size() == 5);
  CHECK_THROWS(LowRankChart(CoeffTensor::dense({2, 2}, {1, 0, 0, 1}), 1));
  CHECK(check_tangent_projection(ch, ch.sigma_rank(), ch.r_star(), 300, 4).pass);
  CHECK(check_manifold_projection(ch, ch.sigma_rank(), ch.r_star(), 300, 5).pass);
}

TEST_CASE("reach of the low-rank ball") {
  const CoeffTensor v = CoeffTensor::rank1({{1, 2}, {3, 1}}).to_dense();
  const ReachReport r = reach_lowrank_ball(v, 1, 0.5);
  CHECK(r.reach_bound == doctest::Approx(0.25));
  CHECK(r.radius_margin == doctest::Approx(r.sigma_rank - 0.5));
  CHECK_THROWS(reach_lowrank_ball(v, 1, r.sigma_rank * 1.01));
  CHECK(check_reach_perturbations(v, 1, r.sigma_rank, 200, 6).pass);
}

TEST_CASE("local variation bound and its limit") {
  const CoeffTensor at = CoeffTensor::rank1({{1, 0.4, -0.2}, {0.7, 0.1, 0.5}}).to_dense();
  const LowRankChart ch(at, 1);
  const VariationFn normal = lowrank_normal_variation(ch);
  const VariationFn tangent = variation_exact(model::ModelClass::tangent_low_rank(at, 1));
  const VariationFn up = kloc_upper(tangent, normal, 0.1, ch.sigma_rank());
  const double y[2] = {0.3, -0.6};
  CHECK(up(y) >= tangent(y));
  CHECK(kloc_upper(tangent, normal, 0.0, ch.sigma_rank())(y) == doctest::Approx(tangent(y)));
  const Grid g = standard_grid(2);
  const KlimitReport rep = klimit_check(ch, {0.5 * ch.sigma_max(), 0.25 * ch.sigma_max()}, g, 3000, 7);
  CHECK(rep.steps.size() == 2);
  CHECK(rep.upper_ok);
}
