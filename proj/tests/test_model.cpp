#include <doctest.h>

#include <cmath>
#include <vector>

#include "varfn/model.hpp"
#include "varfn/rng.hpp"

using namespace varfn;
using model::ModelClass;

namespace {

CoeffTensor rank1_dense(std::vector<double> a, std::vector<double> b) {
  return CoeffTensor::rank1({std::move(a), std::move(b)}).to_dense();
}

}  // namespace

TEST_CASE("unit elements have norm one and lie in the class") {
  const std::vector<ModelClass> classes{
      ModelClass::first_functions(4),
      ModelClass::full_space({3, 2}),
      ModelClass::weighted_sparse({6}, {1, 1, 1, 1, 1, 1}, 2.0),
      ModelClass::low_rank_matrix(4, 3, 1),
      ModelClass::rank1_cone({3, 3, 2}),
  };
  for (const auto& cls : classes) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const CoeffTensor u = model::sample_unit_element(cls, s);
      CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(model::membership_distance(cls, u, s) < 1e-8);
    }
  }
}

TEST_CASE("projection onto a linear span keeps the listed coefficients") {
  const ModelClass span = ModelClass::linear_span({3, 3}, {{0, 0}, {2, 1}});
  std::vector<double> v(9);
  for (std::size_t i = 0; i < 9; ++i) v[i] = static_cast<double>(i + 1);
  const CoeffTensor p = model::project(span, CoeffTensor::dense({3, 3}, v)).point.to_dense();
  CHECK(p.data() == std::vector<double>{1, 0, 0, 0, 0, 0, 0, 8, 0});
}

TEST_CASE("projection onto the rank-1 cone is the leading singular pair") {
  const CoeffTensor v = CoeffTensor::dense({2, 2}, {3, 0, 0, 1});
  const CoeffTensor p = model::project(ModelClass::rank1_cone({2, 2}), v).point.to_dense();
  CHECK(p.data()[0] == doctest::Approx(3.0));
  CHECK(std::abs(p.data()[3]) < 1e-12);
  CHECK(model::membership_distance(ModelClass::rank1_cone({2, 2}), v) == doctest::Approx(1.0));
}

TEST_CASE("higher-order power iteration recovers a rank-1 tensor") {
  const CoeffTensor t = CoeffTensor::rank1({{1, 2, 0.5}, {-1, 1, 3}, {2, 0.1, 1}}).to_dense();
  const model::Rank1Fit fit = model::best_rank1(model::DenseContraction(t), 3);
  CHECK(distance(fit.tensor(), t) < 1e-9 * t.norm());
}

TEST_CASE("weighted sparse projection uses the knapsack") {
  const ModelClass cls = ModelClass::weighted_sparse({4}, {1, 2, 1, 1}, 2.0);
  const CoeffTensor v = CoeffTensor::dense({4}, {1.0, 5.0, 2.0, 0.5});
  const model::Projection p = model::project(cls, v);
  CHECK(model::weighted_sparsity({1, 2, 1, 1}, p.point) <= 2.0 + 1e-12);
  CHECK(p.point.to_dense().data()[1] == doctest::Approx(5.0));
}

TEST_CASE("knapsack") {
  const auto r = model::solve_knapsack({3, 4, 5}, {1, 2, 3}, 3);
  CHECK(r.value == doctest::Approx(7.0));
  CHECK_FALSE(r.approximate);
}

TEST_CASE("orthonormal frames") {
  const CoeffTensor at = rank1_dense({1, 2, 0}, {0, 1, 1, -1});
  const ModelClass tangent = ModelClass::tangent_low_rank(at, 1);
  const auto frame = model::orthonormal_frame(tangent);
  CHECK(frame.size() == 1 * 4 + (3 - 1) * 1);
  for (std::size_t i = 0; i < frame.size(); ++i)
    for (std::size_t j = 0; j < frame.size(); ++j)
      CHECK(dot(frame[i], frame[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  CHECK(model::is_linear_class(tangent));
  CHECK_FALSE(model::is_linear_class(ModelClass::rank1_cone({2, 2})));
  CHECK_THROWS_AS(model::orthonormal_frame(ModelClass::rank1_cone({2, 2})), std::invalid_argument);
}

TEST_CASE("shift and union membership") {
  const CoeffTensor anchor = CoeffTensor::dense({2}, {1.0, 1.0});
  const ModelClass shifted = ModelClass::shift(anchor, ModelClass::linear_span({2}, {{0}}));
  // {anchor} - span{e0} contains (t, 1)
  CHECK(model::membership_distance(shifted, CoeffTensor::dense({2}, {-4.0, 1.0})) < 1e-12);
  CHECK(model::membership_distance(shifted, CoeffTensor::dense({2}, {0.0, 0.0})) == doctest::Approx(1.0));
  const ModelClass u =
      ModelClass::union_of({ModelClass::linear_span({2}, {{0}}), ModelClass::linear_span({2}, {{1}})});
  CHECK(model::membership_distance(u, CoeffTensor::dense({2}, {0.0, 3.0})) < 1e-12);
}

TEST_CASE("degenerate tangent anchor is rejected") {
  CHECK_THROWS_AS(ModelClass::tangent_low_rank(CoeffTensor::zeros({2, 2}), 1), std::domain_error);
}
