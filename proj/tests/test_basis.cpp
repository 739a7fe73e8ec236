#include <doctest.h>

#include <cmath>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/quadrature.hpp"

using namespace varfn;

TEST_CASE("legendre functions are orthonormal for the uniform probability measure") {
  const auto& q = gauss_legendre_64();
  for (std::size_t j = 0; j < 20; ++j)
    for (std::size_t k = 0; k < 20; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.nodes.size(); ++i)
        s += q.weights[i] * eval_legendre(j, q.nodes[i]) * eval_legendre(k, q.nodes[i]);
      CHECK(s == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("endpoint values") {
  for (std::size_t k = 0; k < 15; ++k) {
    CHECK(eval_legendre(k, 1.0) == doctest::Approx(std::sqrt(2.0 * k + 1.0)).epsilon(1e-14));
    CHECK(std::abs(eval_legendre(k, -1.0)) == doctest::Approx(std::sqrt(2.0 * k + 1.0)).epsilon(1e-14));
  }
}

TEST_CASE("eval_all agrees with eval") {
  LegendreBasis b(9);
  std::vector<double> out(9);
  b.eval_all(0.37, out);
  for (std::size_t k = 0; k < 9; ++k) CHECK(out[k] == doctest::Approx(b.eval(k, 0.37)).epsilon(1e-14));
}

TEST_CASE("gauss-legendre weights sum to one and integrate polynomials") {
  const QuadratureRule q = gauss_legendre(5);
  double w = 0.0, m8 = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    w += q.weights[i];
    m8 += q.weights[i] * std::pow(q.nodes[i], 8);
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m8 == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("rank-1 and dense tensors agree") {
  const CoeffTensor r = CoeffTensor::rank1({{1.0, 2.0}, {3.0, -1.0, 0.5}});
  const CoeffTensor d = r.to_dense();
  CHECK(d.dims() == std::vector<std::size_t>{2, 3});
  CHECK(d.data()[0 * 3 + 1] == doctest::Approx(-1.0));
  CHECK(d.data()[1 * 3 + 2] == doctest::Approx(1.0));
  CHECK(r.norm() == doctest::Approx(d.norm()).epsilon(1e-14));
  CHECK(dot(r, d) == doctest::Approx(d.norm() * d.norm()).epsilon(1e-14));
  CHECK(distance(r, d) == doctest::Approx(0.0).epsilon(1e-14));
  const TensorBasis basis = TensorBasis::legendre({2, 3});
  const std::vector<double> y{0.3, -0.8};
  CHECK(eval_function(r, basis, y) == doctest::Approx(eval_function(d, basis, y)).epsilon(1e-13));
}

TEST_CASE("linear algebra helpers") {
  const CoeffTensor a = CoeffTensor::dense({2, 2}, {1, 2, 3, 4});
  const CoeffTensor b = CoeffTensor::dense({2, 2}, {1, 0, 0, 1});
  const CoeffTensor c = linear_combination(2.0, a, -1.0, b);
  CHECK(c.data() == std::vector<double>{1, 4, 6, 7});
  CHECK(scaled(a, 0.5).data()[3] == doctest::Approx(2.0));
  const std::vector<std::size_t> idx{1, 0};
  CHECK(a.flat_index(idx) == 2);
  CHECK(CoeffTensor::unit({2, 2}, idx).data()[2] == 1.0);
  CHECK_THROWS(linear_combination(1.0, a, 1.0, CoeffTensor::zeros({3})));
}

TEST_CASE("expansion of a smooth function reproduces it") {
  const std::size_t d = 15;
  const auto c = expand_univariate([](double y) { return std::exp(y); }, d);
  LegendreBasis b(d);
  std::vector<double> v(d);
  for (double y : {-1.0, -0.3, 0.0, 0.9}) {
    b.eval_all(y, v);
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += c[k] * v[k];
    CHECK(s == doctest::Approx(std::exp(y)).epsilon(1e-13));
  }
}
