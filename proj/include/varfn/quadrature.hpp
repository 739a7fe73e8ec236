#pragma once

#include <cstddef>
#include <vector>

namespace varfn {

/// Quadrature rule on [-1,1] for the probability measure dx/2: the weights
/// sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre(std::size_t n);

/// The 64-node rule used for every L1 norm and normalisation in the library.
const QuadratureRule& gauss_legendre_64();

constexpr std::size_t kDefaultQuadratureNodes = 64;

}  // namespace varfn
