#include "varfn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "varfn/rng.hpp"

namespace varfn {

Grid::Grid(std::size_t num_modes, std::vector<double> coords)
    : num_modes_(num_modes), coords_(std::move(coords)) {
  if (num_modes_ == 0) throw std::invalid_argument("Grid: num_modes must be positive");
  if (coords_.size() % num_modes_ != 0)
    throw std::invalid_argument("Grid: coordinate count is not a multiple of num_modes");
  for (double c : coords_)
    if (!(std::abs(c) <= 1.0)) throw std::domain_error("Grid: point outside [-1,1]^M");
}

std::vector<double> chebyshev_lobatto_nodes(std::size_t n) {
  if (n < 2) throw std::invalid_argument("chebyshev_lobatto_nodes: need n >= 2");
  std::vector<double> nodes(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    nodes[j] = -std::cos(std::numbers::pi * static_cast<double>(j) / denom);
  nodes.front() = -1.0;
  nodes.back() = 1.0;
  if (n % 2 == 1) nodes[n / 2] = 0.0;
  return nodes;
}

Grid tensor_grid(std::span<const double> nodes, std::size_t num_modes) {
  if (nodes.empty()) throw std::invalid_argument("tensor_grid: empty node list");
  std::size_t count = 1;
  for (std::size_t m = 0; m < num_modes; ++m) count *= nodes.size();
  std::vector<double> coords(count * num_modes);
  std::vector<std::size_t> idx(num_modes, 0);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t m = 0; m < num_modes; ++m) coords[p * num_modes + m] = nodes[idx[m]];
    for (std::size_t m = num_modes; m-- > 0;) {
      if (++idx[m] < nodes.size()) break;
      idx[m] = 0;
    }
  }
  return Grid(num_modes, std::move(coords));
}

Grid uniform_random_grid(std::size_t num_modes, std::size_t count, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> coords(count * num_modes);
  for (double& c : coords) c = unif(rng);
  return Grid(num_modes, std::move(coords));
}

Grid standard_grid(std::size_t num_modes, std::uint64_t seed) {
  if (num_modes <= kMaxTensorGridModes) {
    const auto nodes = chebyshev_lobatto_nodes(kGridPointsPerMode);
    return tensor_grid(nodes, num_modes);
  }
  return uniform_random_grid(num_modes, kRandomGridPoints, seed);
}

}  // namespace varfn
