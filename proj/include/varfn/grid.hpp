#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace varfn {

/// A finite list of points in [-1,1]^M stored row-major (point-major).
class Grid {
 public:
  Grid(std::size_t num_modes, std::vector<double> coords);

  std::size_t num_modes() const noexcept { return num_modes_; }
  std::size_t size() const noexcept { return num_modes_ == 0 ? 0 : coords_.size() / num_modes_; }
  bool empty() const noexcept { return coords_.empty(); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * num_modes_, num_modes_};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  std::size_t num_modes_;
  std::vector<double> coords_;
};

/// cos(pi j / (n-1)), j = 0..n-1, sorted ascending. Contains +-1 and, for odd n, 0.
std::vector<double> chebyshev_lobatto_nodes(std::size_t n);

/// Cartesian product of one node list over M modes (last mode varies fastest).
Grid tensor_grid(std::span<const double> nodes, std::size_t num_modes);

Grid uniform_random_grid(std::size_t num_modes, std::size_t count, std::uint64_t seed);

constexpr std::size_t kGridPointsPerMode = 129;
constexpr std::size_t kMaxTensorGridModes = 3;
constexpr std::size_t kRandomGridPoints = 10000;

/// Default evaluation grid: 129 Chebyshev-Lobatto nodes per mode tensorised for
/// M <= 3, otherwise 10^4 uniform random points.
Grid standard_grid(std::size_t num_modes, std::uint64_t seed = 0);

}  // namespace varfn
