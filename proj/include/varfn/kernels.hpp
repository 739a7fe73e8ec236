#pragma once

// Data-parallel inner loops of the library. Every kernel exists twice: a plain
// serial reference (kept for tests and the benchmark) and an OpenMP version.
// The OpenMP versions give the same result for every thread count: maxima are
// order independent and sums are accumulated over a fixed chunking.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "varfn/common.hpp"
#include "varfn/grid.hpp"

namespace varfn::kernels {

/// Row-major n x dim point set.
struct CloudView {
  std::span<const double> coords;
  std::size_t dim = 0;
  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return coords.subspan(i * dim, dim); }
};

/// Number of accumulation chunks used by the deterministic parallel sums.
constexpr std::size_t kSumChunks = 64;

namespace serial {

std::vector<double> tabulate(const Evaluable& f, const Grid& grid);

/// G = (1/n) sum_i w_i phi_i phi_i^T for an n x D row-major feature matrix.
std::vector<double> weighted_gram(std::span<const double> features, std::size_t dim,
                                  std::span<const double> weights);

/// sup_{a in A} inf_{b in B} |a - b|.
double directed_hausdorff(CloudView a, CloudView b);
double hausdorff(CloudView a, CloudView b);

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace serial

namespace parallel {

std::vector<double> tabulate(const Evaluable& f, const Grid& grid, int threads = 0);
std::vector<double> weighted_gram(std::span<const double> features, std::size_t dim,
                                  std::span<const double> weights, int threads = 0);
double directed_hausdorff(CloudView a, CloudView b, int threads = 0);
double hausdorff(CloudView a, CloudView b, int threads = 0);

/// Runs body(i) for i in [0, count) with dynamic scheduling. body must only
/// write to state owned by index i.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    int threads = 0);

}  // namespace parallel

// Dispatch on Exec::serial.
std::vector<double> tabulate(const Evaluable& f, const Grid& grid, const Exec& exec = {});
std::vector<double> weighted_gram(std::span<const double> features, std::size_t dim,
                                  std::span<const double> weights, const Exec& exec = {});
double hausdorff(CloudView a, CloudView b, const Exec& exec = {});
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    const Exec& exec = {});

}  // namespace varfn::kernels
