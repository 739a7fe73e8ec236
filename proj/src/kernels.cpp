#include "varfn/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace varfn::kernels {
namespace {

int resolve_threads(int threads) {
  return threads > 0 ? threads : omp_get_max_threads();
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void check_cloud_pair(CloudView a, CloudView b) {
  if (a.dim == 0 || a.dim != b.dim) throw std::invalid_argument("hausdorff: dimension mismatch");
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("hausdorff: empty point cloud");
}

void accumulate_gram(std::span<const double> features, std::size_t dim,
                     std::span<const double> weights, std::size_t begin, std::size_t end,
                     std::vector<double>& out) {
  for (std::size_t i = begin; i < end; ++i) {
    const double* phi = features.data() + i * dim;
    const double w = weights[i];
    for (std::size_t r = 0; r < dim; ++r) {
      const double wr = w * phi[r];
      for (std::size_t c = r; c < dim; ++c) out[r * dim + c] += wr * phi[c];
    }
  }
}

void finish_gram(std::vector<double>& g, std::size_t dim, std::size_t n) {
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r; c < dim; ++c) {
      g[r * dim + c] *= inv_n;
      g[c * dim + r] = g[r * dim + c];
    }
}

void check_gram_args(std::span<const double> features, std::size_t dim,
                     std::span<const double> weights) {
  if (dim == 0 || features.size() != weights.size() * dim)
    throw std::invalid_argument("weighted_gram: feature matrix does not match weights");
  if (weights.empty()) throw std::invalid_argument("weighted_gram: no samples");
}

}  // namespace

namespace serial {

std::vector<double> tabulate(const Evaluable& f, const Grid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.point(i));
  return out;
}

std::vector<double> weighted_gram(std::span<const double> features, std::size_t dim,
                                  std::span<const double> weights) {
  check_gram_args(features, dim, weights);
  std::vector<double> g(dim * dim, 0.0);
  accumulate_gram(features, dim, weights, 0, weights.size(), g);
  finish_gram(g, dim, weights.size());
  return g;
}

double directed_hausdorff(CloudView a, CloudView b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j)
      best = std::min(best, squared_distance(a.point(i), b.point(j)));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

double hausdorff(CloudView a, CloudView b) {
  check_cloud_pair(a, b);
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace serial

namespace parallel {

std::vector<double> tabulate(const Evaluable& f, const Grid& grid, int threads) {
  std::vector<double> out(grid.size());
  for_each_index(grid.size(), [&](std::size_t i) { out[i] = f(grid.point(i)); }, threads);
  return out;
}

std::vector<double> weighted_gram(std::span<const double> features, std::size_t dim,
                                  std::span<const double> weights, int threads) {
  check_gram_args(features, dim, weights);
  const std::size_t n = weights.size();
  const std::size_t chunks = std::min(kSumChunks, n);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(dim * dim, 0.0));
  const long long nchunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (long long c = 0; c < nchunks; ++c) {
    const std::size_t cu = static_cast<std::size_t>(c);
    const std::size_t begin = n * cu / chunks;
    const std::size_t end = n * (cu + 1) / chunks;
    accumulate_gram(features, dim, weights, begin, end, partial[cu]);
  }
  std::vector<double> g(dim * dim, 0.0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += p[k];
  finish_gram(g, dim, n);
  return g;
}

double directed_hausdorff(CloudView a, CloudView b, int threads) {
  std::vector<double> nearest(a.size());
  for_each_index(
      a.size(),
      [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j)
          best = std::min(best, squared_distance(a.point(i), b.point(j)));
        nearest[i] = best;
      },
      threads);
  return std::sqrt(*std::max_element(nearest.begin(), nearest.end()));
}

double hausdorff(CloudView a, CloudView b, int threads) {
  check_cloud_pair(a, b);
  return std::max(directed_hausdorff(a, b, threads), directed_hausdorff(b, a, threads));
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    int threads) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(threads))
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace parallel

std::vector<double> tabulate(const Evaluable& f, const Grid& grid, const Exec& exec) {
  return exec.serial ? serial::tabulate(f, grid) : parallel::tabulate(f, grid, exec.threads);
}

std::vector<double> weighted_gram(std::span<const double> features, std::size_t dim,
                                  std::span<const double> weights, const Exec& exec) {
  return exec.serial ? serial::weighted_gram(features, dim, weights)
                     : parallel::weighted_gram(features, dim, weights, exec.threads);
}

double hausdorff(CloudView a, CloudView b, const Exec& exec) {
  return exec.serial ? serial::hausdorff(a, b) : parallel::hausdorff(a, b, exec.threads);
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    const Exec& exec) {
  if (exec.serial)
    serial::for_each_index(count, body);
  else
    parallel::for_each_index(count, body, exec.threads);
}

}  // namespace varfn::kernels
