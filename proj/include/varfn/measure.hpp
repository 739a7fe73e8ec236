#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/common.hpp"
#include "varfn/grid.hpp"

namespace varfn {

/// Y = [-1,1]^M with the uniform product probability measure (dx/2)^M.
class DomainSpec {
 public:
  explicit DomainSpec(std::size_t num_modes);
  std::size_t num_modes() const noexcept { return num_modes_; }

 private:
  std::size_t num_modes_;
};

/// Thrown when the rejection sampler meets a proposal whose acceptance ratio
/// exceeds one, i.e. the envelope constant was too small.
class EnvelopeViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

constexpr std::size_t kCdfTablePoints = 2048;
constexpr double kEnvelopeFactor = 1.01;

/// Positive weight w with int w^{-1} d(rho) = 1. Samples are drawn from the
/// density w^{-1} with respect to rho.
class WeightFunction {
 public:
  enum class Kind { Uniform, Separable, FromVariation };

  static WeightFunction uniform(std::size_t num_modes);

  /// Product of per-mode densities p_m (with respect to dx/2). Each p_m is
  /// normalised with 64-node Gauss-Legendre quadrature; sampling inverts a
  /// 2048-point tabulated CDF.
  static WeightFunction separable(std::vector<std::function<double(double)>> densities);

  /// w = 1/p for a density p with respect to rho that is already normalised.
  /// density_sup is the largest value of p seen on a tabulation grid; the
  /// rejection envelope is 1.01 times that.
  static WeightFunction from_density(std::size_t num_modes, Evaluable density, double density_sup);

  Kind kind() const noexcept { return kind_; }
  std::size_t num_modes() const noexcept { return num_modes_; }
  double operator()(std::span<const double> y) const;
  /// Sampling density 1/w(y).
  double density(std::span<const double> y) const;
  double envelope() const noexcept { return envelope_; }

  struct Table {
    std::vector<double> nodes;
    std::vector<double> cdf;
    std::function<double(double)> density;  // normalised
  };
  const std::vector<Table>& tables() const noexcept { return tables_; }

 private:
  Kind kind_ = Kind::Uniform;
  std::size_t num_modes_ = 1;
  std::vector<Table> tables_;
  Evaluable density_;
  double envelope_ = 1.0;
};

/// n points in [-1,1]^M with their weight values w(y^i).
struct SampleBatch {
  std::size_t num_modes = 0;
  std::vector<double> points;
  std::vector<double> weights;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * num_modes, num_modes};
  }
};

SampleBatch draw_samples(const DomainSpec& domain, const WeightFunction& weight, std::size_t n,
                         std::uint64_t seed);

/// ( (1/n) sum_i w(y^i) v(y^i)^2 )^{1/2}
double empirical_norm(const Evaluable& v, const SampleBatch& batch);
/// Same, from precomputed values v(y^i).
double empirical_norm(std::span<const double> values, const SampleBatch& batch);

/// L2(rho) norm of the expanded function; equals the Euclidean coefficient norm.
double ambient_norm(const CoeffTensor& c);

/// max over the grid of sqrt(w(y)) |v(y)|. A lower bound of the essential
/// supremum that is exact only when the grid contains a maximiser.
double weighted_sup_norm(const Evaluable& v, const WeightFunction& weight, const Grid& grid,
                         const Exec& exec = {});

}  // namespace varfn
