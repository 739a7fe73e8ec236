#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/common.hpp"
#include "varfn/grid.hpp"
#include "varfn/measure.hpp"
#include "varfn/model.hpp"

namespace varfn {

/// What a VariationFn value is known to be relative to the true variation
/// function of its class.
enum class Certificate {
  Exact,
  McLowerBound,  // max over finitely many sampled unit elements
  UpperBound,
  Uncertified,   // combination of bounds pointing in different directions
};

std::string to_string(Certificate c);

/// y -> K_A(y) = sup_{a in U(A)} |a(y)|^2 together with how it was obtained.
class VariationFn {
 public:
  VariationFn(std::size_t num_modes, Evaluable eval, Certificate cert, std::string provenance);

  double operator()(std::span<const double> y) const { return eval_(y); }
  const Evaluable& evaluator() const noexcept { return eval_; }
  std::size_t num_modes() const noexcept { return num_modes_; }
  Certificate certificate() const noexcept { return cert_; }
  const std::string& provenance() const noexcept { return provenance_; }

  /// Set when the function is the exact variation of a linear space.
  std::optional<std::size_t> linear_dimension() const noexcept { return linear_dim_; }
  /// Sample count and base seed of a Monte-Carlo estimate.
  std::size_t mc_samples() const noexcept { return mc_samples_; }
  std::uint64_t mc_seed() const noexcept { return mc_seed_; }
  /// Non-empty when K(y) = prod_b blocks[b](y restricted to the b-th block of
  /// consecutive modes); used for L1 norms in high dimension.
  const std::vector<VariationFn>& blocks() const noexcept { return blocks_; }

  VariationFn with_linear_dimension(std::size_t dim) const;
  VariationFn with_blocks(std::vector<VariationFn> blocks) const;
  VariationFn with_mc(std::size_t samples, std::uint64_t seed) const;

 private:
  std::size_t num_modes_;
  Evaluable eval_;
  Certificate cert_;
  std::string provenance_;
  std::optional<std::size_t> linear_dim_;
  std::size_t mc_samples_ = 0;
  std::uint64_t mc_seed_ = 0;
  std::vector<VariationFn> blocks_;
};

/// sup_norm = max over the grid of w(y) K(y); l1_norm = int K d(rho).
struct VariationNormReport {
  double sup_norm = 0.0;
  double l1_norm = 0.0;
  std::size_t grid_points = 0;
};

/// Closed-form variation for LinearSpan, FullSpace, Rank1Cone, TangentLowRank,
/// WeightedSparse (pointwise knapsack over admissible supports), Shift of a
/// linear space or of a cone containing the rank-1 tensors, and unions of
/// supported classes. Other classes throw std::invalid_argument: use
/// variation_estimate.
VariationFn variation_exact(const model::ModelClass& cls);

/// True when variation_exact supports the class.
bool has_exact_variation(const model::ModelClass& cls);

/// Lower bound max_j a_j(y)^2 over num_samples unit elements drawn with seeds
/// seed + j. The returned function evaluates anywhere, not only on a grid.
VariationFn variation_estimate(const model::ModelClass& cls, std::size_t num_samples, std::uint64_t seed,
                               const Exec& exec = {});

struct GridEstimate {
  VariationFn fn;
  std::vector<double> values;  // fn tabulated on the grid
};

/// variation_estimate tabulated on a grid, in parallel over grid points.
GridEstimate variation_estimate(const model::ModelClass& cls, const Grid& grid, std::size_t num_samples,
                                std::uint64_t seed, const Exec& exec = {});

/// The sampled unit elements behind variation_estimate (same seeds).
std::vector<CoeffTensor> draw_unit_elements(const model::ModelClass& cls, std::size_t num_samples,
                                            std::uint64_t seed, const Exec& exec = {});

enum class CombineRule { Union, SumOrthogonal, ProductIndependent, TensorProduct };

/// Union / SumOrthogonal act pointwise on functions of the same modes;
/// ProductIndependent / TensorProduct place B's modes after A's. The caller
/// asserts the structural hypothesis; certificates record what follows from it.
VariationFn variation_combine(CombineRule rule, const VariationFn& a, const VariationFn& b);

/// int K d(rho) with 64 Gauss-Legendre nodes per mode (tensorised up to four
/// modes, factorised through blocks beyond that).
double l1_norm(const VariationFn& k, const Exec& exec = {});

VariationNormReport variation_norms(const VariationFn& k, const WeightFunction& weight, const Grid& grid,
                                    const Exec& exec = {});

/// w = ||K||_{L1} / K. Throws std::domain_error when K vanishes on a node of
/// the standard grid.
WeightFunction optimal_weight(const VariationFn& k, const DomainSpec& domain, const Exec& exec = {});

/// Separable sampler for the optimal weight of the full tensor space with the
/// given per-mode Legendre dimensions: mode density sum_k b_k(y)^2 / d.
WeightFunction ambient_optimal_weight(const std::vector<std::size_t>& dims);

struct LipschitzReport {
  double sup_difference = 0.0;  // || sup|U| - sup|V| ||
  double hausdorff = 0.0;       // d_H(U, V)
  bool holds = false;
};

/// Both sides measured in the seminorm f -> max_grid sqrt(w)|f|.
LipschitzReport lipschitz_sup_check(const std::vector<Evaluable>& u, const std::vector<Evaluable>& v,
                                    const WeightFunction& weight, const Grid& grid);

/// Columns y_1..y_M,K_value,certificate.
void write_variation_csv(std::ostream& out, const VariationFn& k, const Grid& grid,
                         std::span<const double> values);

}  // namespace varfn
