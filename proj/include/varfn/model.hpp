#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "varfn/basis.hpp"
#include "varfn/common.hpp"
#include "varfn/rng.hpp"

namespace varfn::model {

struct LinearSpan {
  std::vector<std::size_t> dims;
  std::vector<std::vector<std::size_t>> indices;  // multi-indices of the spanning basis functions
};

struct FullSpace {
  std::vector<std::size_t> dims;
};

/// {v : ||v||_{omega,0} <= s} with ||v||_{omega,0} = sqrt(sum_{k in supp v} omega_k^2).
/// weights are indexed by the flat (row-major) coefficient index.
struct WeightedSparse {
  std::vector<std::size_t> dims;
  std::vector<double> weights;
  double budget = 0.0;
};

/// d1 x d2 coefficient matrices of rank <= rank.
struct LowRankMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;
};

/// All rank-1 coefficient tensors.
struct Rank1Cone {
  std::vector<std::size_t> dims;
};

/// Tangent space at a rank-R matrix: U (rows x R) and V (cols x R) hold the
/// leading singular vectors, row-major.
struct TangentLowRank {
  CoeffTensor at;
  std::size_t rank = 0;
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> singular_values;
};

struct Shift;
struct Union;
struct Ball;

/// Immutable description of a subset A of the coefficient space. Cheap to copy.
class ModelClass {
 public:
  using Variant = std::variant<LinearSpan, FullSpace, WeightedSparse, LowRankMatrix, Rank1Cone,
                               Shift, Union, Ball, TangentLowRank>;

  static ModelClass linear_span(std::vector<std::size_t> dims,
                                std::vector<std::vector<std::size_t>> indices);
  /// Span of the first d univariate basis functions (M = 1).
  static ModelClass first_functions(std::size_t d);
  static ModelClass full_space(std::vector<std::size_t> dims);
  static ModelClass weighted_sparse(std::vector<std::size_t> dims, std::vector<double> weights, double budget);
  static ModelClass low_rank_matrix(std::size_t rows, std::size_t cols, std::size_t rank);
  static ModelClass rank1_cone(std::vector<std::size_t> dims);
  /// The set {anchor} - inner.
  static ModelClass shift(CoeffTensor anchor, ModelClass inner);
  static ModelClass union_of(std::vector<ModelClass> members);
  /// inner intersected with the closed ball B(center, radius).
  static ModelClass ball(CoeffTensor center, double radius, ModelClass inner);
  /// Throws std::domain_error if sigma_rank(at) < 1e-12.
  static ModelClass tangent_low_rank(const CoeffTensor& at, std::size_t rank);

  const Variant& variant() const noexcept;
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t num_modes() const noexcept { return dims_.size(); }
  std::string name() const;

 private:
  ModelClass(std::shared_ptr<const Variant> node, std::vector<std::size_t> dims);
  std::shared_ptr<const Variant> node_;
  std::vector<std::size_t> dims_;
};

struct Shift {
  CoeffTensor anchor;
  ModelClass inner;
};

struct Union {
  std::vector<ModelClass> members;
};

struct Ball {
  CoeffTensor center;
  double radius = 0.0;
  ModelClass inner;
};

inline const ModelClass::Variant& ModelClass::variant() const noexcept { return *node_; }

/// Raised after 64 consecutive degenerate draws.
class DegenerateClass : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

constexpr int kMaxDegenerateDraws = 64;
constexpr double kDegenerateNorm = 1e-12;

/// A random (unnormalised) member of the class. anchor, when given, is the
/// point a Shift class subtracts from; cones then mix draws near the anchor
/// with global draws so that tangent directions are explored.
CoeffTensor sample_member(const ModelClass& cls, Rng& rng, const CoeffTensor* anchor = nullptr);

/// A random element of U(A) = {a/||a|| : a in A \ {0}}.
CoeffTensor sample_unit_element(const ModelClass& cls, std::uint64_t seed);
CoeffTensor sample_unit_element(const ModelClass& cls, Rng& rng);

struct Projection {
  CoeffTensor point;
  bool nonunique = false;    // a tie between minimisers was detected
  bool approximate = false;  // greedy knapsack or non-convex ball fallback
};

/// Best approximation P_A v. seed drives the random restarts of the rank-1
/// power iteration.
Projection project(const ModelClass& cls, const CoeffTensor& v, std::uint64_t seed = 0);

/// Orthonormal coefficient tensors spanning a linear class (LinearSpan,
/// FullSpace, TangentLowRank). The tangent frame lists <U> (x) R^cols first,
/// then <U>^perp (x) <V>. Other classes throw std::invalid_argument.
std::vector<CoeffTensor> orthonormal_frame(const ModelClass& cls);

/// True for the classes orthonormal_frame accepts.
bool is_linear_class(const ModelClass& cls);

/// ||v - P_A v||.
double membership_distance(const ModelClass& cls, const CoeffTensor& v, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Rank-1 approximation by higher-order power iteration.

/// A tensor that can only be accessed through contractions.
class ContractionOperator {
 public:
  virtual ~ContractionOperator() = default;
  virtual const std::vector<std::size_t>& dims() const = 0;
  /// The vector X x_{m' != mode} x_{m'} of length dims()[mode].
  virtual std::vector<double> contract_except(std::size_t mode,
                                              const std::vector<std::vector<double>>& x) const = 0;
};

class DenseContraction final : public ContractionOperator {
 public:
  explicit DenseContraction(const CoeffTensor& t);
  const std::vector<std::size_t>& dims() const override { return tensor_.dims(); }
  std::vector<double> contract_except(std::size_t mode,
                                      const std::vector<std::vector<double>>& x) const override;

 private:
  CoeffTensor tensor_;
};

struct Rank1Options {
  std::size_t max_iters = 200;
  double tol = 1e-12;
  std::size_t restarts = 3;
};

struct Rank1Fit {
  std::vector<std::vector<double>> factors;  // unit vectors
  double value = 0.0;                         // <X, x_1 (x) ... (x) x_M>
  CoeffTensor tensor() const;
};

/// Best rank-1 approximation value * (x) x_m. Keeps the best of the random
/// restarts and, when given, of a warm start.
Rank1Fit best_rank1(const ContractionOperator& op, std::uint64_t seed, const Rank1Options& options = {},
                    const std::vector<std::vector<double>>* warm_start = nullptr);

// ---------------------------------------------------------------------------
// Weighted sparsity helpers.

double weighted_sparsity(const std::vector<double>& weights, const CoeffTensor& v);

/// ||v||_{omega,0}^2 + omega_k^2 > s^2 for every k outside supp(v): the
/// neighbourhood of v in the class is a ball in a fixed-support subspace.
bool sparse_manifold_condition(const WeightedSparse& cls, const CoeffTensor& v);

struct KnapsackResult {
  std::vector<std::size_t> selected;  // flat indices
  double value = 0.0;
  bool nonunique = false;
  bool approximate = false;
};

/// max sum_{k in S} values_k s.t. sum_{k in S} costs_k <= capacity. Exact
/// dynamic programming when the costs live on an integer grid of at most 10^6
/// cells, otherwise greedy by value/cost with approximate = true.
KnapsackResult solve_knapsack(const std::vector<double>& values, const std::vector<double>& costs,
                              double capacity);

}  // namespace varfn::model
