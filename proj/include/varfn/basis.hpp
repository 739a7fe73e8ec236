#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace varfn {

/// Orthonormal family {b_k}_{k<d} on [-1,1] with respect to dx/2.
class UnivariateBasis {
 public:
  virtual ~UnivariateBasis() = default;
  virtual std::size_t dimension() const noexcept = 0;
  virtual double eval(std::size_t k, double y) const = 0;
  /// Writes b_0(y), ..., b_{d-1}(y) into out (size d).
  virtual void eval_all(double y, std::span<double> out) const = 0;
};

/// sqrt(2k+1) P_k(y) by the three-term recurrence. Throws std::domain_error
/// for |y| > 1.
double eval_legendre(std::size_t k, double y);

class LegendreBasis final : public UnivariateBasis {
 public:
  explicit LegendreBasis(std::size_t d);
  std::size_t dimension() const noexcept override { return d_; }
  double eval(std::size_t k, double y) const override;
  void eval_all(double y, std::span<double> out) const override;

 private:
  std::size_t d_;
};

class TensorBasis {
 public:
  explicit TensorBasis(std::vector<std::shared_ptr<const UnivariateBasis>> modes);
  static TensorBasis legendre(std::vector<std::size_t> dims);

  std::size_t num_modes() const noexcept { return modes_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t total_dimension() const noexcept;
  const UnivariateBasis& mode(std::size_t m) const { return *modes_.at(m); }

  /// Per-mode basis values at y: result[m][k] = b_{m,k}(y_m).
  std::vector<std::vector<double>> mode_values(std::span<const double> y) const;

 private:
  std::vector<std::shared_ptr<const UnivariateBasis>> modes_;
  std::vector<std::size_t> dims_;
};

/// Dense tensors above this many entries are refused (d = 15 allows M <= 6).
constexpr std::size_t kMaxDenseEntries = std::size_t{1} << 24;

/// Coefficients of a function in a tensor-product basis, either as a full
/// row-major array (last mode fastest) or as M factor vectors of a rank-1
/// tensor.
class CoeffTensor {
 public:
  enum class Representation { Dense, Rank1 };

  CoeffTensor() = default;
  static CoeffTensor dense(std::vector<std::size_t> dims, std::vector<double> data);
  static CoeffTensor zeros(std::vector<std::size_t> dims);
  static CoeffTensor unit(std::vector<std::size_t> dims, std::span<const std::size_t> multi_index);
  static CoeffTensor rank1(std::vector<std::vector<double>> factors);

  Representation representation() const noexcept { return rep_; }
  bool is_rank1() const noexcept { return rep_ == Representation::Rank1; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t num_modes() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept;

  /// Dense entries; throws std::logic_error for rank-1 tensors.
  const std::vector<double>& data() const;
  const std::vector<std::vector<double>>& factors() const;

  CoeffTensor to_dense() const;
  double norm() const;

  std::size_t flat_index(std::span<const std::size_t> multi_index) const;

 private:
  Representation rep_ = Representation::Dense;
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
  std::vector<std::vector<double>> factors_;
};

std::size_t dense_size(std::span<const std::size_t> dims);

/// Euclidean inner product of two coefficient tensors of equal dims.
double dot(const CoeffTensor& a, const CoeffTensor& b);
/// alpha*a + beta*b as a dense tensor.
CoeffTensor linear_combination(double alpha, const CoeffTensor& a, double beta, const CoeffTensor& b);
CoeffTensor scaled(const CoeffTensor& a, double alpha);
/// ||a - b|| without densifying two rank-1 operands.
double distance(const CoeffTensor& a, const CoeffTensor& b);

/// Contraction of c with per-mode basis values (see TensorBasis::mode_values).
/// Rank-1 tensors cost sum_m d_m; dense tensors cost prod_m d_m.
double contract(const CoeffTensor& c, const std::vector<std::vector<double>>& mode_values);

/// v(y) = sum_k c_k prod_m b_{m,k_m}(y_m).
double eval_function(const CoeffTensor& c, const TensorBasis& basis, std::span<const double> y);

/// c_k = int f b_k d(rho) by Gauss-Legendre quadrature with quad_nodes nodes.
std::vector<double> expand_univariate(const std::function<double(double)>& f, std::size_t d,
                                      std::size_t quad_nodes = 64);

}  // namespace varfn
