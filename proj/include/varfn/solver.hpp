#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
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

struct SolveResult {
  CoeffTensor estimate;
  std::size_t iterations = 0;
  double residual = 0.0;  // empirical norm ||u - estimate||_y
  bool converged = false;
  bool rank_deficient = false;  // linear solve only
  bool stagnated = false;       // hard thresholding only
  std::vector<double> residual_history;  // accepted iterates
};

/// Weighted least squares over a linear class. Rank-deficient systems use the
/// pseudo-inverse with singular values below 1e-10 sigma_max discarded.
SolveResult solve_linear(const model::ModelClass& cls, const SampleBatch& batch,
                         std::span<const double> target_values);

struct IhtOptions {
  std::size_t max_iters = 500;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::size_t max_halvings = 30;
  std::size_t stagnation_limit = 5;
};

/// Iterative hard thresholding onto rank-1 coefficient tensors. The
/// thresholding operates on C + alpha G without forming G as a dense tensor.
SolveResult solve_iht_rank1(const TensorBasis& basis, const SampleBatch& batch,
                            std::span<const double> target_values, const IhtOptions& options = {});

namespace reference {
/// Same iteration with dense tensors and a dense gradient; for tests.
SolveResult solve_iht_rank1(const TensorBasis& basis, const SampleBatch& batch,
                            std::span<const double> target_values, const IhtOptions& options = {});
}  // namespace reference

/// 1 + 2 / sqrt(1 - delta).
double quasi_opt_factor(double delta);

struct QuasiOptReport {
  bool applicable = false;  // delta_hat < 1
  double lhs = 0.0;         // ||u - estimate||
  double rhs = 0.0;         // factor * ||u - u_best||_{w,inf}
  double factor = 0.0;
  double tail_sup = 0.0;    // ||u - u_best||_{w,inf}
  double delta_hat = 0.0;
  bool empirically_optimal = false;  // ||u - estimate||_y <= ||u - u_best||_y
  bool pass = false;
};

/// u is the target, u_best its best approximation in the class; the weighted
/// sup norm of the tail is taken over grid.
QuasiOptReport quasi_opt_check(const CoeffTensor& u, const CoeffTensor& u_best, const SampleBatch& batch,
                               const SolveResult& result, double delta_hat, const WeightFunction& weight,
                               const Grid& grid, const Exec& exec = {});

enum class PhaseTarget { Ones, Exp };
enum class PhaseWeight { Uniform, Optimal };

struct PhaseConfig {
  std::vector<std::size_t> orders;   // M values
  std::vector<std::size_t> samples;  // n values
  std::size_t d = 15;
  PhaseTarget target = PhaseTarget::Ones;
  PhaseWeight weight = PhaseWeight::Optimal;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  IhtOptions iht;
  double success_threshold = 1e-4;
};

struct PhaseCell {
  std::size_t order = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_rel_error = 0.0;
  double success_rate = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

/// Rank-1 target coefficients: all ones, or the per-mode expansion of exp.
CoeffTensor phase_target(PhaseTarget target, std::size_t order, std::size_t d);

/// Cells sorted by (M, n); cell c uses seed base + (c << 20) and trial t of it
/// adds t.
std::vector<PhaseCell> phase_diagram(const PhaseConfig& config, const Exec& exec = {});

/// Columns M,n,trials,mean_rel_error,success_rate,seed. Failed cells carry nan.
void write_phase_csv(std::ostream& out, std::span<const PhaseCell> cells);

}  // namespace varfn
