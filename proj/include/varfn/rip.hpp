#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "varfn/common.hpp"
#include "varfn/measure.hpp"
#include "varfn/model.hpp"

namespace varfn {

enum class RipMethod { Spectral, MonteCarlo };

std::string to_string(RipMethod m);

/// Deviation of the empirical norm from the true norm over a class, measured
/// on one sample batch. ratios are ||a||_y^2 / ||a||^2.
struct RipReport {
  double delta_hat = 0.0;
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  RipMethod method = RipMethod::Spectral;
  std::size_t num_test = 0;  // unit elements tried (MonteCarlo only)

  bool holds(double delta) const noexcept { return delta_hat <= delta; }
};

/// Largest linear dimension accepted by rip_delta_linear.
constexpr std::size_t kMaxSpectralDimension = 1000;

/// Exact deviation over a linear class: eigenvalues of the empirical Gram
/// matrix (1/n) sum_i w_i phi(y_i) phi(y_i)^T in an orthonormal frame.
RipReport rip_delta_linear(const model::ModelClass& cls, const SampleBatch& batch, const Exec& exec = {});

/// Lower bound: max over num_test unit elements drawn with seeds seed + j.
RipReport rip_delta_mc(const model::ModelClass& cls, const SampleBatch& batch, std::size_t num_test,
                       std::uint64_t seed, const Exec& exec = {});

struct RipProbEstimate {
  std::size_t n = 0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double variation_sup = 0.0;  // ||K||_{w,inf} on the standard grid
  double exponent = 0.0;       // (n/2) (delta / variation_sup)^2
  RipMethod method = RipMethod::Spectral;
};

/// 95% Wilson score interval for failures out of trials.
std::pair<double, double> wilson_interval(std::size_t failures, std::size_t trials);

struct RipProbOptions {
  RipMethod method = RipMethod::Spectral;
  std::size_t num_test = 1000;         // MonteCarlo only
  std::size_t variation_samples = 1000;  // when no closed-form variation exists
};

/// Trial t draws its batch with seed + t; a failure is delta_hat > delta.
RipProbEstimate rip_probability(const model::ModelClass& cls, const WeightFunction& weight, std::size_t n,
                                double delta, std::size_t trials, std::uint64_t seed,
                                const RipProbOptions& options = {}, const Exec& exec = {});

/// Columns n,delta,trials,failures,rate,wilson_lo,wilson_hi,exponent.
void write_rip_csv(std::ostream& out, std::span<const RipProbEstimate> rows);

}  // namespace varfn
