#include "varfn/rip.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "varfn/io.hpp"
#include "varfn/kernels.hpp"
#include "varfn/rng.hpp"
#include "varfn/variation.hpp"

namespace varfn {

std::string to_string(RipMethod m) { return m == RipMethod::Spectral ? "spectral" : "mc"; }

namespace {

RipReport from_ratios(double lo, double hi, RipMethod method, std::size_t num_test) {
  RipReport r;
  r.min_ratio = lo;
  r.max_ratio = hi;
  r.delta_hat = std::max({1.0 - lo, hi - 1.0, 0.0});
  r.method = method;
  r.num_test = num_test;
  return r;
}

void require_batch(const model::ModelClass& cls, const SampleBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("rip: empty sample batch");
  if (batch.num_modes != cls.num_modes()) throw std::invalid_argument("rip: batch and class have different modes");
}

}  // namespace

RipReport rip_delta_linear(const model::ModelClass& cls, const SampleBatch& batch, const Exec& exec) {
  require_batch(cls, batch);
  const auto frame = model::orthonormal_frame(cls);
  const std::size_t dim = frame.size();
  if (dim > kMaxSpectralDimension) throw std::invalid_argument("rip_delta_linear: dimension above 1000");
  const TensorBasis basis = TensorBasis::legendre(cls.dims());
  const std::size_t n = batch.size();
  std::vector<double> features(n * dim);
  kernels::for_each_index(
      n,
      [&](std::size_t i) {
        const auto mv = basis.mode_values(batch.point(i));
        for (std::size_t j = 0; j < dim; ++j) features[i * dim + j] = contract(frame[j], mv);
      },
      exec);
  const std::vector<double> gram = kernels::weighted_gram(features, dim, batch.weights, exec);
  const Eigen::Map<const Eigen::MatrixXd> g(gram.data(), static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return from_ratios(ev.minCoeff(), ev.maxCoeff(), RipMethod::Spectral, 0);
}

RipReport rip_delta_mc(const model::ModelClass& cls, const SampleBatch& batch, std::size_t num_test,
                       std::uint64_t seed, const Exec& exec) {
  require_batch(cls, batch);
  if (num_test == 0) throw std::invalid_argument("rip_delta_mc: num_test must be positive");
  const TensorBasis basis = TensorBasis::legendre(cls.dims());
  const std::size_t n = batch.size();
  std::vector<std::vector<std::vector<double>>> mode_values(n);
  for (std::size_t i = 0; i < n; ++i) mode_values[i] = basis.mode_values(batch.point(i));
  // Dense features phi_i = (x)_m b_m(y_i) so that dense draws cost one dot product.
  const std::size_t total = basis.total_dimension();
  std::vector<double> features;
  const bool use_features = total <= (std::size_t{1} << 16);
  if (use_features) {
    features.resize(n * total);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> phi{1.0};
      for (const auto& v : mode_values[i]) {
        std::vector<double> next(phi.size() * v.size());
        for (std::size_t a = 0; a < phi.size(); ++a)
          for (std::size_t k = 0; k < v.size(); ++k) next[a * v.size() + k] = phi[a] * v[k];
        phi = std::move(next);
      }
      std::copy(phi.begin(), phi.end(), features.begin() + static_cast<std::ptrdiff_t>(i * total));
    }
  }
  std::vector<double> ratios(num_test);
  kernels::for_each_index(
      num_test,
      [&](std::size_t j) {
        const CoeffTensor a = model::sample_unit_element(cls, derive_seed(seed, j));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double v = 0.0;
          if (a.is_rank1() || !use_features) {
            v = contract(a, mode_values[i]);
          } else {
            const double* phi = features.data() + i * total;
            const auto& d = a.data();
            for (std::size_t k = 0; k < total; ++k) v += d[k] * phi[k];
          }
          s += batch.weights[i] * v * v;
        }
        ratios[j] = s / static_cast<double>(n);
      },
      exec);
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return from_ratios(*lo, *hi, RipMethod::MonteCarlo, num_test);
}

std::pair<double, double> wilson_interval(std::size_t failures, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be positive");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(failures) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  const double lo = failures == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = failures == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

RipProbEstimate rip_probability(const model::ModelClass& cls, const WeightFunction& weight, std::size_t n,
                                double delta, std::size_t trials, std::uint64_t seed,
                                const RipProbOptions& options, const Exec& exec) {
  if (trials == 0) throw std::invalid_argument("rip_probability: trials must be at least 1");
  if (n == 0) throw std::invalid_argument("rip_probability: n must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("rip_probability: delta must lie in (0, 1)");
  if (weight.num_modes() != cls.num_modes()) throw std::invalid_argument("rip_probability: weight has wrong modes");
  if (options.method == RipMethod::Spectral && !model::is_linear_class(cls))
    throw std::invalid_argument("rip_probability: spectral mode needs a linear class");

  const DomainSpec domain(cls.num_modes());
  std::vector<char> failed(trials, 0);
  // Trials run in parallel; each inner computation stays serial.
  const Exec inner{exec.threads, true};
  kernels::for_each_index(
      trials,
      [&](std::size_t t) {
        const SampleBatch batch = draw_samples(domain, weight, n, derive_seed(seed, t));
        const RipReport r = options.method == RipMethod::Spectral
                                ? rip_delta_linear(cls, batch, inner)
                                : rip_delta_mc(cls, batch, options.num_test, derive_seed(seed, t), inner);
        failed[t] = r.delta_hat > delta ? 1 : 0;
      },
      exec);

  RipProbEstimate e;
  e.n = n;
  e.delta = delta;
  e.trials = trials;
  e.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  e.rate = static_cast<double>(e.failures) / static_cast<double>(trials);
  std::tie(e.wilson_lo, e.wilson_hi) = wilson_interval(e.failures, trials);
  const VariationFn k = has_exact_variation(cls) ? variation_exact(cls)
                                                 : variation_estimate(cls, options.variation_samples, seed, exec);
  e.variation_sup = variation_norms(k, weight, standard_grid(cls.num_modes(), seed), exec).sup_norm;
  const double ratio = delta / e.variation_sup;
  e.exponent = 0.5 * static_cast<double>(n) * ratio * ratio;
  e.method = options.method;
  return e;
}

void write_rip_csv(std::ostream& out, std::span<const RipProbEstimate> rows) {
  out << "n,delta,trials,failures,rate,wilson_lo,wilson_hi,exponent\n";
  for (const auto& r : rows) {
    out << r.n << ',' << io::format_double(r.delta) << ',' << r.trials << ',' << r.failures << ','
        << io::format_double(r.rate) << ',' << io::format_double(r.wilson_lo) << ','
        << io::format_double(r.wilson_hi) << ',' << io::format_double(r.exponent) << '\n';
  }
}

}  // namespace varfn
