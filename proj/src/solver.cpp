#include "varfn/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "varfn/io.hpp"
#include "varfn/kernels.hpp"
#include "varfn/rng.hpp"
#include "varfn/variation.hpp"

namespace varfn {

namespace {

void require_targets(const SampleBatch& batch, std::span<const double> target_values) {
  if (batch.size() == 0) throw std::invalid_argument("solver: empty sample batch");
  if (target_values.size() != batch.size()) throw std::invalid_argument("solver: one target value per sample");
}

double weighted_rms(std::span<const double> r, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += w[i] * r[i] * r[i];
  return std::sqrt(s / static_cast<double>(r.size()));
}

}  // namespace

SolveResult solve_linear(const model::ModelClass& cls, const SampleBatch& batch,
                         std::span<const double> target_values) {
  require_targets(batch, target_values);
  if (batch.num_modes != cls.num_modes()) throw std::invalid_argument("solve_linear: batch has wrong modes");
  const auto frame = model::orthonormal_frame(cls);
  const TensorBasis basis = TensorBasis::legendre(cls.dims());
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto dim = static_cast<Eigen::Index>(frame.size());
  Eigen::MatrixXd a(n, dim);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double s = std::sqrt(batch.weights[idx] / static_cast<double>(n));
    const auto mv = basis.mode_values(batch.point(idx));
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = s * contract(frame[static_cast<std::size_t>(j)], mv);
    b(i) = s * target_values[idx];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd c = svd.solve(b);

  CoeffTensor est = CoeffTensor::zeros(cls.dims());
  std::vector<double> data = est.data();
  for (std::size_t j = 0; j < frame.size(); ++j) {
    const CoeffTensor f = frame[j].to_dense();
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += c(static_cast<Eigen::Index>(j)) * f.data()[k];
  }
  SolveResult r;
  r.estimate = CoeffTensor::dense(cls.dims(), std::move(data));
  r.iterations = 1;
  r.residual = (a * c - b).norm();
  r.converged = true;
  r.rank_deficient = svd.rank() < dim;
  r.residual_history = {r.residual};
  return r;
}

namespace {

// Point data shared by both thresholding variants.
struct IhtData {
  std::vector<std::size_t> dims;
  std::vector<std::vector<std::vector<double>>> phi;  // phi[i][m] = basis values of mode m at y_i
  std::vector<double> weights;
  std::vector<double> targets;
  std::size_t n = 0;
};

IhtData make_data(const TensorBasis& basis, const SampleBatch& batch, std::span<const double> target_values) {
  require_targets(batch, target_values);
  if (batch.num_modes != basis.num_modes()) throw std::invalid_argument("solve_iht_rank1: batch has wrong modes");
  IhtData d;
  d.dims = basis.dims();
  d.n = batch.size();
  d.weights = batch.weights;
  d.targets.assign(target_values.begin(), target_values.end());
  d.phi.resize(d.n);
  for (std::size_t i = 0; i < d.n; ++i) d.phi[i] = basis.mode_values(batch.point(i));
  return d;
}

std::vector<double> evaluate(const IhtData& d, const CoeffTensor& c) {
  std::vector<double> v(d.n, 0.0);
  if (c.dims().empty()) return v;
  for (std::size_t i = 0; i < d.n; ++i) v[i] = contract(c, d.phi[i]);
  return v;
}

double residual_of(const IhtData& d, const CoeffTensor& c, std::vector<double>* r_out = nullptr) {
  const auto v = evaluate(d, c);
  std::vector<double> r(d.n);
  for (std::size_t i = 0; i < d.n; ++i) r[i] = d.targets[i] - v[i];
  const double res = weighted_rms(r, d.weights);
  if (r_out != nullptr) *r_out = std::move(r);
  return res;
}

// C + alpha sum_i g_i (x)_m phi_i^m, accessed through contractions only.
class GradientStepOperator final : public model::ContractionOperator {
 public:
  GradientStepOperator(const IhtData& d, const CoeffTensor* current, const std::vector<double>& g, double alpha)
      : d_(d), current_(current), g_(g), alpha_(alpha) {}

  const std::vector<std::size_t>& dims() const override { return d_.dims; }

  std::vector<double> contract_except(std::size_t mode, const std::vector<std::vector<double>>& x) const override {
    const std::size_t M = d_.dims.size();
    std::vector<double> out(d_.dims[mode], 0.0);
    auto inner = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
      return s;
    };
    if (current_ != nullptr) {
      const auto& f = current_->factors();
      double s = 1.0;
      for (std::size_t m = 0; m < M; ++m)
        if (m != mode) s *= inner(f[m], x[m]);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += s * f[mode][k];
    }
    for (std::size_t i = 0; i < d_.n; ++i) {
      double s = alpha_ * g_[i];
      if (s == 0.0) continue;
      for (std::size_t m = 0; m < M; ++m)
        if (m != mode) s *= inner(d_.phi[i][m], x[m]);
      const auto& p = d_.phi[i][mode];
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += s * p[k];
    }
    return out;
  }

 private:
  const IhtData& d_;
  const CoeffTensor* current_;
  const std::vector<double>& g_;
  double alpha_;
};

CoeffTensor dense_step(const IhtData& d, const CoeffTensor* current, const std::vector<double>& g, double alpha) {
  CoeffTensor base = current != nullptr ? current->to_dense() : CoeffTensor::zeros(d.dims);
  std::vector<double> data = base.data();
  const std::size_t M = d.dims.size();
  for (std::size_t i = 0; i < d.n; ++i) {
    const double s = alpha * g[i];
    if (s == 0.0) continue;
    std::vector<std::size_t> idx(M, 0);
    for (std::size_t p = 0; p < data.size(); ++p) {
      double v = s;
      for (std::size_t m = 0; m < M; ++m) v *= d.phi[i][m][idx[m]];
      data[p] += v;
      for (std::size_t m = M; m-- > 0;) {
        if (++idx[m] < d.dims[m]) break;
        idx[m] = 0;
      }
    }
  }
  return CoeffTensor::dense(d.dims, std::move(data));
}

using Truncation =
    std::function<CoeffTensor(const IhtData&, const CoeffTensor*, const std::vector<double>&, double, std::uint64_t)>;

SolveResult run_iht(const IhtData& d, const IhtOptions& options, const Truncation& truncate) {
  SolveResult out;
  std::vector<double> r;
  double res = residual_of(d, CoeffTensor{}, &r);
  out.estimate = CoeffTensor::zeros(d.dims);
  out.residual = res;
  out.residual_history.push_back(res);
  const double scale = weighted_rms(d.targets, d.weights);
  if (scale == 0.0) {
    out.iterations = 1;
    out.converged = true;
    return out;
  }
  std::optional<CoeffTensor> current;
  std::size_t fails = 0;
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    out.iterations = it + 1;
    std::vector<double> g(d.n);
    for (std::size_t i = 0; i < d.n; ++i) g[i] = 2.0 / static_cast<double>(d.n) * d.weights[i] * r[i];

    // Halve from alpha = 1 until the residual drops, then keep halving while
    // it keeps dropping.
    double alpha = 1.0;
    std::optional<CoeffTensor> best;
    double best_res = res;
    std::vector<double> best_r;
    for (std::size_t h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
      const std::uint64_t seed = derive_seed(options.seed, (it << 6) + h);
      CoeffTensor cand = truncate(d, current ? &*current : nullptr, g, alpha, seed);
      std::vector<double> cand_r;
      const double cand_res = residual_of(d, cand, &cand_r);
      if (cand_res < best_res) {
        best_res = cand_res;
        best = std::move(cand);
        best_r = std::move(cand_r);
      } else if (best) {
        break;
      }
    }
    if (!best) {
      if (res <= 1e-10 * scale) {
        out.converged = true;
        break;
      }
      if (++fails >= options.stagnation_limit) {
        out.stagnated = true;
        break;
      }
      continue;
    }
    fails = 0;
    const double change = (res - best_res) / res;
    current = std::move(best);
    r = std::move(best_r);
    res = best_res;
    out.residual_history.push_back(res);
    if (change < options.tol || res <= 1e-14 * scale) {
      out.converged = true;
      break;
    }
  }
  if (current) out.estimate = *current;
  out.residual = res;
  return out;
}

CoeffTensor truncate_matrix(const IhtData& d, const CoeffTensor* current, const std::vector<double>& g, double alpha,
                            std::uint64_t seed) {
  return model::project(model::ModelClass::rank1_cone(d.dims), dense_step(d, current, g, alpha), seed).point;
}

}  // namespace

SolveResult solve_iht_rank1(const TensorBasis& basis, const SampleBatch& batch,
                            std::span<const double> target_values, const IhtOptions& options) {
  const IhtData d = make_data(basis, batch, target_values);
  dense_size(d.dims);
  if (d.dims.size() <= 2) return run_iht(d, options, truncate_matrix);
  auto implicit = [](const IhtData& data, const CoeffTensor* current, const std::vector<double>& g, double alpha,
                     std::uint64_t seed) {
    GradientStepOperator op(data, current, g, alpha);
    model::Rank1Options opts;
    std::vector<std::vector<double>> warm;
    if (current != nullptr) {
      warm = current->factors();
      opts.restarts = 1;
    }
    return model::best_rank1(op, seed, opts, current != nullptr ? &warm : nullptr).tensor();
  };
  return run_iht(d, options, implicit);
}

namespace reference {

SolveResult solve_iht_rank1(const TensorBasis& basis, const SampleBatch& batch,
                            std::span<const double> target_values, const IhtOptions& options) {
  const IhtData d = make_data(basis, batch, target_values);
  return run_iht(d, options, truncate_matrix);
}

}  // namespace reference

double quasi_opt_factor(double delta) {
  if (!(delta < 1.0)) throw std::domain_error("quasi_opt_factor: delta must be below 1");
  return 1.0 + 2.0 / std::sqrt(1.0 - delta);
}

QuasiOptReport quasi_opt_check(const CoeffTensor& u, const CoeffTensor& u_best, const SampleBatch& batch,
                               const SolveResult& result, double delta_hat, const WeightFunction& weight,
                               const Grid& grid, const Exec& exec) {
  QuasiOptReport q;
  q.delta_hat = delta_hat;
  q.applicable = delta_hat >= 0.0 && delta_hat < 1.0;
  const TensorBasis basis = TensorBasis::legendre(u.dims());
  const CoeffTensor tail = linear_combination(1.0, u, -1.0, u_best);
  const CoeffTensor err = linear_combination(1.0, u, -1.0, result.estimate);
  q.lhs = err.norm();
  q.tail_sup = weighted_sup_norm([&](std::span<const double> y) { return eval_function(tail, basis, y); }, weight,
                                 grid, exec);
  const double emp_est = empirical_norm([&](std::span<const double> y) { return eval_function(err, basis, y); }, batch);
  const double emp_best =
      empirical_norm([&](std::span<const double> y) { return eval_function(tail, basis, y); }, batch);
  q.empirically_optimal = emp_est <= emp_best * (1.0 + 1e-9) + 1e-14;
  if (!q.applicable) return q;
  q.factor = quasi_opt_factor(delta_hat);
  q.rhs = q.factor * q.tail_sup;
  q.pass = q.lhs <= q.rhs * (1.0 + 1e-12) + 1e-14;
  return q;
}

CoeffTensor phase_target(PhaseTarget target, std::size_t order, std::size_t d) {
  if (order == 0 || d == 0) throw std::invalid_argument("phase_target: order and d must be positive");
  std::vector<double> mode(d, 1.0);
  if (target == PhaseTarget::Exp) mode = expand_univariate([](double y) { return std::exp(y); }, d);
  return CoeffTensor::rank1(std::vector<std::vector<double>>(order, mode));
}

std::vector<PhaseCell> phase_diagram(const PhaseConfig& config, const Exec& exec) {
  if (config.orders.empty() || config.samples.empty())
    throw std::invalid_argument("phase_diagram: order and sample lists must be nonempty");
  if (config.trials == 0) throw std::invalid_argument("phase_diagram: trials must be positive");
  auto orders = config.orders;
  auto samples = config.samples;
  std::sort(orders.begin(), orders.end());
  std::sort(samples.begin(), samples.end());
  std::vector<PhaseCell> cells;
  for (std::size_t m : orders)
    for (std::size_t n : samples) {
      PhaseCell c;
      c.order = m;
      c.n = n;
      c.trials = config.trials;
      c.seed = derive_seed(config.seed, cells.size() << 20);
      cells.push_back(c);
    }

  const std::size_t trials = config.trials;
  std::vector<double> errors(cells.size() * trials, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> messages(cells.size() * trials);
  kernels::for_each_index(
      errors.size(),
      [&](std::size_t job) {
        const PhaseCell& cell = cells[job / trials];
        const std::uint64_t seed = derive_seed(cell.seed, job % trials);
        try {
          const std::vector<std::size_t> dims(cell.order, config.d);
          dense_size(dims);
          const CoeffTensor truth = phase_target(config.target, cell.order, config.d);
          const TensorBasis basis = TensorBasis::legendre(dims);
          const WeightFunction weight = config.weight == PhaseWeight::Optimal ? ambient_optimal_weight(dims)
                                                                              : WeightFunction::uniform(cell.order);
          const SampleBatch batch = draw_samples(DomainSpec(cell.order), weight, cell.n, seed);
          std::vector<double> values(batch.size());
          for (std::size_t i = 0; i < batch.size(); ++i) values[i] = eval_function(truth, basis, batch.point(i));
          IhtOptions opts = config.iht;
          opts.seed = seed;
          const SolveResult r = solve_iht_rank1(basis, batch, values, opts);
          errors[job] = distance(r.estimate, truth) / truth.norm();
        } catch (const std::exception& e) {
          messages[job] = e.what();
        }
      },
      exec);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t job = c * trials + t;
      if (!messages[job].empty()) {
        cells[c].failed = true;
        if (cells[c].error.empty()) cells[c].error = messages[job];
        continue;
      }
      sum += errors[job];
      if (errors[job] <= config.success_threshold) ++ok;
    }
    if (cells[c].failed) {
      cells[c].mean_rel_error = std::numeric_limits<double>::quiet_NaN();
      cells[c].success_rate = std::numeric_limits<double>::quiet_NaN();
    } else {
      cells[c].mean_rel_error = sum / static_cast<double>(trials);
      cells[c].success_rate = static_cast<double>(ok) / static_cast<double>(trials);
    }
  }
  return cells;
}

void write_phase_csv(std::ostream& out, std::span<const PhaseCell> cells) {
  out << "M,n,trials,mean_rel_error,success_rate,seed\n";
  for (const auto& c : cells) {
    out << c.order << ',' << c.n << ',' << c.trials << ',' << io::format_double(c.mean_rel_error) << ','
        << io::format_double(c.success_rate) << ',' << c.seed << '\n';
  }
}

}  // namespace varfn
