#include "varfn/variation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "varfn/io.hpp"
#include "varfn/kernels.hpp"
#include "varfn/quadrature.hpp"
#include "varfn/rng.hpp"

namespace varfn {

std::string to_string(Certificate c) {
  switch (c) {
    case Certificate::Exact:
      return "exact";
    case Certificate::McLowerBound:
      return "mc_lower_bound";
    case Certificate::UpperBound:
      return "upper_bound";
    case Certificate::Uncertified:
      return "uncertified";
  }
  return "uncertified";
}

VariationFn::VariationFn(std::size_t num_modes, Evaluable eval, Certificate cert, std::string provenance)
    : num_modes_(num_modes), eval_(std::move(eval)), cert_(cert), provenance_(std::move(provenance)) {
  if (num_modes_ == 0) throw std::invalid_argument("VariationFn: num_modes must be positive");
  if (!eval_) throw std::invalid_argument("VariationFn: empty evaluator");
}

VariationFn VariationFn::with_linear_dimension(std::size_t dim) const {
  VariationFn k = *this;
  k.linear_dim_ = dim;
  return k;
}

VariationFn VariationFn::with_blocks(std::vector<VariationFn> blocks) const {
  std::size_t modes = 0;
  for (const auto& b : blocks) modes += b.num_modes();
  if (modes != num_modes_) throw std::invalid_argument("VariationFn: blocks do not cover the modes");
  VariationFn k = *this;
  k.blocks_ = std::move(blocks);
  return k;
}

VariationFn VariationFn::with_mc(std::size_t samples, std::uint64_t seed) const {
  VariationFn k = *this;
  k.mc_samples_ = samples;
  k.mc_seed_ = seed;
  return k;
}

namespace {

using model::ModelClass;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Sum of the first d squared Legendre functions at y[0].
VariationFn full_mode_variation(std::size_t d) {
  auto basis = std::make_shared<LegendreBasis>(d);
  Evaluable f = [basis, d](std::span<const double> y) {
    std::vector<double> b(d);
    basis->eval_all(y[0], b);
    double s = 0.0;
    for (double x : b) s += x * x;
    return s;
  };
  return VariationFn(1, std::move(f), Certificate::Exact, "span of the first " + std::to_string(d) + " Legendre functions")
      .with_linear_dimension(d);
}

// Product of the given blocks over consecutive mode groups.
Evaluable product_evaluator(std::vector<VariationFn> blocks) {
  return [blocks = std::move(blocks)](std::span<const double> y) {
    double p = 1.0;
    std::size_t offset = 0;
    for (const auto& b : blocks) {
      p *= b(y.subspan(offset, b.num_modes()));
      offset += b.num_modes();
    }
    return p;
  };
}

VariationFn full_space_variation(const std::vector<std::size_t>& dims, const std::string& provenance) {
  std::vector<VariationFn> blocks;
  std::size_t total = 1;
  for (std::size_t d : dims) {
    blocks.push_back(full_mode_variation(d));
    total *= d;
  }
  return VariationFn(dims.size(), product_evaluator(blocks), Certificate::Exact, provenance)
      .with_linear_dimension(total)
      .with_blocks(blocks);
}

// sum_j (sum_k frame[k, j] b_k(y))^2 for an orthonormal d x r frame (row-major).
double frame_variation(const std::vector<double>& frame, std::size_t d, std::size_t r, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k < d; ++k) v += frame[k * r + j] * b[k];
    s += v * v;
  }
  return s;
}

VariationFn linear_span_variation(const model::LinearSpan& s) {
  auto basis = std::make_shared<TensorBasis>(TensorBasis::legendre(s.dims));
  auto indices = s.indices;
  Evaluable f = [basis, indices](std::span<const double> y) {
    const auto mv = basis->mode_values(y);
    double sum = 0.0;
    for (const auto& idx : indices) {
      double p = 1.0;
      for (std::size_t m = 0; m < idx.size(); ++m) p *= mv[m][idx[m]];
      sum += p * p;
    }
    return sum;
  };
  return VariationFn(s.dims.size(), std::move(f), Certificate::Exact,
                     "sum of squared basis functions over the index set")
      .with_linear_dimension(s.indices.size());
}

VariationFn tangent_variation(const model::TangentLowRank& t) {
  const std::size_t rows = t.at.dims()[0];
  const std::size_t cols = t.at.dims()[1];
  const std::size_t r = t.rank;
  auto left = t.left;
  auto right = t.right;
  Evaluable f = [=](std::span<const double> y) {
    std::vector<double> bl(rows);
    std::vector<double> br(cols);
    LegendreBasis(rows).eval_all(y[0], bl);
    LegendreBasis(cols).eval_all(y[1], br);
    double full_l = 0.0;
    for (double x : bl) full_l += x * x;
    double full_r = 0.0;
    for (double x : br) full_r += x * x;
    const double kl = frame_variation(left, rows, r, bl);
    const double kr = frame_variation(right, cols, r, br);
    // K_{W_L} + K_{W_R} with W_L = <U> (x) V_R, W_R = <U>^perp (x) <V>.
    return kl * full_r + std::max(full_l - kl, 0.0) * kr;
  };
  return VariationFn(2, std::move(f), Certificate::Exact, "tangent space W_L + W_R of a rank-R matrix")
      .with_linear_dimension(r * cols + (rows - r) * r);
}

VariationFn sparse_variation(const model::WeightedSparse& ws) {
  std::vector<double> costs;
  for (double w : ws.weights) costs.push_back(w * w);
  const double cap = ws.budget * ws.budget;
  if (model::solve_knapsack(std::vector<double>(costs.size(), 1.0), costs, cap).approximate)
    throw std::invalid_argument("variation_exact: weights are not on a small integer grid; use variation_estimate");
  auto basis = std::make_shared<TensorBasis>(TensorBasis::legendre(ws.dims));
  Evaluable f = [basis, costs, cap](std::span<const double> y) {
    const auto mv = basis->mode_values(y);
    const std::size_t M = mv.size();
    std::vector<double> values(costs.size());
    std::vector<std::size_t> idx(M, 0);
    for (std::size_t p = 0; p < values.size(); ++p) {
      double v = 1.0;
      for (std::size_t m = 0; m < M; ++m) v *= mv[m][idx[m]];
      values[p] = v * v;
      for (std::size_t m = M; m-- > 0;) {
        if (++idx[m] < mv[m].size()) break;
        idx[m] = 0;
      }
    }
    return model::solve_knapsack(values, costs, cap).value;
  };
  return VariationFn(ws.dims.size(), std::move(f), Certificate::Exact,
                     "max over admissible supports of the span variation (pointwise knapsack)");
}

bool is_linear(const ModelClass& cls) {
  const auto& v = cls.variant();
  return std::holds_alternative<model::LinearSpan>(v) || std::holds_alternative<model::FullSpace>(v) ||
         std::holds_alternative<model::TangentLowRank>(v);
}

bool contains_rank1_cone(const ModelClass& cls) {
  const auto& v = cls.variant();
  return std::holds_alternative<model::Rank1Cone>(v) || std::holds_alternative<model::LowRankMatrix>(v) ||
         std::holds_alternative<model::FullSpace>(v);
}

VariationFn shift_variation(const model::Shift& s) {
  const ModelClass& inner = s.inner;
  if (contains_rank1_cone(inner) && !std::holds_alternative<model::FullSpace>(inner.variant()))
    return full_space_variation(inner.dims(), "{v} - cone containing all rank-1 tensors equals the ambient span");
  if (!is_linear(inner)) throw std::invalid_argument("variation_exact: unsupported shifted class " + inner.name());
  const VariationFn base = variation_exact(inner);
  const CoeffTensor perp = linear_combination(1.0, s.anchor, -1.0, model::project(inner, s.anchor).point);
  const double pn = perp.norm();
  if (pn <= 1e-12 * std::max(1.0, s.anchor.norm())) return base;
  auto basis = std::make_shared<TensorBasis>(TensorBasis::legendre(inner.dims()));
  const CoeffTensor unit = scaled(perp, 1.0 / pn);
  Evaluable f = [base, basis, unit](std::span<const double> y) {
    const double v = contract(unit, basis->mode_values(y));
    return base(y) + v * v;
  };
  return VariationFn(inner.num_modes(), std::move(f), Certificate::Exact,
                     "affine shift: span variation plus the normalised anchor residual")
      .with_linear_dimension(*base.linear_dimension() + 1);
}

constexpr std::size_t kMaxGemmFeatures = 4096;

// phi(y) = (x)_m b_m(y_m), last mode fastest.
std::vector<double> tensor_features(const std::vector<std::vector<double>>& mode_values) {
  std::vector<double> features{1.0};
  for (const auto& v : mode_values) {
    std::vector<double> next(features.size() * v.size());
    for (std::size_t i = 0; i < features.size(); ++i)
      for (std::size_t k = 0; k < v.size(); ++k) next[i * v.size() + k] = features[i] * v[k];
    features = std::move(next);
  }
  return features;
}

Certificate combine_certificates(Certificate a, Certificate b) {
  return a == b ? a : Certificate::Uncertified;
}

}  // namespace

bool has_exact_variation(const ModelClass& cls) {
  return std::visit(Overloaded{
                        [](const model::LinearSpan&) { return true; },
                        [](const model::FullSpace&) { return true; },
                        [](const model::Rank1Cone&) { return true; },
                        [](const model::TangentLowRank&) { return true; },
                        [](const model::WeightedSparse& ws) {
                          std::vector<double> costs;
                          for (double w : ws.weights) costs.push_back(w * w);
                          return !model::solve_knapsack(std::vector<double>(costs.size(), 1.0), costs,
                                                        ws.budget * ws.budget)
                                      .approximate;
                        },
                        [](const model::LowRankMatrix& l) { return l.rank == std::min(l.rows, l.cols); },
                        [](const model::Shift& s) { return contains_rank1_cone(s.inner) || is_linear(s.inner); },
                        [](const model::Union& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const ModelClass& m) { return has_exact_variation(m); });
                        },
                        [](const model::Ball&) { return false; },
                    },
                    cls.variant());
}

VariationFn variation_exact(const ModelClass& cls) {
  return std::visit(
      Overloaded{
          [](const model::LinearSpan& s) { return linear_span_variation(s); },
          [](const model::FullSpace& s) { return full_space_variation(s.dims, "ambient tensor-product span"); },
          [](const model::Rank1Cone& s) {
            return full_space_variation(s.dims, "rank-1 cone: product of per-mode span variations");
          },
          [](const model::TangentLowRank& t) { return tangent_variation(t); },
          [](const model::WeightedSparse& ws) { return sparse_variation(ws); },
          [&](const model::LowRankMatrix& l) -> VariationFn {
            if (l.rank != std::min(l.rows, l.cols))
              return full_space_variation(cls.dims(), "low-rank matrices contain all rank-1 matrices");
            return full_space_variation(cls.dims(), "full-rank class is the ambient span");
          },
          [](const model::Shift& s) { return shift_variation(s); },
          [&](const model::Union& u) {
            std::vector<VariationFn> parts;
            for (const auto& m : u.members) parts.push_back(variation_exact(m));
            Evaluable f = [parts](std::span<const double> y) {
              double best = 0.0;
              for (const auto& p : parts) best = std::max(best, p(y));
              return best;
            };
            return VariationFn(cls.num_modes(), std::move(f), Certificate::Exact, "pointwise max over the union");
          },
          [](const model::Ball&) -> VariationFn {
            throw std::invalid_argument("variation_exact: no closed form for ball classes; use variation_estimate");
          },
      },
      cls.variant());
}

std::vector<CoeffTensor> draw_unit_elements(const ModelClass& cls, std::size_t num_samples, std::uint64_t seed,
                                            const Exec& exec) {
  if (num_samples == 0) throw std::invalid_argument("variation_estimate: num_samples must be positive");
  std::vector<CoeffTensor> samples(num_samples);
  kernels::for_each_index(
      num_samples, [&](std::size_t j) { samples[j] = model::sample_unit_element(cls, derive_seed(seed, j)); }, exec);
  return samples;
}

namespace {

VariationFn estimate_from_samples(const ModelClass& cls, std::shared_ptr<const std::vector<CoeffTensor>> samples,
                                  std::uint64_t seed) {
  const std::size_t num_samples = samples->size();
  auto basis = std::make_shared<TensorBasis>(TensorBasis::legendre(cls.dims()));
  const bool any_dense = std::any_of(samples->begin(), samples->end(),
                                     [](const CoeffTensor& t) { return !t.is_rank1(); });
  Evaluable f = [samples, basis, any_dense](std::span<const double> y) {
    const auto mv = basis->mode_values(y);
    // A dense sample evaluates as <a, phi(y)>.
    const std::vector<double> features = any_dense ? tensor_features(mv) : std::vector<double>{};
    double best = 0.0;
    for (const auto& a : *samples) {
      double value = 0.0;
      if (a.is_rank1()) {
        value = contract(a, mv);
      } else {
        const auto& d = a.data();
        for (std::size_t k = 0; k < d.size(); ++k) value += d[k] * features[k];
      }
      best = std::max(best, value * value);
    }
    return best;
  };
  return VariationFn(cls.num_modes(), std::move(f), Certificate::McLowerBound,
                     "max over sampled unit elements of " + cls.name())
      .with_mc(num_samples, seed);
}

}  // namespace

VariationFn variation_estimate(const ModelClass& cls, std::size_t num_samples, std::uint64_t seed, const Exec& exec) {
  return estimate_from_samples(
      cls, std::make_shared<const std::vector<CoeffTensor>>(draw_unit_elements(cls, num_samples, seed, exec)), seed);
}

GridEstimate variation_estimate(const ModelClass& cls, const Grid& grid, std::size_t num_samples, std::uint64_t seed,
                                const Exec& exec) {
  if (grid.num_modes() != cls.num_modes()) throw std::invalid_argument("variation_estimate: grid has wrong modes");
  const auto samples =
      std::make_shared<const std::vector<CoeffTensor>>(draw_unit_elements(cls, num_samples, seed, exec));
  VariationFn fn = estimate_from_samples(cls, samples, seed);
  const TensorBasis basis = TensorBasis::legendre(cls.dims());
  const std::size_t total = basis.total_dimension();
  if (total > kMaxGemmFeatures) return {fn, kernels::tabulate(fn.evaluator(), grid, exec)};

  // Blocked product (features of a block of points) x (sample coefficients).
  const auto D = static_cast<Eigen::Index>(total);
  Eigen::MatrixXd coeffs(D, static_cast<Eigen::Index>(num_samples));
  for (std::size_t j = 0; j < num_samples; ++j) {
    const CoeffTensor d = (*samples)[j].to_dense();
    coeffs.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(d.data().data(), D);
  }
  constexpr std::size_t kBlock = 64;
  const std::size_t num_blocks = (grid.size() + kBlock - 1) / kBlock;
  std::vector<double> values(grid.size(), 0.0);
  kernels::for_each_index(
      num_blocks,
      [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(grid.size(), lo + kBlock);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> feats(
            static_cast<Eigen::Index>(hi - lo), D);
        for (std::size_t i = lo; i < hi; ++i) {
          const auto phi = tensor_features(basis.mode_values(grid.point(i)));
          feats.row(static_cast<Eigen::Index>(i - lo)) = Eigen::Map<const Eigen::RowVectorXd>(phi.data(), D);
        }
        const Eigen::MatrixXd prod = feats * coeffs;
        for (std::size_t i = lo; i < hi; ++i)
          values[i] = prod.row(static_cast<Eigen::Index>(i - lo)).cwiseAbs2().maxCoeff();
      },
      exec);
  return {std::move(fn), std::move(values)};
}

VariationFn variation_combine(CombineRule rule, const VariationFn& a, const VariationFn& b) {
  switch (rule) {
    case CombineRule::Union: {
      if (a.num_modes() != b.num_modes()) throw std::invalid_argument("variation_combine: incompatible domains");
      Evaluable f = [a, b](std::span<const double> y) { return std::max(a(y), b(y)); };
      return VariationFn(a.num_modes(), std::move(f), combine_certificates(a.certificate(), b.certificate()),
                         "union: pointwise max");
    }
    case CombineRule::SumOrthogonal: {
      if (a.num_modes() != b.num_modes()) throw std::invalid_argument("variation_combine: incompatible domains");
      Evaluable f = [a, b](std::span<const double> y) { return a(y) + b(y); };
      const bool exact_linear = a.certificate() == Certificate::Exact && b.certificate() == Certificate::Exact &&
                                a.linear_dimension() && b.linear_dimension();
      if (exact_linear)
        return VariationFn(a.num_modes(), std::move(f), Certificate::Exact, "orthogonal sum of linear spaces")
            .with_linear_dimension(*a.linear_dimension() + *b.linear_dimension());
      const auto ca = a.certificate();
      const auto cb = b.certificate();
      const bool upper = (ca == Certificate::Exact || ca == Certificate::UpperBound) &&
                         (cb == Certificate::Exact || cb == Certificate::UpperBound);
      return VariationFn(a.num_modes(), std::move(f), upper ? Certificate::UpperBound : Certificate::Uncertified,
                         "orthogonal sum of non-linear sets: upper bound");
    }
    case CombineRule::ProductIndependent:
    case CombineRule::TensorProduct: {
      if (rule == CombineRule::TensorProduct && !(a.linear_dimension() && b.linear_dimension()))
        throw std::invalid_argument("variation_combine: tensor product needs two linear-space variations");
      std::vector<VariationFn> blocks;
      for (const VariationFn* part : {&a, &b}) {
        if (part->blocks().empty())
          blocks.push_back(*part);
        else
          blocks.insert(blocks.end(), part->blocks().begin(), part->blocks().end());
      }
      VariationFn k(a.num_modes() + b.num_modes(), product_evaluator(blocks),
                    combine_certificates(a.certificate(), b.certificate()),
                    rule == CombineRule::TensorProduct ? "tensor product of linear spaces"
                                                       : "product of independent sets");
      k = k.with_blocks(std::move(blocks));
      if (a.linear_dimension() && b.linear_dimension())
        k = k.with_linear_dimension(*a.linear_dimension() * *b.linear_dimension());
      return k;
    }
  }
  throw std::invalid_argument("variation_combine: unknown rule");
}

double l1_norm(const VariationFn& k, const Exec& exec) {
  if (!k.blocks().empty()) {
    double p = 1.0;
    for (const auto& b : k.blocks()) p *= l1_norm(b, exec);
    return p;
  }
  const std::size_t M = k.num_modes();
  if (M > 4) throw std::invalid_argument("l1_norm: non-separable variation with more than four modes");
  const QuadratureRule& gl = gauss_legendre_64();
  const std::size_t q = gl.nodes.size();
  std::size_t inner = 1;
  for (std::size_t m = 1; m < M; ++m) inner *= q;
  // One partial sum per node of the first mode, added in order afterwards.
  std::vector<double> partial(q, 0.0);
  kernels::for_each_index(
      q,
      [&](std::size_t i0) {
        std::vector<double> y(M);
        y[0] = gl.nodes[i0];
        double s = 0.0;
        for (std::size_t p = 0; p < inner; ++p) {
          double w = gl.weights[i0];
          std::size_t rest = p;
          for (std::size_t m = M; m-- > 1;) {
            const std::size_t im = rest % q;
            rest /= q;
            y[m] = gl.nodes[im];
            w *= gl.weights[im];
          }
          s += w * k(y);
        }
        partial[i0] = s;
      },
      exec);
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

VariationNormReport variation_norms(const VariationFn& k, const WeightFunction& weight, const Grid& grid,
                                    const Exec& exec) {
  if (grid.empty()) throw std::invalid_argument("variation_norms: empty grid");
  if (grid.num_modes() != k.num_modes() || weight.num_modes() != k.num_modes())
    throw std::invalid_argument("variation_norms: incompatible domains");
  const auto vals = kernels::tabulate([&](std::span<const double> y) { return weight(y) * k(y); }, grid, exec);
  VariationNormReport r;
  r.sup_norm = *std::max_element(vals.begin(), vals.end());
  r.l1_norm = l1_norm(k, exec);
  r.grid_points = grid.size();
  return r;
}

WeightFunction optimal_weight(const VariationFn& k, const DomainSpec& domain, const Exec& exec) {
  if (domain.num_modes() != k.num_modes()) throw std::invalid_argument("optimal_weight: incompatible domains");
  const double l1 = l1_norm(k, exec);
  if (!(l1 > 0.0)) throw std::domain_error("optimal_weight: variation function has zero L1 norm");
  const Grid grid = standard_grid(domain.num_modes());
  const auto vals = kernels::tabulate(k.evaluator(), grid, exec);
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (!(vals[i] > 0.0))
      throw std::domain_error("optimal_weight: variation function vanishes at a tabulation node");
  const double sup = *std::max_element(vals.begin(), vals.end()) / l1;
  Evaluable density = [k, l1](std::span<const double> y) { return k(y) / l1; };
  return WeightFunction::from_density(domain.num_modes(), std::move(density), sup);
}

WeightFunction ambient_optimal_weight(const std::vector<std::size_t>& dims) {
  std::vector<std::function<double(double)>> densities;
  for (std::size_t d : dims) {
    auto basis = std::make_shared<LegendreBasis>(d);
    densities.push_back([basis, d](double y) {
      std::vector<double> b(d);
      basis->eval_all(y, b);
      double s = 0.0;
      for (double x : b) s += x * x;
      return s / static_cast<double>(d);
    });
  }
  return WeightFunction::separable(std::move(densities));
}

LipschitzReport lipschitz_sup_check(const std::vector<Evaluable>& u, const std::vector<Evaluable>& v,
                                    const WeightFunction& weight, const Grid& grid) {
  if (u.empty() || v.empty()) throw std::invalid_argument("lipschitz_sup_check: empty function collection");
  if (grid.empty()) throw std::invalid_argument("lipschitz_sup_check: empty grid");
  const std::size_t n = grid.size();
  std::vector<double> sqrt_w(n);
  for (std::size_t i = 0; i < n; ++i) sqrt_w[i] = std::sqrt(weight(grid.point(i)));
  auto table = [&](const std::vector<Evaluable>& fs) {
    std::vector<std::vector<double>> t;
    for (const auto& f : fs) t.push_back(kernels::serial::tabulate(f, grid));
    return t;
  };
  const auto tu = table(u);
  const auto tv = table(v);
  auto seminorm_diff = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s = std::max(s, sqrt_w[i] * std::abs(a[i] - b[i]));
    return s;
  };
  auto sup_abs = [&](const std::vector<std::vector<double>>& t) {
    std::vector<double> s(n, 0.0);
    for (const auto& f : t)
      for (std::size_t i = 0; i < n; ++i) s[i] = std::max(s[i], std::abs(f[i]));
    return s;
  };
  auto directed = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double worst = 0.0;
    for (const auto& fa : a) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& fb : b) best = std::min(best, seminorm_diff(fa, fb));
      worst = std::max(worst, best);
    }
    return worst;
  };
  LipschitzReport r;
  r.sup_difference = seminorm_diff(sup_abs(tu), sup_abs(tv));
  r.hausdorff = std::max(directed(tu, tv), directed(tv, tu));
  r.holds = r.sup_difference <= r.hausdorff;
  return r;
}

void write_variation_csv(std::ostream& out, const VariationFn& k, const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw std::invalid_argument("write_variation_csv: value count mismatch");
  for (std::size_t m = 0; m < grid.num_modes(); ++m) out << "y_" << (m + 1) << ',';
  out << "K_value,certificate\n";
  const std::string cert = to_string(k.certificate());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (double c : grid.point(i)) out << io::format_double(c) << ',';
    out << io::format_double(values[i]) << ',' << cert << '\n';
  }
}

}  // namespace varfn
