#include "varfn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "varfn/kernels.hpp"
#include "varfn/quadrature.hpp"
#include "varfn/rng.hpp"

namespace varfn {

DomainSpec::DomainSpec(std::size_t num_modes) : num_modes_(num_modes) {
  if (num_modes == 0) throw std::invalid_argument("DomainSpec: num_modes must be >= 1");
}

WeightFunction WeightFunction::uniform(std::size_t num_modes) {
  if (num_modes == 0) throw std::invalid_argument("WeightFunction: num_modes must be >= 1");
  WeightFunction w;
  w.kind_ = Kind::Uniform;
  w.num_modes_ = num_modes;
  return w;
}

WeightFunction WeightFunction::separable(std::vector<std::function<double(double)>> densities) {
  if (densities.empty()) throw std::invalid_argument("WeightFunction: need at least one mode density");
  WeightFunction w;
  w.kind_ = Kind::Separable;
  w.num_modes_ = densities.size();
  const QuadratureRule& gl = gauss_legendre_64();
  for (auto& raw : densities) {
    double mass = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) mass += gl.weights[q] * raw(gl.nodes[q]);
    if (!(mass > 0.0)) throw std::invalid_argument("WeightFunction: density has non-positive mass");
    Table t;
    t.density = [raw, mass](double y) { return raw(y) / mass; };
    t.nodes.resize(kCdfTablePoints);
    t.cdf.resize(kCdfTablePoints);
    const double h = 2.0 / static_cast<double>(kCdfTablePoints - 1);
    double prev = 0.0;
    for (std::size_t j = 0; j < kCdfTablePoints; ++j) {
      t.nodes[j] = j + 1 == kCdfTablePoints ? 1.0 : -1.0 + h * static_cast<double>(j);
      const double p = t.density(t.nodes[j]);
      if (p < 0.0) throw std::invalid_argument("WeightFunction: negative density value");
      t.cdf[j] = j == 0 ? 0.0 : t.cdf[j - 1] + 0.25 * h * (prev + p);  // trapezoid in dx/2
      prev = p;
    }
    const double total = t.cdf.back();
    if (!(total > 0.0)) throw std::invalid_argument("WeightFunction: tabulated CDF is zero");
    for (double& c : t.cdf) c /= total;
    t.cdf.back() = 1.0;
    w.tables_.push_back(std::move(t));
  }
  return w;
}

WeightFunction WeightFunction::from_density(std::size_t num_modes, Evaluable density, double density_sup) {
  if (num_modes == 0) throw std::invalid_argument("WeightFunction: num_modes must be >= 1");
  if (!(density_sup > 0.0) || !std::isfinite(density_sup))
    throw std::invalid_argument("WeightFunction: density supremum must be positive and finite");
  WeightFunction w;
  w.kind_ = Kind::FromVariation;
  w.num_modes_ = num_modes;
  w.density_ = std::move(density);
  w.envelope_ = kEnvelopeFactor * density_sup;
  return w;
}

double WeightFunction::density(std::span<const double> y) const {
  if (y.size() != num_modes_) throw std::invalid_argument("WeightFunction: point has wrong number of modes");
  switch (kind_) {
    case Kind::Uniform:
      return 1.0;
    case Kind::Separable: {
      double p = 1.0;
      for (std::size_t m = 0; m < num_modes_; ++m) p *= tables_[m].density(y[m]);
      return p;
    }
    case Kind::FromVariation:
      return density_(y);
  }
  return 1.0;
}

double WeightFunction::operator()(std::span<const double> y) const {
  if (kind_ == Kind::Uniform) return 1.0;
  const double p = density(y);
  if (!(p > 0.0)) throw std::domain_error("WeightFunction: weight undefined where the density vanishes");
  return 1.0 / p;
}

namespace {

double invert_cdf(const WeightFunction::Table& t, double u) {
  const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
  if (it == t.cdf.begin()) return t.nodes.front();
  if (it == t.cdf.end()) return t.nodes.back();
  const std::size_t j = static_cast<std::size_t>(it - t.cdf.begin());
  const double c0 = t.cdf[j - 1];
  const double c1 = t.cdf[j];
  const double s = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return std::clamp(t.nodes[j - 1] + s * (t.nodes[j] - t.nodes[j - 1]), -1.0, 1.0);
}

}  // namespace

SampleBatch draw_samples(const DomainSpec& domain, const WeightFunction& weight, std::size_t n,
                         std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("draw_samples: n must be >= 1");
  const std::size_t M = domain.num_modes();
  if (weight.num_modes() != M) throw std::invalid_argument("draw_samples: weight and domain disagree on M");
  SampleBatch batch;
  batch.num_modes = M;
  batch.seed = seed;
  batch.points.resize(n * M);
  batch.weights.resize(n);
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  switch (weight.kind()) {
    case WeightFunction::Kind::Uniform:
      for (double& c : batch.points) c = sym(rng);
      std::fill(batch.weights.begin(), batch.weights.end(), 1.0);
      break;
    case WeightFunction::Kind::Separable:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < M; ++m)
          batch.points[i * M + m] = invert_cdf(weight.tables()[m], unit(rng));
        batch.weights[i] = weight(batch.point(i));
      }
      break;
    case WeightFunction::Kind::FromVariation: {
      std::vector<double> y(M);
      for (std::size_t i = 0; i < n; ++i) {
        for (;;) {
          for (double& c : y) c = sym(rng);
          const double ratio = weight.density(y) / weight.envelope();
          if (ratio > 1.0)
            throw EnvelopeViolation("draw_samples: rejection envelope violated (acceptance ratio " +
                                    std::to_string(ratio) + " > 1)");
          if (unit(rng) < ratio) break;
        }
        std::copy(y.begin(), y.end(), batch.points.begin() + static_cast<std::ptrdiff_t>(i * M));
        batch.weights[i] = weight(y);
      }
      break;
    }
  }
  return batch;
}

double empirical_norm(std::span<const double> values, const SampleBatch& batch) {
  if (values.size() != batch.size()) throw std::invalid_argument("empirical_norm: value count mismatch");
  if (batch.size() == 0) throw std::invalid_argument("empirical_norm: empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += batch.weights[i] * values[i] * values[i];
  return std::sqrt(s / static_cast<double>(batch.size()));
}

double empirical_norm(const Evaluable& v, const SampleBatch& batch) {
  std::vector<double> values(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) values[i] = v(batch.point(i));
  return empirical_norm(values, batch);
}

double ambient_norm(const CoeffTensor& c) {
  const double n = c.norm();
  if (!std::isfinite(n)) throw std::domain_error("ambient_norm: non-finite coefficients");
  return n;
}

double weighted_sup_norm(const Evaluable& v, const WeightFunction& weight, const Grid& grid, const Exec& exec) {
  if (grid.empty()) throw std::invalid_argument("weighted_sup_norm: empty grid");
  const auto vals = kernels::tabulate(
      [&](std::span<const double> y) { return std::sqrt(weight(y)) * std::abs(v(y)); }, grid, exec);
  return *std::max_element(vals.begin(), vals.end());
}

}  // namespace varfn
