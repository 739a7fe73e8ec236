#include "varfn/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "varfn/quadrature.hpp"

namespace varfn {

double eval_legendre(std::size_t k, double y) {
  if (!(std::abs(y) <= 1.0)) throw std::domain_error("eval_legendre: |y| > 1");
  double p0 = 1.0;
  if (k == 0) return 1.0;
  double p1 = y;
  for (std::size_t j = 2; j <= k; ++j) {
    const double jd = static_cast<double>(j);
    const double p2 = ((2.0 * jd - 1.0) * y * p1 - (jd - 1.0) * p0) / jd;
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * static_cast<double>(k) + 1.0) * p1;
}

LegendreBasis::LegendreBasis(std::size_t d) : d_(d) {
  if (d == 0) throw std::invalid_argument("LegendreBasis: dimension must be positive");
}

double LegendreBasis::eval(std::size_t k, double y) const {
  if (k >= d_) throw std::out_of_range("LegendreBasis::eval: degree out of range");
  return eval_legendre(k, y);
}

void LegendreBasis::eval_all(double y, std::span<double> out) const {
  if (!(std::abs(y) <= 1.0)) throw std::domain_error("LegendreBasis: |y| > 1");
  if (out.size() != d_) throw std::invalid_argument("LegendreBasis::eval_all: wrong output size");
  double p0 = 1.0;
  double p1 = y;
  out[0] = 1.0;
  if (d_ > 1) out[1] = std::sqrt(3.0) * y;
  for (std::size_t j = 2; j < d_; ++j) {
    const double jd = static_cast<double>(j);
    const double p2 = ((2.0 * jd - 1.0) * y * p1 - (jd - 1.0) * p0) / jd;
    p0 = p1;
    p1 = p2;
    out[j] = std::sqrt(2.0 * jd + 1.0) * p2;
  }
}

TensorBasis::TensorBasis(std::vector<std::shared_ptr<const UnivariateBasis>> modes)
    : modes_(std::move(modes)) {
  if (modes_.empty()) throw std::invalid_argument("TensorBasis: need at least one mode");
  for (const auto& m : modes_) {
    if (!m) throw std::invalid_argument("TensorBasis: null mode basis");
    dims_.push_back(m->dimension());
  }
}

TensorBasis TensorBasis::legendre(std::vector<std::size_t> dims) {
  std::vector<std::shared_ptr<const UnivariateBasis>> modes;
  modes.reserve(dims.size());
  for (std::size_t d : dims) modes.push_back(std::make_shared<LegendreBasis>(d));
  return TensorBasis(std::move(modes));
}

std::size_t TensorBasis::total_dimension() const noexcept {
  return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::vector<double>> TensorBasis::mode_values(std::span<const double> y) const {
  if (y.size() != modes_.size()) throw std::invalid_argument("TensorBasis: point has wrong number of modes");
  std::vector<std::vector<double>> out(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    out[m].resize(dims_[m]);
    modes_[m]->eval_all(y[m], out[m]);
  }
  return out;
}

std::size_t dense_size(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("CoeffTensor: zero mode dimension");
    if (n > kMaxDenseEntries / d)
      throw std::length_error("CoeffTensor: dense tensor exceeds 2^24 entries");
    n *= d;
  }
  return n;
}

CoeffTensor CoeffTensor::dense(std::vector<std::size_t> dims, std::vector<double> data) {
  if (dims.empty()) throw std::invalid_argument("CoeffTensor: need at least one mode");
  if (dense_size(dims) != data.size())
    throw std::invalid_argument("CoeffTensor: data size does not match dims");
  CoeffTensor t;
  t.rep_ = Representation::Dense;
  t.dims_ = std::move(dims);
  t.data_ = std::move(data);
  return t;
}

CoeffTensor CoeffTensor::zeros(std::vector<std::size_t> dims) {
  const std::size_t n = dense_size(dims);
  return dense(std::move(dims), std::vector<double>(n, 0.0));
}

CoeffTensor CoeffTensor::unit(std::vector<std::size_t> dims, std::span<const std::size_t> multi_index) {
  CoeffTensor t = zeros(std::move(dims));
  t.data_[t.flat_index(multi_index)] = 1.0;
  return t;
}

CoeffTensor CoeffTensor::rank1(std::vector<std::vector<double>> factors) {
  if (factors.empty()) throw std::invalid_argument("CoeffTensor: need at least one factor");
  CoeffTensor t;
  t.rep_ = Representation::Rank1;
  for (const auto& f : factors) {
    if (f.empty()) throw std::invalid_argument("CoeffTensor: empty factor");
    t.dims_.push_back(f.size());
  }
  t.factors_ = std::move(factors);
  return t;
}

std::size_t CoeffTensor::size() const noexcept {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

const std::vector<double>& CoeffTensor::data() const {
  if (rep_ != Representation::Dense) throw std::logic_error("CoeffTensor::data: tensor is rank-1");
  return data_;
}

const std::vector<std::vector<double>>& CoeffTensor::factors() const {
  if (rep_ != Representation::Rank1) throw std::logic_error("CoeffTensor::factors: tensor is dense");
  return factors_;
}

CoeffTensor CoeffTensor::to_dense() const {
  if (rep_ == Representation::Dense) return *this;
  std::vector<double> out(dense_size(dims_));
  std::vector<std::size_t> idx(dims_.size(), 0);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 1.0;
    for (std::size_t m = 0; m < dims_.size(); ++m) v *= factors_[m][idx[m]];
    out[p] = v;
    for (std::size_t m = dims_.size(); m-- > 0;) {
      if (++idx[m] < dims_[m]) break;
      idx[m] = 0;
    }
  }
  return dense(dims_, std::move(out));
}

double CoeffTensor::norm() const {
  if (rep_ == Representation::Rank1) {
    double n = 1.0;
    for (const auto& f : factors_) {
      double s = 0.0;
      for (double x : f) s += x * x;
      n *= std::sqrt(s);
    }
    return n;
  }
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

std::size_t CoeffTensor::flat_index(std::span<const std::size_t> multi_index) const {
  if (multi_index.size() != dims_.size()) throw std::invalid_argument("CoeffTensor: multi-index has wrong length");
  std::size_t flat = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (multi_index[m] >= dims_[m]) throw std::out_of_range("CoeffTensor: multi-index out of range");
    flat = flat * dims_[m] + multi_index[m];
  }
  return flat;
}

namespace {

void require_same_dims(const CoeffTensor& a, const CoeffTensor& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("CoeffTensor: dimension mismatch");
}

// Contract a dense row-major tensor with one vector per mode, last mode first.
double contract_dense(const std::vector<double>& data, const std::vector<std::size_t>& dims,
                      const std::vector<std::vector<double>>& vecs) {
  std::vector<double> cur(data);
  std::size_t len = cur.size();
  for (std::size_t m = dims.size(); m-- > 0;) {
    const std::size_t d = dims[m];
    const std::size_t outer = len / d;
    const auto& v = vecs[m];
    for (std::size_t o = 0; o < outer; ++o) {
      double s = 0.0;
      const double* row = cur.data() + o * d;
      for (std::size_t k = 0; k < d; ++k) s += row[k] * v[k];
      cur[o] = s;
    }
    len = outer;
  }
  return cur[0];
}

}  // namespace

double dot(const CoeffTensor& a, const CoeffTensor& b) {
  require_same_dims(a, b);
  if (a.is_rank1() && b.is_rank1()) {
    double p = 1.0;
    for (std::size_t m = 0; m < a.num_modes(); ++m) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.dims()[m]; ++k) s += a.factors()[m][k] * b.factors()[m][k];
      p *= s;
    }
    return p;
  }
  if (a.is_rank1()) return contract_dense(b.data(), b.dims(), a.factors());
  if (b.is_rank1()) return contract_dense(a.data(), a.dims(), b.factors());
  double s = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

CoeffTensor linear_combination(double alpha, const CoeffTensor& a, double beta, const CoeffTensor& b) {
  require_same_dims(a, b);
  const CoeffTensor da = a.to_dense();
  const CoeffTensor db = b.to_dense();
  std::vector<double> out(da.data().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = alpha * da.data()[k] + beta * db.data()[k];
  return CoeffTensor::dense(a.dims(), std::move(out));
}

CoeffTensor scaled(const CoeffTensor& a, double alpha) {
  if (a.is_rank1()) {
    auto f = a.factors();
    for (double& x : f[0]) x *= alpha;
    return CoeffTensor::rank1(std::move(f));
  }
  std::vector<double> out(a.data());
  for (double& x : out) x *= alpha;
  return CoeffTensor::dense(a.dims(), std::move(out));
}

double distance(const CoeffTensor& a, const CoeffTensor& b) {
  require_same_dims(a, b);
  if (a.is_rank1() || b.is_rank1()) {
    const double na = a.norm();
    const double nb = b.norm();
    const double d2 = na * na + nb * nb - 2.0 * dot(a, b);
    // Cancellation-prone for nearly equal tensors; fall back to dense when small.
    if (d2 > 1e-8 * (na * na + nb * nb) || a.size() > kMaxDenseEntries) return std::sqrt(std::max(d2, 0.0));
  }
  const CoeffTensor da = a.to_dense();
  const CoeffTensor db = b.to_dense();
  double s = 0.0;
  for (std::size_t k = 0; k < da.data().size(); ++k) {
    const double d = da.data()[k] - db.data()[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double contract(const CoeffTensor& c, const std::vector<std::vector<double>>& mode_values) {
  if (mode_values.size() != c.num_modes()) throw std::invalid_argument("contract: wrong number of modes");
  for (std::size_t m = 0; m < c.num_modes(); ++m)
    if (mode_values[m].size() != c.dims()[m]) throw std::invalid_argument("contract: dimension mismatch");
  if (c.is_rank1()) {
    double p = 1.0;
    for (std::size_t m = 0; m < c.num_modes(); ++m) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.dims()[m]; ++k) s += c.factors()[m][k] * mode_values[m][k];
      p *= s;
    }
    return p;
  }
  return contract_dense(c.data(), c.dims(), mode_values);
}

double eval_function(const CoeffTensor& c, const TensorBasis& basis, std::span<const double> y) {
  if (c.dims() != basis.dims()) throw std::invalid_argument("eval_function: dimension mismatch");
  return contract(c, basis.mode_values(y));
}

std::vector<double> expand_univariate(const std::function<double(double)>& f, std::size_t d,
                                      std::size_t quad_nodes) {
  if (d == 0) throw std::invalid_argument("expand_univariate: d must be positive");
  if (quad_nodes < d) throw std::invalid_argument("expand_univariate: need quad_nodes >= d");
  const QuadratureRule rule = quad_nodes == kDefaultQuadratureNodes ? gauss_legendre_64()
                                                                    : gauss_legendre(quad_nodes);
  LegendreBasis basis(d);
  std::vector<double> coeffs(d, 0.0);
  std::vector<double> b(d);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double fy = f(rule.nodes[q]) * rule.weights[q];
    basis.eval_all(rule.nodes[q], b);
    for (std::size_t k = 0; k < d; ++k) coeffs[k] += fy * b[k];
  }
  return coeffs;
}

}  // namespace varfn
