#include "varfn/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace varfn::model {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Matrix as_matrix(const CoeffTensor& t) {
  if (t.num_modes() != 2) throw std::invalid_argument("expected a matrix (two modes)");
  const CoeffTensor d = t.to_dense();
  return Eigen::Map<const Matrix>(d.data().data(), static_cast<Eigen::Index>(t.dims()[0]),
                                  static_cast<Eigen::Index>(t.dims()[1]));
}

CoeffTensor from_matrix(const Matrix& m) {
  return CoeffTensor::dense({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                            std::vector<double>(m.data(), m.data() + m.size()));
}

CoeffTensor gaussian_dense(const std::vector<std::size_t>& dims, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> data(dense_size(dims));
  for (double& x : data) x = normal(rng);
  return CoeffTensor::dense(dims, std::move(data));
}

std::vector<double> gaussian_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void require_dims(const ModelClass& cls, const CoeffTensor& v) {
  if (cls.dims() != v.dims()) throw std::invalid_argument("model: tensor dims do not match the class");
}

bool nearly_tied(double a, double b, double scale) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, scale);
}

// Orthogonal projection onto the tangent space U U^T Z + Z V V^T - U U^T Z V V^T.
Matrix tangent_projection(const TangentLowRank& t, const Matrix& z) {
  const auto rows = static_cast<Eigen::Index>(t.at.dims()[0]);
  const auto cols = static_cast<Eigen::Index>(t.at.dims()[1]);
  const auto r = static_cast<Eigen::Index>(t.rank);
  const Eigen::Map<const Matrix> u(t.left.data(), rows, r);
  const Eigen::Map<const Matrix> v(t.right.data(), cols, r);
  const Matrix pu = u * u.transpose();
  const Matrix pv = v * v.transpose();
  return pu * z + z * pv - pu * z * pv;
}

CoeffTensor random_unit_direction(const std::vector<std::size_t>& dims, Rng& rng) {
  CoeffTensor z = gaussian_dense(dims, rng);
  const double n = z.norm();
  return scaled(z, n > 0.0 ? 1.0 / n : 0.0);
}

CoeffTensor global_member(const ModelClass& cls, Rng& rng);

CoeffTensor member_near_anchor(const ModelClass& cls, Rng& rng, const CoeffTensor& anchor) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = anchor.norm();
  const bool local = unit(rng) < 0.5;
  if (scale == 0.0) return global_member(cls, rng);
  if (local) {
    const double eps = scale * std::pow(10.0, -3.0 * unit(rng));
    const CoeffTensor z = random_unit_direction(cls.dims(), rng);
    return project(cls, linear_combination(1.0, anchor, eps, z), rng()).point;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  CoeffTensor m = global_member(cls, rng);
  const double n = m.norm();
  if (n == 0.0) return m;
  return scaled(m, scale * std::exp(normal(rng)) / n);
}

CoeffTensor global_member(const ModelClass& cls, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const LinearSpan& s) {
            CoeffTensor t = CoeffTensor::zeros(s.dims);
            std::vector<double> data = t.data();
            std::normal_distribution<double> normal(0.0, 1.0);
            for (const auto& idx : s.indices) data[t.flat_index(idx)] = normal(rng);
            return CoeffTensor::dense(s.dims, std::move(data));
          },
          [&](const FullSpace& s) { return gaussian_dense(s.dims, rng); },
          [&](const WeightedSparse& s) {
            // Random greedy admission gives a maximal admissible support.
            std::vector<std::size_t> order(s.weights.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<double> data(s.weights.size(), 0.0);
            double used = 0.0;
            const double cap = s.budget * s.budget;
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t k : order) {
              const double c = s.weights[k] * s.weights[k];
              if (used + c <= cap * (1.0 + 1e-12)) {
                used += c;
                data[k] = normal(rng);
              }
            }
            return CoeffTensor::dense(s.dims, std::move(data));
          },
          [&](const LowRankMatrix& s) {
            const Matrix u = Eigen::Map<const Matrix>(gaussian_vector(s.rows * s.rank, rng).data(),
                                                      static_cast<Eigen::Index>(s.rows),
                                                      static_cast<Eigen::Index>(s.rank));
            const Matrix v = Eigen::Map<const Matrix>(gaussian_vector(s.cols * s.rank, rng).data(),
                                                      static_cast<Eigen::Index>(s.cols),
                                                      static_cast<Eigen::Index>(s.rank));
            return from_matrix(u * v.transpose());
          },
          [&](const Rank1Cone& s) {
            std::vector<std::vector<double>> f;
            for (std::size_t d : s.dims) f.push_back(gaussian_vector(d, rng));
            return CoeffTensor::rank1(std::move(f));
          },
          [&](const Shift& s) {
            const CoeffTensor m = sample_member(s.inner, rng, &s.anchor);
            return linear_combination(1.0, s.anchor, -1.0, m);
          },
          [&](const Union& u) {
            std::uniform_int_distribution<std::size_t> pick(0, u.members.size() - 1);
            return sample_member(u.members[pick(rng)], rng);
          },
          [&](const Ball& b) {
            // Members P_inner(c + t z) with t uniform in (0, r]; rejected when
            // they leave the ball.
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (int attempt = 0; attempt < kMaxDegenerateDraws; ++attempt) {
              const CoeffTensor z = random_unit_direction(cls.dims(), rng);
              const double t = b.radius * (1.0 - unit(rng));
              CoeffTensor m = project(b.inner, linear_combination(1.0, b.center, t, z), rng()).point;
              if (distance(m, b.center) <= b.radius) return m;
            }
            throw DegenerateClass("sample_member: ball draws keep leaving the ball");
          },
          [&](const TangentLowRank& t) {
            const CoeffTensor z = gaussian_dense(cls.dims(), rng);
            return from_matrix(tangent_projection(t, as_matrix(z)));
          },
      },
      cls.variant());
}

// ---------------------------------------------------------------------------

Projection project_rank1(const Rank1Cone& cone, const CoeffTensor& v, std::uint64_t seed) {
  if (v.is_rank1() || cone.dims.size() == 1) return {v, false, false};
  if (cone.dims.size() == 2) {
    const Matrix m = as_matrix(v);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Projection p;
    const Eigen::VectorXd u = svd.matrixU().col(0) * s(0);
    const Eigen::VectorXd w = svd.matrixV().col(0);
    p.point = CoeffTensor::rank1({std::vector<double>(u.data(), u.data() + u.size()),
                                  std::vector<double>(w.data(), w.data() + w.size())});
    p.nonunique = s.size() > 1 && s(0) > 0.0 && nearly_tied(s(0), s(1), s(0));
    return p;
  }
  const Rank1Fit fit = best_rank1(DenseContraction(v), seed);
  return {fit.tensor(), false, false};
}

Projection project_low_rank(const LowRankMatrix& lr, const CoeffTensor& v) {
  const Matrix m = as_matrix(v);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const auto r = static_cast<Eigen::Index>(std::min<std::size_t>(lr.rank, static_cast<std::size_t>(s.size())));
  Matrix out = svd.matrixU().leftCols(r) * s.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  Projection p;
  p.point = from_matrix(out);
  p.nonunique = r < s.size() && s(r - 1) > 0.0 && nearly_tied(s(r - 1), s(r), s(0));
  return p;
}

Projection project_sparse(const WeightedSparse& ws, const CoeffTensor& v) {
  const CoeffTensor d = v.to_dense();
  std::vector<double> values;
  std::vector<double> costs;
  std::vector<std::size_t> which;
  for (std::size_t k = 0; k < d.data().size(); ++k) {
    if (d.data()[k] == 0.0) continue;
    values.push_back(d.data()[k] * d.data()[k]);
    costs.push_back(ws.weights[k] * ws.weights[k]);
    which.push_back(k);
  }
  const KnapsackResult ks = solve_knapsack(values, costs, ws.budget * ws.budget);
  std::vector<double> out(d.data().size(), 0.0);
  for (std::size_t i : ks.selected) out[which[i]] = d.data()[which[i]];
  return {CoeffTensor::dense(ws.dims, std::move(out)), ks.nonunique, ks.approximate};
}

Projection project_ball(const Ball& b, const CoeffTensor& v, std::uint64_t seed) {
  Projection p = project(b.inner, v, seed);
  if (distance(p.point, b.center) <= b.radius) return p;
  // The unconstrained minimiser left the ball: pull v toward the centre until
  // its projection re-enters. Not exact for non-convex inner classes.
  double lo = 0.0;
  double hi = 1.0;
  Projection best = project(b.inner, b.center, seed);
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    Projection cand = project(b.inner, linear_combination(1.0 - mid, b.center, mid, v), seed);
    if (distance(cand.point, b.center) <= b.radius) {
      lo = mid;
      best = std::move(cand);
    } else {
      hi = mid;
    }
  }
  best.approximate = true;
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelClass

ModelClass::ModelClass(std::shared_ptr<const Variant> node, std::vector<std::size_t> dims)
    : node_(std::move(node)), dims_(std::move(dims)) {}

ModelClass ModelClass::linear_span(std::vector<std::size_t> dims, std::vector<std::vector<std::size_t>> indices) {
  if (indices.empty()) throw std::invalid_argument("linear_span: need at least one index");
  const CoeffTensor probe = CoeffTensor::zeros(dims);
  std::vector<std::size_t> flat;
  for (const auto& idx : indices) flat.push_back(probe.flat_index(idx));
  std::sort(flat.begin(), flat.end());
  if (std::adjacent_find(flat.begin(), flat.end()) != flat.end())
    throw std::invalid_argument("linear_span: repeated index");
  auto node = std::make_shared<const Variant>(LinearSpan{dims, std::move(indices)});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::first_functions(std::size_t d) {
  std::vector<std::vector<std::size_t>> idx;
  for (std::size_t k = 0; k < d; ++k) idx.push_back({k});
  return linear_span({d}, std::move(idx));
}

ModelClass ModelClass::full_space(std::vector<std::size_t> dims) {
  dense_size(dims);
  auto node = std::make_shared<const Variant>(FullSpace{dims});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::weighted_sparse(std::vector<std::size_t> dims, std::vector<double> weights, double budget) {
  if (dense_size(dims) != weights.size()) throw std::invalid_argument("weighted_sparse: one weight per coefficient");
  if (!(budget > 0.0)) throw std::invalid_argument("weighted_sparse: budget must be positive");
  for (double w : weights)
    if (!(w >= 1.0)) throw std::invalid_argument("weighted_sparse: weights must be >= 1");
  auto node = std::make_shared<const Variant>(WeightedSparse{dims, std::move(weights), budget});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::low_rank_matrix(std::size_t rows, std::size_t cols, std::size_t rank) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("low_rank_matrix: empty matrix");
  if (rank < 1 || rank > std::min(rows, cols)) throw std::invalid_argument("low_rank_matrix: need 1 <= R <= d");
  auto node = std::make_shared<const Variant>(LowRankMatrix{rows, cols, rank});
  return ModelClass(std::move(node), {rows, cols});
}

ModelClass ModelClass::rank1_cone(std::vector<std::size_t> dims) {
  if (dims.empty()) throw std::invalid_argument("rank1_cone: need at least one mode");
  for (std::size_t d : dims)
    if (d == 0) throw std::invalid_argument("rank1_cone: zero mode dimension");
  auto node = std::make_shared<const Variant>(Rank1Cone{dims});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::shift(CoeffTensor anchor, ModelClass inner) {
  if (anchor.dims() != inner.dims()) throw std::invalid_argument("shift: anchor dims do not match");
  auto dims = inner.dims();
  auto node = std::make_shared<const Variant>(Shift{std::move(anchor), std::move(inner)});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::union_of(std::vector<ModelClass> members) {
  if (members.empty()) throw std::invalid_argument("union_of: need at least one member");
  for (const auto& m : members)
    if (m.dims() != members.front().dims()) throw std::invalid_argument("union_of: members disagree on dims");
  auto dims = members.front().dims();
  auto node = std::make_shared<const Variant>(Union{std::move(members)});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::ball(CoeffTensor center, double radius, ModelClass inner) {
  if (center.dims() != inner.dims()) throw std::invalid_argument("ball: center dims do not match");
  if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
  auto dims = inner.dims();
  auto node = std::make_shared<const Variant>(Ball{std::move(center), radius, std::move(inner)});
  return ModelClass(std::move(node), std::move(dims));
}

ModelClass ModelClass::tangent_low_rank(const CoeffTensor& at, std::size_t rank) {
  const Matrix m = as_matrix(at);
  if (rank < 1 || rank > static_cast<std::size_t>(std::min(m.rows(), m.cols())))
    throw std::invalid_argument("tangent_low_rank: need 1 <= R <= d");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = static_cast<Eigen::Index>(rank);
  const auto& s = svd.singularValues();
  if (s(r - 1) < 1e-12) throw std::domain_error("tangent_low_rank: sigma_R below 1e-12, tangent space undefined");
  TangentLowRank t;
  t.at = at.to_dense();
  t.rank = rank;
  const Matrix u = svd.matrixU().leftCols(r);
  const Matrix v = svd.matrixV().leftCols(r);
  t.left.assign(u.data(), u.data() + u.size());
  t.right.assign(v.data(), v.data() + v.size());
  t.singular_values.assign(s.data(), s.data() + s.size());
  auto dims = at.dims();
  auto node = std::make_shared<const Variant>(std::move(t));
  return ModelClass(std::move(node), std::move(dims));
}

std::string ModelClass::name() const {
  return std::visit(Overloaded{
                        [](const LinearSpan& s) { return "linear_span(" + std::to_string(s.indices.size()) + ")"; },
                        [](const FullSpace&) { return std::string("full_space"); },
                        [](const WeightedSparse&) { return std::string("weighted_sparse"); },
                        [](const LowRankMatrix& l) { return "low_rank_matrix(R=" + std::to_string(l.rank) + ")"; },
                        [](const Rank1Cone&) { return std::string("rank1_cone"); },
                        [](const Shift& s) { return "shift(" + s.inner.name() + ")"; },
                        [](const Union& u) { return "union(" + std::to_string(u.members.size()) + ")"; },
                        [](const Ball& b) { return "ball(" + b.inner.name() + ")"; },
                        [](const TangentLowRank& t) { return "tangent_low_rank(R=" + std::to_string(t.rank) + ")"; },
                    },
                    variant());
}

// ---------------------------------------------------------------------------
// Sampling

CoeffTensor sample_member(const ModelClass& cls, Rng& rng, const CoeffTensor* anchor) {
  const auto& v = cls.variant();
  const bool is_cone = std::holds_alternative<Rank1Cone>(v) || std::holds_alternative<LowRankMatrix>(v) ||
                       std::holds_alternative<WeightedSparse>(v);
  if (anchor != nullptr && is_cone) return member_near_anchor(cls, rng, *anchor);
  if (anchor != nullptr && std::holds_alternative<Union>(v)) {
    const auto& u = std::get<Union>(v);
    std::uniform_int_distribution<std::size_t> pick(0, u.members.size() - 1);
    return sample_member(u.members[pick(rng)], rng, anchor);
  }
  return global_member(cls, rng);
}

CoeffTensor sample_unit_element(const ModelClass& cls, Rng& rng) {
  for (int attempt = 0; attempt < kMaxDegenerateDraws; ++attempt) {
    const CoeffTensor m = sample_member(cls, rng);
    const double n = m.norm();
    if (n >= kDegenerateNorm && std::isfinite(n)) return scaled(m, 1.0 / n);
  }
  throw DegenerateClass("sample_unit_element: 64 consecutive degenerate draws for " + cls.name());
}

CoeffTensor sample_unit_element(const ModelClass& cls, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_unit_element(cls, rng);
}

// ---------------------------------------------------------------------------
// Projection

Projection project(const ModelClass& cls, const CoeffTensor& v, std::uint64_t seed) {
  require_dims(cls, v);
  return std::visit(
      Overloaded{
          [&](const LinearSpan& s) {
            const CoeffTensor d = v.to_dense();
            std::vector<double> out(d.data().size(), 0.0);
            for (const auto& idx : s.indices) {
              const std::size_t k = d.flat_index(idx);
              out[k] = d.data()[k];
            }
            return Projection{CoeffTensor::dense(s.dims, std::move(out)), false, false};
          },
          [&](const FullSpace&) { return Projection{v, false, false}; },
          [&](const WeightedSparse& s) { return project_sparse(s, v); },
          [&](const LowRankMatrix& l) { return project_low_rank(l, v); },
          [&](const Rank1Cone& c) { return project_rank1(c, v, seed); },
          [&](const Shift& s) {
            // P_{u - A} v = u - P_A(u - v)
            Projection inner = project(s.inner, linear_combination(1.0, s.anchor, -1.0, v), seed);
            inner.point = linear_combination(1.0, s.anchor, -1.0, inner.point);
            return inner;
          },
          [&](const Union& u) {
            Projection best;
            double best_dist = std::numeric_limits<double>::infinity();
            for (const auto& member : u.members) {
              Projection p = project(member, v, seed);
              const double dist = distance(v, p.point);
              if (dist < best_dist - 1e-12 * std::max(1.0, dist)) {
                best_dist = dist;
                best = std::move(p);
              } else if (std::abs(dist - best_dist) <= 1e-12 * std::max(1.0, dist) &&
                         distance(p.point, best.point) > 1e-12) {
                best.nonunique = true;
              }
            }
            return best;
          },
          [&](const Ball& b) { return project_ball(b, v, seed); },
          [&](const TangentLowRank& t) {
            return Projection{from_matrix(tangent_projection(t, as_matrix(v))), false, false};
          },
      },
      cls.variant());
}

double membership_distance(const ModelClass& cls, const CoeffTensor& v, std::uint64_t seed) {
  return distance(v, project(cls, v, seed).point);
}

bool is_linear_class(const ModelClass& cls) {
  const auto& v = cls.variant();
  return std::holds_alternative<LinearSpan>(v) || std::holds_alternative<FullSpace>(v) ||
         std::holds_alternative<TangentLowRank>(v);
}

std::vector<CoeffTensor> orthonormal_frame(const ModelClass& cls) {
  std::vector<CoeffTensor> frame;
  const auto& dims = cls.dims();
  if (const auto* s = std::get_if<LinearSpan>(&cls.variant())) {
    for (const auto& idx : s->indices) frame.push_back(CoeffTensor::unit(dims, idx));
    return frame;
  }
  if (std::holds_alternative<FullSpace>(cls.variant())) {
    const std::size_t total = dense_size(dims);
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> data(total, 0.0);
      data[k] = 1.0;
      frame.push_back(CoeffTensor::dense(dims, std::move(data)));
    }
    return frame;
  }
  if (const auto* t = std::get_if<TangentLowRank>(&cls.variant())) {
    const auto rows = static_cast<Eigen::Index>(dims[0]);
    const auto cols = static_cast<Eigen::Index>(dims[1]);
    const auto r = static_cast<Eigen::Index>(t->rank);
    const Matrix u = Eigen::Map<const Matrix>(t->left.data(), rows, r);
    const Matrix v = Eigen::Map<const Matrix>(t->right.data(), cols, r);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(u)};
    const Eigen::MatrixXd q = qr.householderQ();
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index k = 0; k < cols; ++k) {
        Matrix m = Matrix::Zero(rows, cols);
        m.col(k) = u.col(i);
        frame.push_back(from_matrix(m));
      }
    for (Eigen::Index j = r; j < rows; ++j)
      for (Eigen::Index i = 0; i < r; ++i) frame.push_back(from_matrix(q.col(j) * v.col(i).transpose()));
    return frame;
  }
  throw std::invalid_argument("orthonormal_frame: " + cls.name() + " is not a linear space");
}

// ---------------------------------------------------------------------------
// Rank-1 power iteration

DenseContraction::DenseContraction(const CoeffTensor& t) : tensor_(t.to_dense()) {}

std::vector<double> DenseContraction::contract_except(std::size_t mode,
                                                      const std::vector<std::vector<double>>& x) const {
  const auto& dims = tensor_.dims();
  const auto& data = tensor_.data();
  const std::size_t M = dims.size();
  std::vector<double> out(dims[mode], 0.0);
  std::vector<std::size_t> idx(M, 0);
  for (std::size_t p = 0; p < data.size(); ++p) {
    double w = data[p];
    for (std::size_t m = 0; m < M; ++m)
      if (m != mode) w *= x[m][idx[m]];
    out[idx[mode]] += w;
    for (std::size_t m = M; m-- > 0;) {
      if (++idx[m] < dims[m]) break;
      idx[m] = 0;
    }
  }
  return out;
}

CoeffTensor Rank1Fit::tensor() const {
  auto f = factors;
  for (double& x : f[0]) x *= value;
  return CoeffTensor::rank1(std::move(f));
}

namespace {

Rank1Fit run_power_iteration(const ContractionOperator& op, std::vector<std::vector<double>> x,
                             const Rank1Options& options) {
  const std::size_t M = x.size();
  double value = 0.0;
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    double prev = value;
    for (std::size_t m = 0; m < M; ++m) {
      std::vector<double> g = op.contract_except(m, x);
      const double n = norm2(g);
      if (n == 0.0) return {x, 0.0};
      for (double& gi : g) gi /= n;
      x[m] = std::move(g);
      value = n;
    }
    if (std::abs(value - prev) <= options.tol * std::abs(value)) break;
  }
  // Sign convention: value carries the sign of <X, (x) x_m> along the last mode.
  const std::vector<double> g = op.contract_except(M - 1, x);
  double v = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) v += g[k] * x[M - 1][k];
  return {x, v};
}

}  // namespace

Rank1Fit best_rank1(const ContractionOperator& op, std::uint64_t seed, const Rank1Options& options,
                    const std::vector<std::vector<double>>* warm_start) {
  const auto& dims = op.dims();
  Rank1Fit best;
  bool have = false;
  auto consider = [&](Rank1Fit fit) {
    if (!have || std::abs(fit.value) > std::abs(best.value)) {
      best = std::move(fit);
      have = true;
    }
  };
  if (warm_start != nullptr) {
    std::vector<std::vector<double>> x = *warm_start;
    bool ok = x.size() == dims.size();
    for (std::size_t m = 0; ok && m < x.size(); ++m) {
      const double n = norm2(x[m]);
      ok = x[m].size() == dims[m] && n > 0.0;
      if (ok)
        for (double& xi : x[m]) xi /= n;
    }
    if (ok) consider(run_power_iteration(op, std::move(x), options));
  }
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng = make_rng(derive_seed(seed, r));
    std::vector<std::vector<double>> x;
    for (std::size_t d : dims) {
      auto v = gaussian_vector(d, rng);
      const double n = norm2(v);
      for (double& xi : v) xi /= n;
      x.push_back(std::move(v));
    }
    consider(run_power_iteration(op, std::move(x), options));
  }
  if (!have) throw std::invalid_argument("best_rank1: need at least one restart or a warm start");
  return best;
}

// ---------------------------------------------------------------------------
// Weighted sparsity

double weighted_sparsity(const std::vector<double>& weights, const CoeffTensor& v) {
  const CoeffTensor d = v.to_dense();
  if (weights.size() != d.data().size()) throw std::invalid_argument("weighted_sparsity: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (d.data()[k] != 0.0) s += weights[k] * weights[k];
  return std::sqrt(s);
}

bool sparse_manifold_condition(const WeightedSparse& cls, const CoeffTensor& v) {
  const CoeffTensor d = v.to_dense();
  const double used = std::pow(weighted_sparsity(cls.weights, d), 2);
  const double cap = cls.budget * cls.budget;
  for (std::size_t k = 0; k < cls.weights.size(); ++k)
    if (d.data()[k] == 0.0 && !(used + cls.weights[k] * cls.weights[k] > cap)) return false;
  return true;
}

namespace {

constexpr std::size_t kKnapsackMaxCells = 1000000;
constexpr std::size_t kKnapsackMaxTableBits = std::size_t{1} << 29;

bool integer_grid(const std::vector<double>& costs, double capacity, std::size_t& scale, std::size_t& cap_cells) {
  for (std::size_t q = 1; q <= 1000; ++q) {
    const double qd = static_cast<double>(q);
    const double cap = std::floor(capacity * qd + 1e-9);
    if (cap + 1.0 > static_cast<double>(kKnapsackMaxCells)) return false;
    bool ok = true;
    for (double c : costs) {
      const double x = c * qd;
      if (std::abs(x - std::round(x)) > 1e-9 * std::max(1.0, x)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      scale = q;
      cap_cells = static_cast<std::size_t>(cap) + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

KnapsackResult solve_knapsack(const std::vector<double>& values, const std::vector<double>& costs, double capacity) {
  if (values.size() != costs.size()) throw std::invalid_argument("solve_knapsack: size mismatch");
  KnapsackResult res;
  const std::size_t n = values.size();
  if (n == 0) return res;
  std::size_t scale = 0;
  std::size_t cells = 0;
  const bool exact = integer_grid(costs, capacity, scale, cells) && n * cells <= kKnapsackMaxTableBits;
  if (!exact) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] / costs[a] > values[b] / costs[b]; });
    double used = 0.0;
    for (std::size_t i : order) {
      if (used + costs[i] <= capacity * (1.0 + 1e-12)) {
        used += costs[i];
        res.selected.push_back(i);
        res.value += values[i];
      }
    }
    std::sort(res.selected.begin(), res.selected.end());
    res.approximate = true;
    return res;
  }

  const double neg = -std::numeric_limits<double>::infinity();
  std::vector<double> best(cells, neg);
  std::vector<int> ways(cells, 0);
  best[0] = 0.0;
  ways[0] = 1;
  std::vector<std::vector<bool>> keep(n, std::vector<bool>(cells, false));
  std::vector<std::size_t> icost(n);
  for (std::size_t i = 0; i < n; ++i)
    icost[i] = static_cast<std::size_t>(std::llround(costs[i] * static_cast<double>(scale)));
  auto tied = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c_i = icost[i];
    if (c_i >= cells) continue;
    for (std::size_t c = cells; c-- > c_i;) {
      if (best[c - c_i] == neg) continue;
      const double cand = best[c - c_i] + values[i];
      if (best[c] == neg || (cand > best[c] && !tied(cand, best[c]))) {
        best[c] = cand;
        ways[c] = ways[c - c_i];
        keep[i][c] = true;
      } else if (tied(cand, best[c])) {
        ways[c] = std::min(2, ways[c] + ways[c - c_i]);
      }
    }
  }
  std::size_t arg = 0;
  for (std::size_t c = 1; c < cells; ++c)
    if (best[c] != neg && best[c] > best[arg] && !tied(best[c], best[arg])) arg = c;
  int total = 0;
  for (std::size_t c = 0; c < cells; ++c)
    if (best[c] != neg && tied(best[c], best[arg])) total += ways[c];
  res.value = best[arg];
  res.nonunique = total >= 2;
  std::size_t c = arg;
  for (std::size_t i = n; i-- > 0;) {
    if (keep[i][c]) {
      res.selected.push_back(i);
      c -= icost[i];
    }
  }
  std::sort(res.selected.begin(), res.selected.end());
  return res;
}

}  // namespace varfn::model
