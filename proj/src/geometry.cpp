#include "varfn/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace varfn::geometry {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Matrix as_matrix(const CoeffTensor& t) {
  if (t.num_modes() != 2) throw std::invalid_argument("geometry: expected a matrix (two modes)");
  const CoeffTensor d = t.to_dense();
  return Eigen::Map<const Matrix>(d.data().data(), static_cast<Eigen::Index>(t.dims()[0]),
                                  static_cast<Eigen::Index>(t.dims()[1]));
}

// || v - w ||^2 / (2R), zero for infinite reach.
double curvature_bound(double len, double reach) { return std::isinf(reach) ? 0.0 : len * len / (2.0 * reach); }

double require_reach(double reach) {
  if (!(reach > 0.0)) throw std::invalid_argument("geometry: reach must be positive");
  return reach;
}

// Folds one sample into a record: failure when measured exceeds bound by tol.
struct Accumulator {
  CheckRecord rec;
  double worst_margin = kInf;

  void add(double measured, double bound, bool extra_fail, double tol = 1e-10) {
    ++rec.samples;
    const double m = bound - measured;
    if (measured > bound + tol || extra_fail) ++rec.failures;
    if (m < worst_margin) {
      worst_margin = m;
      rec.measured = measured;
      rec.bound = bound;
    }
    rec.equality_gap = std::max(rec.equality_gap, std::abs(measured - bound));
  }

  CheckRecord finish() {
    rec.margin = rec.samples == 0 ? 0.0 : worst_margin;
    rec.pass = rec.samples > 0 && rec.failures == 0;
    return rec;
  }
};

}  // namespace

PointCloud::PointCloud(std::size_t d, std::vector<double> c, bool u) : dim(d), coords(std::move(c)), unit(u) {
  if (dim == 0 || coords.empty() || coords.size() % dim != 0)
    throw std::invalid_argument("PointCloud: need a nonempty list of points of equal dimension");
}

double hausdorff(const PointCloud& a, const PointCloud& b, const Exec& exec) {
  if (a.dim != b.dim) throw std::invalid_argument("hausdorff: clouds have different dimensions");
  return kernels::hausdorff(a.view(), b.view(), exec);
}

double truncated_hausdorff(const PointCloud& a, const PointCloud& b, const Exec& exec) {
  for (const PointCloud* c : {&a, &b})
    for (std::size_t i = 0; i < c->size(); ++i)
      if (std::abs(norm(c->view().point(i)) - 1.0) > 1e-10)
        throw std::invalid_argument("truncated_hausdorff: point off the unit sphere");
  return hausdorff(a, b, exec);
}

std::vector<Point> ManifoldChart::cloud(double, std::size_t) const { return {}; }

// ---------------------------------------------------------------------------
// Plane curves

std::optional<Point> PlaneCurveChart::manifold_point_toward(std::span<const double> w) const {
  const auto c = centre();
  if (!c) return Point(w.begin(), w.end());
  auto along = [&](double s) { return Point{(*c)[0] + s * (w[0] - (*c)[0]), (*c)[1] + s * (w[1] - (*c)[1])}; };
  if (implicit(along(0.0)) >= 0.0 || implicit(along(1.0)) < 0.0) return std::nullopt;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    (implicit(along(mid)) < 0.0 ? lo : hi) = mid;
  }
  return along(hi);
}

Point PlaneCurveChart::sample_near(double r, Rng& rng) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  return at(parameter_radius(r) * unit(rng) * (1.0 - 1e-12));
}

std::vector<Point> PlaneCurveChart::cloud(double r, std::size_t count) const {
  if (count < 2) throw std::invalid_argument("cloud: need at least two points");
  const double t = parameter_radius(r);
  std::vector<Point> pts;
  for (std::size_t j = 0; j < count; ++j)
    pts.push_back(at(-t + 2.0 * t * static_cast<double>(j) / static_cast<double>(count - 1)));
  return pts;
}

CircleChart::CircleChart(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("CircleChart: radius must be positive");
}

double CircleChart::implicit(std::span<const double> p) const {
  return std::hypot(p[0], p[1] + radius_) - radius_;
}

Point CircleChart::at(double theta) const {
  return {radius_ * std::sin(theta), radius_ * std::cos(theta) - radius_};
}

double CircleChart::parameter_radius(double r) const {
  return 2.0 * std::asin(std::min(1.0, r / (2.0 * radius_)));
}

ParabolaChart::ParabolaChart(double kappa, std::optional<double> width) : kappa_(kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("ParabolaChart: curvature must be nonnegative");
  width_ = width.value_or(kappa > 0.0 ? 1.0 / kappa : kInf);
  if (!(width_ > 0.0)) throw std::invalid_argument("ParabolaChart: width must be positive");
}

std::optional<double> ParabolaChart::reach() const { return kappa_ > 0.0 ? 1.0 / kappa_ : kInf; }

double ParabolaChart::implicit(std::span<const double> p) const { return p[1] + 0.5 * kappa_ * p[0] * p[0]; }

std::optional<Point> ParabolaChart::centre() const {
  if (kappa_ == 0.0) return std::nullopt;
  return Point{0.0, -1.0 / kappa_};
}

Point ParabolaChart::at(double x) const { return {x, -0.5 * kappa_ * x * x}; }

double ParabolaChart::parameter_radius(double r) const {
  // x^2 + kappa^2 x^4 / 4 = r^2
  const double kr = kappa_ * r;
  const double x2 = 2.0 * r * r / (1.0 + std::sqrt(1.0 + kr * kr));
  return std::min(std::sqrt(x2), width_);
}

// ---------------------------------------------------------------------------
// Low-rank matrices

std::vector<CoeffTensor> tangent_lowrank(const CoeffTensor& v, std::size_t rank) {
  return model::orthonormal_frame(model::ModelClass::tangent_low_rank(v, rank));
}

LowRankChart::LowRankChart(const CoeffTensor& at, std::size_t rank) : at_(at.to_dense()), rank_(rank) {
  const auto frame = tangent_lowrank(at_, rank);
  for (const auto& f : frame) frame_.push_back(f.to_dense().data());
  anchor_ = at_.data();
  Eigen::JacobiSVD<Matrix> svd(as_matrix(at_));
  const auto& s = svd.singularValues();
  sigma_rank_ = s(static_cast<Eigen::Index>(rank - 1));
  sigma_max_ = s(0);
  if (static_cast<std::size_t>(s.size()) > rank && s(static_cast<Eigen::Index>(rank)) > 1e-12 * s(0))
    throw std::invalid_argument("LowRankChart: anchor has rank above R");
}

Point LowRankChart::sample_near(double r, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // ||trunc(u + eps z) - u|| <= 2 eps.
  std::vector<double> z(anchor_.size());
  for (double& x : z) x = normal(rng);
  const double zn = norm(z);
  const double eps = 0.5 * r * (1.0 - unit(rng)) * (1.0 - 1e-9) / zn;
  std::vector<double> w = anchor_;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += eps * z[i];
  return *manifold_point_toward(w);
}

std::optional<Point> LowRankChart::manifold_point_toward(std::span<const double> w) const {
  const auto rows = static_cast<Eigen::Index>(at_.dims()[0]);
  const auto cols = static_cast<Eigen::Index>(at_.dims()[1]);
  const Matrix m = Eigen::Map<const Matrix>(w.data(), rows, cols);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = static_cast<Eigen::Index>(rank_);
  const Matrix t =
      svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  return Point(t.data(), t.data() + t.size());
}

// ---------------------------------------------------------------------------
// Checks

nlohmann::json to_json(const CheckRecord& r) {
  return {{"check", r.check},       {"chart", r.chart},   {"radius", r.radius},
          {"samples", r.samples},   {"failures", r.failures}, {"measured", r.measured},
          {"bound", r.bound},       {"margin", r.margin}, {"equality_gap", r.equality_gap},
          {"pass", r.pass},         {"note", r.note}};
}

CheckRecord check_tangent_projection(const ManifoldChart& chart, double reach, double r, std::size_t num_samples,
                                     std::uint64_t seed, const Exec& exec) {
  require_reach(reach);
  const Point& u = chart.anchor();
  const auto& frame = chart.tangent_frame();
  std::vector<double> lhs(num_samples), rhs(num_samples);
  std::vector<char> contained(num_samples, 1);
  kernels::for_each_index(
      num_samples,
      [&](std::size_t j) {
        Rng rng = make_rng(derive_seed(seed, j));
        const Point v = chart.sample_near(r, rng);
        Point d(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) d[i] = v[i] - u[i];
        Point w = u;
        for (const auto& t : frame) {
          const double c = dot(d, t);
          for (std::size_t i = 0; i < w.size(); ++i) w[i] += c * t[i];
        }
        const double uv = dist(u, v);
        lhs[j] = dist(v, w);
        rhs[j] = curvature_bound(uv, reach);
        contained[j] = dist(u, w) <= uv * (1.0 + 1e-12) + 1e-15;
      },
      exec);
  Accumulator acc;
  acc.rec.check = "tangent_projection";
  acc.rec.chart = chart.name();
  acc.rec.radius = r;
  for (std::size_t j = 0; j < num_samples; ++j) acc.add(lhs[j], rhs[j], !contained[j]);
  return acc.finish();
}

CheckRecord check_manifold_projection(const ManifoldChart& chart, double reach, double r, std::size_t num_samples,
                                      std::uint64_t seed, const Exec& exec) {
  require_reach(reach);
  const Point& u = chart.anchor();
  const auto& frame = chart.tangent_frame();
  std::vector<double> lhs(num_samples), rhs(num_samples);
  std::vector<char> found(num_samples, 1);
  kernels::for_each_index(
      num_samples,
      [&](std::size_t j) {
        Rng rng = make_rng(derive_seed(seed, j));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> c(frame.size());
        for (double& x : c) x = normal(rng);
        const double scale = r * (1.0 - unit(rng)) * (1.0 - 1e-12) / norm(c);
        Point w = u;
        for (std::size_t k = 0; k < frame.size(); ++k)
          for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * c[k] * frame[k][i];
        const auto v = chart.manifold_point_toward(w);
        if (!v) {
          found[j] = 0;
          return;
        }
        lhs[j] = dist(w, *v);
        rhs[j] = curvature_bound(dist(u, w), reach);
      },
      exec);
  Accumulator acc;
  acc.rec.check = "manifold_projection";
  acc.rec.chart = chart.name();
  acc.rec.radius = r;
  std::size_t missing = 0;
  for (std::size_t j = 0; j < num_samples; ++j) {
    if (!found[j]) {
      ++missing;
      ++acc.rec.samples;
      ++acc.rec.failures;
      continue;
    }
    acc.add(lhs[j], rhs[j], false);
  }
  if (missing > 0) acc.rec.note = std::to_string(missing) + " construction failures";
  return acc.finish();
}

std::vector<CheckRecord> check_hausdorff_rates(const ManifoldChart& chart, double reach,
                                               const std::vector<double>& radii, std::size_t cloud_size,
                                               const Exec& exec) {
  require_reach(reach);
  const Point& u = chart.anchor();
  const auto& frame = chart.tangent_frame();
  if (frame.size() != 1) throw std::invalid_argument("check_hausdorff_rates: needs a curve chart");
  const std::size_t dim = chart.ambient_dim();
  std::vector<CheckRecord> out;
  for (double r : radii) {
    if (r > reach) throw std::invalid_argument("check_hausdorff_rates: radius above the reach");
    const auto pts = chart.cloud(r, cloud_size);
    if (pts.empty()) throw std::invalid_argument("check_hausdorff_rates: chart has no dense parametrisation");
    std::vector<double> on_manifold, on_tangent, dirs, tangent_dirs;
    for (std::size_t j = 0; j < cloud_size; ++j) {
      const double s = -r + 2.0 * r * static_cast<double>(j) / static_cast<double>(cloud_size - 1);
      for (std::size_t i = 0; i < dim; ++i) on_tangent.push_back(u[i] + s * frame[0][i]);
    }
    for (const auto& p : pts) {
      on_manifold.insert(on_manifold.end(), p.begin(), p.end());
      const double len = dist(p, u);
      if (len < 1e-14) continue;
      for (std::size_t i = 0; i < dim; ++i) dirs.push_back((p[i] - u[i]) / len);
    }
    for (double sign : {1.0, -1.0})
      for (std::size_t i = 0; i < dim; ++i) tangent_dirs.push_back(sign * frame[0][i]);

    CheckRecord h;
    h.check = "hausdorff_ball";
    h.chart = chart.name();
    h.radius = r;
    h.samples = cloud_size;
    h.measured = hausdorff(PointCloud(dim, on_manifold), PointCloud(dim, on_tangent), exec);
    h.bound = kCloudSlack * curvature_bound(r, reach);
    h.margin = h.bound - h.measured;
    h.pass = h.measured <= h.bound + 1e-12;
    h.failures = h.pass ? 0 : 1;
    out.push_back(h);

    CheckRecord t;
    t.check = "hausdorff_directions";
    t.chart = chart.name();
    t.radius = r;
    t.samples = cloud_size;
    t.measured = truncated_hausdorff(PointCloud(dim, dirs, true), PointCloud(dim, tangent_dirs, true), exec);
    t.bound = kCloudSlack * (std::isinf(reach) ? 0.0 : r / reach);
    t.margin = t.bound - t.measured;
    t.pass = t.measured <= t.bound + 1e-12;
    t.failures = t.pass ? 0 : 1;
    out.push_back(t);
  }
  return out;
}

VariationFn kloc_upper(const VariationFn& k_tangent, const VariationFn& k_normal, double r, double reach) {
  require_reach(reach);
  if (r < 0.0 || r > reach) throw std::invalid_argument("kloc_upper: need 0 <= r <= R");
  if (k_tangent.num_modes() != k_normal.num_modes()) throw std::invalid_argument("kloc_upper: incompatible domains");
  const double c = std::isinf(reach) ? 0.0 : r / (2.0 * reach);
  Evaluable f = [k_tangent, k_normal, c](std::span<const double> y) {
    const double s = std::sqrt(std::max(k_tangent(y), 0.0)) + c * std::sqrt(std::max(k_normal(y), 0.0));
    return s * s;
  };
  return VariationFn(k_tangent.num_modes(), std::move(f), Certificate::UpperBound,
                     "local bound from tangent and normal variations");
}

VariationFn lowrank_normal_variation(const LowRankChart& chart) {
  const auto cls = model::ModelClass::tangent_low_rank(chart.at(), chart.rank());
  const auto& t = std::get<model::TangentLowRank>(cls.variant());
  const std::size_t rows = chart.at().dims()[0];
  const std::size_t cols = chart.at().dims()[1];
  const std::size_t r = t.rank;
  auto left = t.left;
  auto right = t.right;
  // Variation of the orthogonal complement of the first r columns of a frame.
  auto complement = [r](const std::vector<double>& frame, std::size_t d, double y) {
    std::vector<double> b(d);
    LegendreBasis(d).eval_all(y, b);
    double full = 0.0;
    for (double x : b) full += x * x;
    double in = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < d; ++k) v += frame[k * r + j] * b[k];
      in += v * v;
    }
    return std::max(full - in, 0.0);
  };
  Evaluable f = [=](std::span<const double> y) {
    return complement(left, rows, y[0]) * complement(right, cols, y[1]);
  };
  return VariationFn(2, std::move(f), Certificate::Exact, "orthogonal complement of the tangent space")
      .with_linear_dimension((rows - r) * (cols - r));
}

model::ModelClass local_lowrank_class(const LowRankChart& chart, double r) {
  const auto& dims = chart.at().dims();
  return model::ModelClass::shift(
      chart.at(),
      model::ModelClass::ball(chart.at(), r, model::ModelClass::low_rank_matrix(dims[0], dims[1], chart.rank())));
}

KlimitReport klimit_check(const LowRankChart& chart, const std::vector<double>& radii, const Grid& grid,
                          std::size_t num_samples, std::uint64_t seed, const Exec& exec) {
  if (radii.empty()) throw std::invalid_argument("klimit_check: empty radius list");
  const auto tangent = model::ModelClass::tangent_low_rank(chart.at(), chart.rank());
  const VariationFn k_tangent = variation_exact(tangent);
  const VariationFn k_normal = lowrank_normal_variation(chart);
  const auto exact = kernels::tabulate(k_tangent.evaluator(), grid, exec);
  const auto tangent_est = variation_estimate(tangent, grid, num_samples, seed, exec).values;

  KlimitReport rep;
  for (std::size_t i = 0; i < grid.size(); ++i) rep.tol_mc = std::max(rep.tol_mc, exact[i] - tangent_est[i]);
  const double reach = chart.sigma_rank();
  std::vector<double> last;
  for (double r : radii) {
    const auto est = variation_estimate(local_lowrank_class(chart, r), grid, num_samples, seed, exec).values;
    const auto upper = kernels::tabulate(kloc_upper(k_tangent, k_normal, r, reach).evaluator(), grid, exec);
    KlimitStep step;
    step.r = r;
    step.upper_excess = -kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      step.gap = std::max(step.gap, std::abs(est[i] - exact[i]));
      step.upper_excess = std::max(step.upper_excess, est[i] - upper[i]);
    }
    step.upper_ok = step.upper_excess <= 1e-9 * std::max(1.0, *std::max_element(upper.begin(), upper.end()));
    rep.steps.push_back(step);
    last = est;
  }
  rep.upper_ok = std::all_of(rep.steps.begin(), rep.steps.end(), [](const KlimitStep& s) { return s.upper_ok; });
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.steps.size(); ++k)
    rep.monotone = rep.monotone && rep.steps[k].gap <= 1.1 * rep.steps[k - 1].gap;
  rep.final_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i)
    rep.final_ok = rep.final_ok && last[i] >= exact[i] - rep.tol_mc - 1e-9 * std::max(1.0, exact[i]);
  rep.pass = rep.upper_ok && rep.monotone && rep.final_ok;
  return rep;
}

ReachReport reach_lowrank_ball(const CoeffTensor& v, std::size_t rank, double r) {
  const Matrix m = as_matrix(v);
  if (rank < 1 || rank > static_cast<std::size_t>(std::min(m.rows(), m.cols())))
    throw std::invalid_argument("reach_lowrank_ball: need 1 <= R <= min(rows, cols)");
  Eigen::JacobiSVD<Matrix> svd(m);
  ReachReport rep;
  rep.sigma_rank = svd.singularValues()(static_cast<Eigen::Index>(rank - 1));
  if (!(r > 0.0)) throw std::invalid_argument("reach_lowrank_ball: radius must be positive");
  if (r > rep.sigma_rank * (1.0 + 1e-12)) throw std::invalid_argument("reach_lowrank_ball: radius above sigma_R");
  rep.reach_bound = 0.5 * r;
  rep.radius_margin = std::max(0.0, rep.sigma_rank - r);
  rep.singular_margin = rep.sigma_rank - 0.5 * r;
  rep.boundary = rep.radius_margin <= 1e-12 * std::max(1.0, rep.sigma_rank);
  return rep;
}

CheckRecord check_reach_perturbations(const CoeffTensor& v, std::size_t rank, double r, std::size_t count,
                                      std::uint64_t seed, const Exec& exec) {
  reach_lowrank_ball(v, rank, r);
  const Matrix m = as_matrix(v);
  std::vector<double> gap(count), spread(count);
  kernels::for_each_index(
      count,
      [&](std::size_t j) {
        Rng rng = make_rng(derive_seed(seed, j));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Matrix z(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
        const Matrix w = m + (0.5 * r * unit(rng) / z.norm()) * z;
        Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const auto k = static_cast<Eigen::Index>(rank);
        gap[j] = s(k - 1) - (k < s.size() ? s(k) : 0.0);
        const Matrix t =
            svd.matrixU().leftCols(k) * s.head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
        spread[j] = (t - m).norm();
      },
      exec);
  CheckRecord rec;
  rec.check = "reach_lowrank_perturbation";
  rec.chart = "lowrank";
  rec.radius = r;
  rec.samples = count;
  rec.margin = kInf;
  for (std::size_t j = 0; j < count; ++j) {
    const bool ok = gap[j] > 0.0 && spread[j] <= r * (1.0 + 1e-12);
    if (!ok) ++rec.failures;
    if (r - spread[j] < rec.margin) {
      rec.margin = r - spread[j];
      rec.measured = spread[j];
      rec.bound = r;
    }
  }
  rec.pass = count > 0 && rec.failures == 0;
  return rec;
}

}  // namespace varfn::geometry
