#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "varfn/basis.hpp"
#include "varfn/common.hpp"
#include "varfn/grid.hpp"
#include "varfn/kernels.hpp"
#include "varfn/model.hpp"
#include "varfn/rng.hpp"
#include "varfn/variation.hpp"

namespace varfn::geometry {

using Point = std::vector<double>;

/// Finite stand-in for a set in a Hausdorff distance. unit marks clouds of
/// unit vectors.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> coords;
  bool unit = false;

  PointCloud(std::size_t dim, std::vector<double> coords, bool unit = false);
  std::size_t size() const noexcept { return coords.size() / dim; }
  kernels::CloudView view() const { return {coords, dim}; }
};

/// Exact two-sided Hausdorff distance by pairwise distances.
double hausdorff(const PointCloud& a, const PointCloud& b, const Exec& exec = {});

/// Hausdorff distance of two clouds of unit vectors (cone traces on the
/// sphere). Throws std::invalid_argument if a point is off the sphere by more
/// than 1e-10.
double truncated_hausdorff(const PointCloud& a, const PointCloud& b, const Exec& exec = {});

/// A manifold near an anchor point u.
class ManifoldChart {
 public:
  virtual ~ManifoldChart() = default;
  virtual std::string name() const = 0;
  virtual std::size_t ambient_dim() const = 0;
  virtual const Point& anchor() const = 0;
  /// Orthonormal basis of the tangent space at the anchor.
  virtual const std::vector<Point>& tangent_frame() const = 0;
  /// Reach at the anchor when known analytically (may be +inf).
  virtual std::optional<double> reach() const = 0;
  /// Radius below which the projection construction is valid.
  virtual double r_star() const = 0;
  /// A manifold point v with ||v - u|| < r.
  virtual Point sample_near(double r, Rng& rng) const = 0;
  /// Manifold point attached to a tangent point w; nullopt when the
  /// construction fails.
  virtual std::optional<Point> manifold_point_toward(std::span<const double> w) const = 0;
  /// count points of N within distance r of u, ordered along the chart, or
  /// empty when the chart has no dense parametrisation.
  virtual std::vector<Point> cloud(double r, std::size_t count) const;
};

/// Plane curve through u = 0 with tangent e_1, located by the sign of an
/// implicit function that is negative at the curvature centre.
class PlaneCurveChart : public ManifoldChart {
 public:
  std::size_t ambient_dim() const override { return 2; }
  const Point& anchor() const override { return anchor_; }
  const std::vector<Point>& tangent_frame() const override { return frame_; }
  std::optional<Point> manifold_point_toward(std::span<const double> w) const override;
  Point sample_near(double r, Rng& rng) const override;
  std::vector<Point> cloud(double r, std::size_t count) const override;

  virtual double implicit(std::span<const double> p) const = 0;
  /// Curvature centre at u; nullopt for a flat curve.
  virtual std::optional<Point> centre() const = 0;
  virtual Point at(double t) const = 0;
  /// Largest |t| with ||at(t) - u|| <= r.
  virtual double parameter_radius(double r) const = 0;

 protected:
  Point anchor_{0.0, 0.0};
  std::vector<Point> frame_{{1.0, 0.0}};
};

/// Circle of radius R through 0 with centre (0, -R).
class CircleChart final : public PlaneCurveChart {
 public:
  explicit CircleChart(double radius);
  std::string name() const override { return "circle"; }
  std::optional<double> reach() const override { return radius_; }
  double r_star() const override { return radius_; }
  double implicit(std::span<const double> p) const override;
  std::optional<Point> centre() const override { return Point{0.0, -radius_}; }
  Point at(double theta) const override;
  double parameter_radius(double r) const override;

 private:
  double radius_;
};

/// y = -kappa x^2 / 2 for |x| <= width.
class ParabolaChart final : public PlaneCurveChart {
 public:
  explicit ParabolaChart(double kappa, std::optional<double> width = std::nullopt);
  std::string name() const override { return "parabola"; }
  std::optional<double> reach() const override;
  double r_star() const override { return width_; }
  double implicit(std::span<const double> p) const override;
  std::optional<Point> centre() const override;
  Point at(double x) const override;
  double parameter_radius(double r) const override;

 private:
  double kappa_;
  double width_;
};

/// Matrices of rank R near a rank-R anchor, flattened row-major. The reach
/// used for the local bounds is sigma_R of the anchor; points are produced by
/// perturbing and re-truncating.
class LowRankChart final : public ManifoldChart {
 public:
  LowRankChart(const CoeffTensor& at, std::size_t rank);
  std::string name() const override { return "lowrank"; }
  std::size_t ambient_dim() const override { return anchor_.size(); }
  const Point& anchor() const override { return anchor_; }
  const std::vector<Point>& tangent_frame() const override { return frame_; }
  std::optional<double> reach() const override { return sigma_rank_; }
  double r_star() const override { return 0.5 * sigma_rank_; }
  Point sample_near(double r, Rng& rng) const override;
  std::optional<Point> manifold_point_toward(std::span<const double> w) const override;

  const CoeffTensor& at() const noexcept { return at_; }
  std::size_t rank() const noexcept { return rank_; }
  double sigma_rank() const noexcept { return sigma_rank_; }
  double sigma_max() const noexcept { return sigma_max_; }

 private:
  CoeffTensor at_;
  std::size_t rank_;
  Point anchor_;
  std::vector<Point> frame_;
  double sigma_rank_ = 0.0;
  double sigma_max_ = 0.0;
};

/// Orthonormal frame of the tangent space at a rank-R matrix; dimension
/// R cols + (rows - R) R.
std::vector<CoeffTensor> tangent_lowrank(const CoeffTensor& v, std::size_t rank);

/// One verified inequality.
struct CheckRecord {
  std::string check;
  std::string chart;
  double radius = 0.0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double measured = 0.0;  // worst measured left-hand side
  double bound = 0.0;     // right-hand side at that sample (or the fixed bound)
  double margin = 0.0;    // min over samples of bound - measured
  double equality_gap = 0.0;
  bool pass = false;
  std::string note;
};

nlohmann::json to_json(const CheckRecord& r);

/// v on N near u, w its projection to u + T: ||v - w|| <= ||u - v||^2/(2R)
/// + 1e-10 and ||u - w|| <= ||u - v||. equality_gap is the largest
/// | ||v - w|| - ||u - v||^2/(2R) |.
CheckRecord check_tangent_projection(const ManifoldChart& chart, double reach, double r, std::size_t num_samples,
                                     std::uint64_t seed, const Exec& exec = {});

/// w in u + T near u, v the manifold point toward w: ||w - v|| <=
/// ||u - w||^2/(2R) + 1e-10.
CheckRecord check_manifold_projection(const ManifoldChart& chart, double reach, double r, std::size_t num_samples,
                                      std::uint64_t seed, const Exec& exec = {});

constexpr double kCloudSlack = 1.05;

/// Per radius: d_H(N cap B, (u+T) cap B) <= 1.05 r^2/(2R) and
/// d_tH(N cap B - u, T) <= 1.05 r/R on clouds of cloud_size points.
std::vector<CheckRecord> check_hausdorff_rates(const ManifoldChart& chart, double reach,
                                               const std::vector<double>& radii, std::size_t cloud_size,
                                               const Exec& exec = {});

/// (sqrt K_T + (r/2R) sqrt K_perp)^2 as an upper bound.
VariationFn kloc_upper(const VariationFn& k_tangent, const VariationFn& k_normal, double r, double reach);

/// Exact variation of the complement of the tangent space in the matrix space:
/// K_{<U>^perp}(y_1) K_{<V>^perp}(y_2).
VariationFn lowrank_normal_variation(const LowRankChart& chart);

/// {u} - (rank-R matrices within distance r of u).
model::ModelClass local_lowrank_class(const LowRankChart& chart, double r);

struct KlimitStep {
  double r = 0.0;
  double gap = 0.0;           // max_grid |estimate - K_T|
  double upper_excess = 0.0;  // max_grid (estimate - kloc_upper)
  bool upper_ok = false;
};

struct KlimitReport {
  std::vector<KlimitStep> steps;
  double tol_mc = 0.0;  // shortfall of the estimator on the tangent space itself
  bool monotone = false;
  bool final_ok = false;
  bool upper_ok = false;
  bool pass = false;
};

/// Radii are taken in the given order (decreasing). Every estimate uses
/// num_samples draws with the same seed.
KlimitReport klimit_check(const LowRankChart& chart, const std::vector<double>& radii, const Grid& grid,
                          std::size_t num_samples, std::uint64_t seed, const Exec& exec = {});

struct ReachReport {
  double reach_bound = 0.0;  // r / 2
  double sigma_rank = 0.0;
  double radius_margin = 0.0;    // sigma_R - r
  double singular_margin = 0.0;  // sigma_R - r/2
  bool boundary = false;         // radius_margin is zero within 1e-12
};

/// Lower bound r/2 on the reach of rank-R matrices within distance r of v.
/// Throws std::invalid_argument when r > sigma_R(v).
ReachReport reach_lowrank_ball(const CoeffTensor& v, std::size_t rank, double r);

/// count perturbations w with ||v - w|| < r/2: each must have sigma_R(w) >
/// sigma_{R+1}(w) and a rank-R truncation within distance r of v.
CheckRecord check_reach_perturbations(const CoeffTensor& v, std::size_t rank, double r, std::size_t count,
                                      std::uint64_t seed, const Exec& exec = {});

}  // namespace varfn::geometry
