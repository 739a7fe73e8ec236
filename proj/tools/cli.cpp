#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "varfn/basis.hpp"
#include "varfn/common.hpp"
#include "varfn/geometry.hpp"
#include "varfn/grid.hpp"
#include "varfn/io.hpp"
#include "varfn/measure.hpp"
#include "varfn/model.hpp"
#include "varfn/rip.hpp"
#include "varfn/rng.hpp"
#include "varfn/solver.hpp"
#include "varfn/variation.hpp"

namespace varfn::cli {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

// --- config readers --------------------------------------------------------

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

std::uint64_t get_u64(const json& j, const std::string& key, std::uint64_t dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) bad(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t get_count(const json& j, const std::string& key, std::size_t dflt) {
  const std::uint64_t v = get_u64(j, key, dflt);
  if (v == 0) bad(key, "must be positive");
  return static_cast<std::size_t>(v);
}

double get_double(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "must be finite");
  return x;
}

double get_positive(const json& j, const std::string& key, double dflt) {
  const double x = get_double(j, key, dflt);
  if (!(x > 0.0)) bad(key, "must be positive");
  return x;
}

std::string get_choice(const json& j, const std::string& key, const std::string& dflt,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_string()) bad(key, "expected a string");
  const std::string s = v.get<std::string>();
  for (auto a : allowed)
    if (s == a) return s;
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  bad(key, "'" + s + "' is not one of " + list);
}

std::vector<std::size_t> get_counts(const json& j, const std::string& key, std::vector<std::size_t> dflt) {
  if (!j.contains(key)) {
    if (dflt.empty()) bad(key, "required");
    return dflt;
  }
  const json& v = j.at(key);
  std::vector<std::size_t> out;
  if (v.is_number_unsigned()) {
    out.push_back(v.get<std::size_t>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number_unsigned()) bad(key, "expected non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
  } else {
    bad(key, "expected an integer or a list of integers");
  }
  if (out.empty()) bad(key, "must not be empty");
  for (std::size_t x : out)
    if (x == 0) bad(key, "entries must be positive");
  return out;
}

std::vector<double> get_doubles(const json& j, const std::string& key, std::vector<double> dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) bad(key, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(key, "expected numbers");
    const double x = e.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) bad(key, "entries must be positive");
    out.push_back(x);
  }
  return out;
}

const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) bad(key, "required");
  return j.at(key);
}

// --- shared pieces ---------------------------------------------------------

struct Context {
  std::filesystem::path out_dir;
  Exec exec;
  std::vector<OutputFile> outputs;
  json summary = json::object();

  void emit(const std::string& name, const std::string& contents) {
    io::write_file_atomic(out_dir / name, contents);
    outputs.push_back({name, io::hex64(io::fnv1a64(contents))});
  }
};

Grid grid_for(std::size_t modes, std::size_t points_per_mode, std::uint64_t seed) {
  if (modes <= kMaxTensorGridModes) {
    const auto nodes = chebyshev_lobatto_nodes(points_per_mode);
    return tensor_grid(nodes, modes);
  }
  return uniform_random_grid(modes, kRandomGridPoints, seed);
}

// Closed form when available unless the config asks for the estimator.
VariationFn class_variation(const model::ModelClass& cls, const std::string& method, std::size_t samples,
                            std::uint64_t seed, const Exec& exec) {
  if (method == "exact" || (method == "auto" && has_exact_variation(cls))) return variation_exact(cls);
  return variation_estimate(cls, samples, seed, exec);
}

std::string row(std::span<const double> y, std::initializer_list<std::string> tail) {
  std::string s;
  for (double v : y) s += io::format_double(v) + ",";
  bool first = true;
  for (const auto& t : tail) {
    s += (first ? "" : ",") + t;
    first = false;
  }
  return s + "\n";
}

std::string header(std::size_t modes, const std::string& tail) {
  std::string s;
  for (std::size_t m = 1; m <= modes; ++m) s += "y_" + std::to_string(m) + ",";
  return s + tail + "\n";
}

// --- subcommands -----------------------------------------------------------

void cmd_variation(const json& cfg, std::uint64_t seed, Context& ctx) {
  io::reject_unknown_keys(cfg, {"seed", "threads", "class", "method", "samples", "grid_points"}, "variation");
  const model::ModelClass cls = io::model_class_from_json(require(cfg, "class"));
  const std::string method = get_choice(cfg, "method", "auto", {"auto", "exact", "estimate"});
  const std::size_t samples = get_count(cfg, "samples", 1000);
  const std::size_t points = get_count(cfg, "grid_points", kGridPointsPerMode);
  const std::size_t modes = cls.num_modes();
  const Grid grid = grid_for(modes, points, seed);

  std::optional<VariationFn> k;
  std::vector<double> values;
  if (method == "exact" || (method == "auto" && has_exact_variation(cls))) {
    k = variation_exact(cls);
    values = kernels::tabulate(k->evaluator(), grid, ctx.exec);
  } else {
    GridEstimate est = variation_estimate(cls, grid, samples, seed, ctx.exec);
    k = std::move(est.fn);
    values = std::move(est.values);
  }
  std::ostringstream out;
  write_variation_csv(out, *k, grid, values);
  ctx.emit("variation.csv", out.str());

  double sup = 0.0;
  for (double v : values) sup = std::max(sup, v);
  ctx.summary = {{"certificate", to_string(k->certificate())},
                 {"grid_points", grid.size()},
                 {"max_K_value", sup},
                 {"l1_norm", l1_norm(*k, ctx.exec)}};
}

void cmd_optimal_weight(const json& cfg, std::uint64_t seed, Context& ctx) {
  io::reject_unknown_keys(cfg, {"seed", "threads", "class", "method", "samples", "grid_points"},
                          "optimal-weight");
  const model::ModelClass cls = io::model_class_from_json(require(cfg, "class"));
  const std::string method = get_choice(cfg, "method", "auto", {"auto", "exact", "estimate"});
  const std::size_t samples = get_count(cfg, "samples", 1000);
  const std::size_t points = get_count(cfg, "grid_points", kGridPointsPerMode);
  const std::size_t modes = cls.num_modes();
  const VariationFn k = class_variation(cls, method, samples, seed, ctx.exec);
  const WeightFunction w = optimal_weight(k, DomainSpec(modes), ctx.exec);
  const Grid grid = grid_for(modes, points, seed);
  const auto kv = kernels::tabulate(k.evaluator(), grid, ctx.exec);

  std::string csv = header(modes, "K_value,weight,density");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto y = grid.point(i);
    csv += row(y, {io::format_double(kv[i]), io::format_double(w(y)), io::format_double(w.density(y))});
  }
  ctx.emit("optimal_weight.csv", csv);

  const VariationNormReport norms = variation_norms(k, w, grid, ctx.exec);
  ctx.summary = {{"certificate", to_string(k.certificate())},
                 {"l1_norm", norms.l1_norm},
                 {"weighted_sup", norms.sup_norm}};
}

void cmd_rip_prob(const json& cfg, std::uint64_t seed, Context& ctx) {
  io::reject_unknown_keys(cfg,
                          {"seed", "threads", "class", "weight", "n", "delta", "trials", "mode", "num_test",
                           "variation_samples"},
                          "rip-prob");
  const model::ModelClass cls = io::model_class_from_json(require(cfg, "class"));
  const std::string weight_kind = get_choice(cfg, "weight", "optimal", {"optimal", "uniform"});
  const std::vector<std::size_t> ns = get_counts(cfg, "n", {});
  const double delta = get_positive(cfg, "delta", 0.5);
  if (delta >= 1.0) bad("delta", "must lie in (0, 1)");
  const std::size_t trials = get_count(cfg, "trials", 1000);
  const std::string mode =
      get_choice(cfg, "mode", model::is_linear_class(cls) ? "spectral" : "mc", {"spectral", "mc"});
  if (mode == "spectral" && !model::is_linear_class(cls)) bad("mode", "spectral needs a linear class");

  RipProbOptions opts;
  opts.method = mode == "spectral" ? RipMethod::Spectral : RipMethod::MonteCarlo;
  opts.num_test = get_count(cfg, "num_test", opts.num_test);
  opts.variation_samples = get_count(cfg, "variation_samples", opts.variation_samples);

  const std::size_t modes = cls.num_modes();
  const WeightFunction w =
      weight_kind == "uniform"
          ? WeightFunction::uniform(modes)
          : optimal_weight(class_variation(cls, "auto", opts.variation_samples, seed, ctx.exec), DomainSpec(modes),
                           ctx.exec);

  std::vector<RipProbEstimate> rows;
  for (std::size_t i = 0; i < ns.size(); ++i)
    rows.push_back(rip_probability(cls, w, ns[i], delta, trials, derive_seed(seed, i << 32), opts, ctx.exec));
  std::ostringstream out;
  write_rip_csv(out, rows);
  ctx.emit("rip.csv", out.str());
  ctx.summary = {{"method", to_string(opts.method)}, {"rows", rows.size()}};
}

void cmd_phase_diagram(const json& cfg, std::uint64_t seed, Context& ctx) {
  io::reject_unknown_keys(cfg,
                          {"seed", "threads", "orders", "samples", "d", "target", "weight", "trials", "max_iters",
                           "tol", "success_threshold"},
                          "phase-diagram");
  PhaseConfig pc;
  pc.orders = get_counts(cfg, "orders", {});
  pc.samples = get_counts(cfg, "samples", {});
  pc.d = get_count(cfg, "d", pc.d);
  pc.target = get_choice(cfg, "target", "ones", {"ones", "exp"}) == "ones" ? PhaseTarget::Ones : PhaseTarget::Exp;
  pc.weight = get_choice(cfg, "weight", "optimal", {"optimal", "uniform"}) == "optimal" ? PhaseWeight::Optimal
                                                                                       : PhaseWeight::Uniform;
  pc.trials = get_count(cfg, "trials", pc.trials);
  pc.seed = seed;
  pc.iht.max_iters = get_count(cfg, "max_iters", pc.iht.max_iters);
  pc.iht.tol = get_positive(cfg, "tol", pc.iht.tol);
  pc.success_threshold = get_positive(cfg, "success_threshold", pc.success_threshold);

  const std::vector<PhaseCell> cells = phase_diagram(pc, ctx.exec);
  std::ostringstream out;
  write_phase_csv(out, cells);
  ctx.emit("phase.csv", out.str());

  json failed = json::array();
  for (const auto& c : cells)
    if (c.failed) failed.push_back({{"M", c.order}, {"n", c.n}, {"error", c.error}});
  ctx.summary = {{"cells", cells.size()}, {"failed_cells", failed}};
}

void cmd_geometry_check(const json& cfg, std::uint64_t seed, Context& ctx) {
  using namespace geometry;
  io::reject_unknown_keys(cfg, {"seed", "threads", "samples", "cloud_size", "charts"}, "geometry-check");
  const std::size_t samples = get_count(cfg, "samples", 1000);
  const std::size_t cloud = get_count(cfg, "cloud_size", 1000);
  const json& charts = require(cfg, "charts");
  if (!charts.is_array() || charts.empty()) bad("charts", "expected a non-empty list");

  json checks = json::array();
  json klimits = json::array();
  json reaches = json::array();
  bool all = true;
  auto add = [&](const CheckRecord& r) {
    all = all && r.pass;
    checks.push_back(to_json(r));
  };

  std::uint64_t stream = 0;
  auto next_seed = [&] { return derive_seed(seed, (stream++) << 32); };

  for (const json& c : charts) {
    if (!c.is_object()) bad("charts", "entries must be objects");
    const std::string type = get_choice(c, "type", "", {"circle", "parabola", "lowrank"});
    if (type == "circle" || type == "parabola") {
      io::reject_unknown_keys(c, {"type", "radius", "kappa", "width", "r", "radii"}, "geometry-check chart");
      std::unique_ptr<PlaneCurveChart> chart;
      double reach = 0.0;
      if (type == "circle") {
        if (c.contains("kappa") || c.contains("width")) bad("charts", "circle takes radius only");
        reach = get_positive(c, "radius", 1.0);
        chart = std::make_unique<CircleChart>(reach);
      } else {
        if (c.contains("radius")) bad("charts", "parabola takes kappa and width");
        const double kappa = get_positive(c, "kappa", 0.1);
        reach = 1.0 / kappa;
        chart = c.contains("width") ? std::make_unique<ParabolaChart>(kappa, get_positive(c, "width", 1.0))
                                    : std::make_unique<ParabolaChart>(kappa);
      }
      const double r = get_positive(c, "r", 0.5 * reach);
      const auto radii = get_doubles(c, "radii", {0.4 * reach, 0.2 * reach, 0.1 * reach});
      add(check_tangent_projection(*chart, reach, r, samples, next_seed(), ctx.exec));
      add(check_manifold_projection(*chart, reach, std::min(r, chart->r_star()), samples, next_seed(), ctx.exec));
      for (const auto& rec : check_hausdorff_rates(*chart, reach, radii, cloud, ctx.exec)) add(rec);
    } else {
      io::reject_unknown_keys(c, {"type", "at", "rank", "radii_fraction", "mc_samples", "perturbations", "grid_points"},
                              "geometry-check chart");
      const CoeffTensor at = io::coeff_tensor_from_json(require(c, "at")).to_dense();
      const std::size_t rank = get_count(c, "rank", 1);
      const LowRankChart chart(at, rank);
      const double reach = *chart.reach();
      add(check_tangent_projection(chart, reach, chart.r_star(), samples, next_seed(), ctx.exec));
      add(check_manifold_projection(chart, reach, chart.r_star(), samples, next_seed(), ctx.exec));

      const ReachReport rr = reach_lowrank_ball(at, rank, chart.sigma_rank());
      reaches.push_back({{"chart", chart.name()},
                         {"reach_bound", rr.reach_bound},
                         {"sigma_rank", rr.sigma_rank},
                         {"radius_margin", rr.radius_margin},
                         {"singular_margin", rr.singular_margin},
                         {"boundary", rr.boundary}});
      add(check_reach_perturbations(at, rank, chart.sigma_rank(), get_count(c, "perturbations", 1000), next_seed(),
                                    ctx.exec));

      std::vector<double> radii;
      for (double f : get_doubles(c, "radii_fraction", {0.5, 0.25, 0.125})) radii.push_back(f * chart.sigma_max());
      const Grid grid = grid_for(2, get_count(c, "grid_points", kGridPointsPerMode), seed);
      const KlimitReport kr =
          klimit_check(chart, radii, grid, get_count(c, "mc_samples", 20000), next_seed(), ctx.exec);
      json steps = json::array();
      for (const auto& s : kr.steps)
        steps.push_back({{"r", s.r}, {"gap", s.gap}, {"upper_excess", s.upper_excess}, {"upper_ok", s.upper_ok}});
      klimits.push_back({{"chart", chart.name()},
                         {"steps", steps},
                         {"tol_mc", kr.tol_mc},
                         {"monotone", kr.monotone},
                         {"final_ok", kr.final_ok},
                         {"upper_ok", kr.upper_ok},
                         {"pass", kr.pass}});
      all = all && kr.upper_ok && kr.monotone;
    }
  }
  const json doc = {{"checks", checks}, {"klimit", klimits}, {"reach", reaches}, {"pass", all}};
  ctx.emit("geometry.json", doc.dump(2) + "\n");
  ctx.summary = {{"records", checks.size()}, {"pass", all}};
}

void cmd_quasi_opt(const json& cfg, std::uint64_t seed, Context& ctx) {
  io::reject_unknown_keys(cfg,
                          {"seed", "threads", "dims", "tail_norm", "n", "weight", "num_test", "max_iters", "tol",
                           "target"},
                          "quasi-opt");
  std::vector<std::size_t> dims;
  CoeffTensor u;
  if (cfg.contains("target")) {
    if (cfg.contains("dims") || cfg.contains("tail_norm")) bad("target", "excludes dims and tail_norm");
    u = io::coeff_tensor_from_json(cfg.at("target"));
    dims = u.dims();
  } else {
    dims = get_counts(cfg, "dims", {4, 4});
    const double tail_norm = get_double(cfg, "tail_norm", 1e-3);
    if (tail_norm < 0.0) bad("tail_norm", "must be non-negative");
    if (dense_size(dims) > kMaxDenseEntries) bad("dims", "dense tensor too large");
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> factors;
    for (std::size_t d : dims) {
      std::vector<double> f(d);
      for (double& x : f) x = normal(rng);
      factors.push_back(std::move(f));
    }
    std::vector<double> tail(dense_size(dims));
    for (double& x : tail) x = normal(rng);
    const CoeffTensor t = CoeffTensor::dense(dims, tail);
    u = linear_combination(1.0, CoeffTensor::rank1(std::move(factors)), tail_norm / t.norm(), t);
  }
  const std::size_t modes = dims.size();
  const std::size_t n = get_count(cfg, "n", 10 * dense_size(dims));
  const WeightFunction w = get_choice(cfg, "weight", "optimal", {"optimal", "uniform"}) == "optimal"
                               ? ambient_optimal_weight(dims)
                               : WeightFunction::uniform(modes);
  const std::size_t num_test = get_count(cfg, "num_test", 2000);
  IhtOptions opts;
  opts.seed = seed;
  opts.max_iters = get_count(cfg, "max_iters", opts.max_iters);
  opts.tol = get_positive(cfg, "tol", opts.tol);

  const model::ModelClass cone = model::ModelClass::rank1_cone(dims);
  const CoeffTensor best = model::project(cone, u, seed).point;
  const SampleBatch batch = draw_samples(DomainSpec(modes), w, n, derive_seed(seed, 1));
  const TensorBasis basis = TensorBasis::legendre(dims);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = eval_function(u, basis, batch.point(i));
  const SolveResult r = solve_iht_rank1(basis, batch, values, opts);
  if (r.stagnated && !r.converged) throw NumericalError("hard thresholding stagnated");
  const double delta =
      rip_delta_mc(model::ModelClass::shift(best, cone), batch, num_test, derive_seed(seed, 2), ctx.exec).delta_hat;
  const QuasiOptReport q = quasi_opt_check(u, best, batch, r, delta, w, grid_for(modes, kGridPointsPerMode, seed),
                                           ctx.exec);
  const json doc = {{"lhs", q.lhs},
                    {"rhs", q.rhs},
                    {"factor", q.factor},
                    {"delta_hat", q.delta_hat},
                    {"pass", q.pass},
                    {"applicable", q.applicable},
                    {"tail_sup", q.tail_sup},
                    {"empirically_optimal", q.empirically_optimal},
                    {"iterations", r.iterations},
                    {"converged", r.converged},
                    {"n", n}};
  ctx.emit("quasiopt.json", doc.dump(2) + "\n");
  ctx.summary = {{"pass", q.pass}, {"applicable", q.applicable}};
}

using Command = void (*)(const json&, std::uint64_t, Context&);

struct Entry {
  const char* name;
  Command fn;
  const char* help;
};

constexpr Entry kCommands[] = {
    {"variation", cmd_variation, "Tabulate the variation function of a model class"},
    {"optimal-weight", cmd_optimal_weight, "Tabulate the optimal sampling weight of a model class"},
    {"rip-prob", cmd_rip_prob, "Estimate restricted-isometry failure rates"},
    {"phase-diagram", cmd_phase_diagram, "Rank-1 recovery success over (M, n)"},
    {"geometry-check", cmd_geometry_check, "Projection, Hausdorff and local variation checks"},
    {"quasi-opt", cmd_quasi_opt, "Quasi-optimality of rank-1 hard thresholding"},
};

}  // namespace

RunResult run(const std::string& subcommand, const json& config, const std::filesystem::path& out_dir, int threads) {
  const Entry* entry = nullptr;
  for (const auto& e : kCommands)
    if (subcommand == e.name) entry = &e;
  if (entry == nullptr) throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  if (!config.is_object()) throw std::invalid_argument("config must be a JSON object");

  const std::uint64_t seed = get_u64(config, "seed", 0);
  int budget = static_cast<int>(get_u64(config, "threads", 0));
  if (threads > 0) budget = threads;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::invalid_argument("cannot create output directory " + out_dir.string() + ": " + ec.message());

  Context ctx{out_dir, Exec{budget, false}, {}, json::object()};
  entry->fn(config, seed, ctx);

  // The thread budget is left out so the manifest is the same for every budget.
  json cfg = config;
  cfg.erase("threads");
  json outputs = json::array();
  for (const auto& o : ctx.outputs) outputs.push_back({{"file", o.name}, {"fnv1a64", o.hash}});
  const json manifest = {{"tool", "varfn"},
                         {"version", kVersion},
                         {"subcommand", subcommand},
                         {"seed", seed},
                         {"config_hash", io::hex64(io::fnv1a64(cfg.dump()))},
                         {"outputs", outputs},
                         {"summary", ctx.summary}};
  io::write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return {ctx.outputs, manifest};
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"varfn: variation functions, optimal sampling and recovery experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  for (const auto& e : kCommands) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--threads", threads, "Thread budget (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path);
    const json config = json::parse(in);
    const RunResult r = run(subcommand, config, out_dir, threads);
    out << r.manifest.dump(2) << "\n";
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::logic_error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace varfn::cli
