#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "varfn/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "varfn_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "varfn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = varfn::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Invocation run_config(const std::string& sub, const json& cfg, const fs::path& dir,
                      std::vector<std::string> extra = {}) {
  const fs::path c = dir / "config.json";
  std::ofstream(c) << cfg.dump();
  std::vector<std::string> args{sub, "--config", c.string(), "--out", (dir / "out").string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return invoke(args);
}

const json kSpan5 = {{"seed", 1},
                     {"class", {{"type", "linear_span"}, {"dims", {5}}, {"indices", {{0}, {1}, {2}, {3}, {4}}}}}};

}  // namespace

TEST_CASE("variation of a five-function span peaks at 25") {
  const fs::path d = scratch("span5");
  const Invocation r = run_config("variation", kSpan5, d);
  REQUIRE(r.code == varfn::cli::kExitOk);
  std::istringstream csv(slurp(d / "out" / "variation.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "y_1,K_value,certificate");
  double best = 0.0;
  while (std::getline(csv, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    best = std::max(best, std::stod(line.substr(a + 1, b - a - 1)));
  }
  CHECK(best == doctest::Approx(25.0).epsilon(1e-12));
  const json m = json::parse(r.out);
  CHECK(m["subcommand"] == "variation");
  CHECK(m["outputs"][0]["file"] == "variation.csv");
  CHECK(m == json::parse(slurp(d / "out" / "manifest.json")));
}

TEST_CASE("manifest hashes match the written files") {
  const fs::path d = scratch("hash");
  REQUIRE(run_config("variation", kSpan5, d).code == 0);
  const json m = json::parse(slurp(d / "out" / "manifest.json"));
  for (const auto& o : m["outputs"]) {
    const std::string body = slurp(d / "out" / o["file"].get<std::string>());
    CHECK(o["fnv1a64"] == varfn::io::hex64(varfn::io::fnv1a64(body)));
  }
}

TEST_CASE("outputs are byte-identical across runs and thread budgets") {
  const std::vector<std::pair<std::string, json>> cases{
      {"variation",
       {{"seed", 3}, {"class", {{"type", "rank1_cone"}, {"dims", {3, 3}}}}, {"method", "estimate"}, {"samples", 300}}},
      {"rip-prob",
       {{"seed", 4},
        {"class", {{"type", "linear_span"}, {"dims", {3}}, {"indices", {{1}}}}},
        {"weight", "uniform"},
        {"n", {10, 20}},
        {"delta", 0.3},
        {"trials", 200}}},
      {"phase-diagram", {{"seed", 5}, {"orders", {2}}, {"samples", {30}}, {"d", 3}, {"trials", 2}}},
      {"quasi-opt", {{"seed", 6}, {"dims", {3, 3}}, {"num_test", 200}}},
  };
  for (const auto& [sub, cfg] : cases) {
    CAPTURE(sub);
    std::vector<std::string> manifests;
    for (const std::string threads : {"1", "1", "3"}) {
      const fs::path d = scratch(sub + "_" + std::to_string(manifests.size()));
      const Invocation r = run_config(sub, cfg, d, {"--threads", threads});
      REQUIRE(r.code == 0);
      manifests.push_back(slurp(d / "out" / "manifest.json"));
    }
    CHECK(manifests[0] == manifests[1]);
    CHECK(manifests[0] == manifests[2]);
  }
}

TEST_CASE("geometry-check writes per-check records") {
  const fs::path d = scratch("geom");
  const json cfg = {{"seed", 2}, {"samples", 200}, {"cloud_size", 200}, {"charts", {{{"type", "circle"}}}}};
  REQUIRE(run_config("geometry-check", cfg, d).code == 0);
  const json g = json::parse(slurp(d / "out" / "geometry.json"));
  CHECK(g["checks"].size() >= 3);
  CHECK(g["checks"][0].contains("check"));
  CHECK(g["pass"] == true);
}

TEST_CASE("optimal-weight table") {
  const fs::path d = scratch("ow");
  const json cfg = {{"class", {{"type", "full_space"}, {"dims", {3}}}}, {"grid_points", 5}};
  REQUIRE(run_config("optimal-weight", cfg, d).code == 0);
  const std::string csv = slurp(d / "out" / "optimal_weight.csv");
  CHECK(csv.rfind("y_1,K_value,weight,density\n-1,9,", 0) == 0);
}

TEST_CASE("configuration errors exit with status 1") {
  const fs::path d = scratch("errors");
  json extra = kSpan5;
  extra["bogus"] = true;
  CHECK(run_config("variation", extra, d).code == varfn::cli::kExitConfig);
  json neg = kSpan5;
  neg["samples"] = -3;
  CHECK(run_config("variation", neg, d).code == varfn::cli::kExitConfig);
  CHECK(run_config("variation", json{{"seed", 1}}, d).code == varfn::cli::kExitConfig);
  CHECK(run_config("rip-prob", json{{"class", kSpan5["class"]}, {"n", 10}, {"delta", 1.5}}, d).code ==
        varfn::cli::kExitConfig);
  CHECK(invoke({"variation", "--config", (d / "missing.json").string(), "--out", d.string()}).code ==
        varfn::cli::kExitConfig);
  CHECK(invoke({"frobnicate"}).code == varfn::cli::kExitConfig);
  std::ofstream(d / "broken.json") << "{not json";
  CHECK(invoke({"variation", "--config", (d / "broken.json").string(), "--out", d.string()}).code ==
        varfn::cli::kExitConfig);
}

TEST_CASE("numerical failures exit with status 2") {
  const fs::path d = scratch("numerical");
  const json empty_class = {
      {"class", {{"type", "weighted_sparse"}, {"dims", {3}}, {"weights", {2, 2, 2}}, {"budget", 1}}},
      {"method", "estimate"}};
  const Invocation r = run_config("variation", empty_class, d);
  CHECK(r.code == varfn::cli::kExitNumerical);
  CHECK(r.err.find("numerical") != std::string::npos);
}

TEST_CASE("help exits cleanly") { CHECK(invoke({"--help"}).code == 0); }
