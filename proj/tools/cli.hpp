#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace varfn::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct OutputFile {
  std::string name;
  std::string hash;  // fnv1a64, hex
};

struct RunResult {
  std::vector<OutputFile> outputs;
  nlohmann::json manifest;
};

/// Runs one experiment and writes its files plus manifest.json into out_dir.
/// Throws std::invalid_argument (and nlohmann::json errors) for configuration
/// problems and NumericalError for numerical failures.
RunResult run(const std::string& subcommand, const nlohmann::json& config, const std::filesystem::path& out_dir,
              int threads);

/// Full command line: parses, runs, echoes the manifest on out, maps errors to
/// exit codes.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace varfn::cli
