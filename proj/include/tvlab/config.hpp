#ifndef TVLAB_CONFIG_HPP
#define TVLAB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvlab/decay.hpp"
#include "tvlab/discretization.hpp"
#include "tvlab/model.hpp"
#include "tvlab/simulation.hpp"

namespace tvlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct ResolventOptions {
  double lambda_min = 0.1;
  double lambda_max = 100.0;
  int count = 50;
  bool include_zero = true;
};

struct ScanConfig {
  std::vector<double> ratios{0.5, 1.0, 2.0};
  std::vector<Mesh> meshes{{20, 8}, {40, 16}, {80, 32}};
  std::vector<BoundaryFamily> bcs{BoundaryFamily::FullDirichlet, BoundaryFamily::NeumannDirichlet};
  InitialData initial = InitialData::Rough;
  /// Cells with larger n are simulated but not eigensolved.
  int spectrum_max_n = 80;
  /// Ratios tested by `compare`.
  double unequal_ratio = 2.0;
  double equal_ratio = 1.0;
};

struct ObservabilityOptions {
  double rho = 1.0;
  double k = 1.0;
  double L = 3.14159265358979323846;
  int n = 200;
  double a1 = 0.785398163397448310;  // L / 4
  double a2 = 1.57079632679489662;   // L / 2
  double b1 = 1.25663706143591730;   // 2 L / 5
  double b2 = 1.88495559215387594;   // 3 L / 5
  int samples = 64;
  double lambda_max = 20.0;
  int modes = 5;
};

/// Everything a run depends on.  Defaults are the documented defaults; `{}`
/// is a valid configuration.
struct RunConfig {
  PhysicalParams params;
  MemoryKernel kernel;
  BoundaryFamily bc = BoundaryFamily::FullDirichlet;
  CouplingVariant variant = CouplingVariant::CaseI;
  GridOptions grids;
  TimeScheme scheme;
  InitialData initial = InitialData::Smooth;
  ResolventOptions resolvent;
  ScanConfig scan;
  ObservabilityOptions observability;
};

/// Exit codes shared by the CLI.
enum ExitCode : int { kOk = 0, kCriterionFailed = 1, kUsage = 2, kIoError = 3, kSchemaError = 4 };

/// Configuration failure.  `code` is kUsage for a missing file, kIoError for
/// unreadable or malformed JSON and kSchemaError for schema or model
/// validation failures; `errors` lists "path: reason" entries.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int code, std::vector<std::string> errors);

  int code() const { return code_; }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  int code_;
  std::vector<std::string> errors_;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON of a resolved configuration (all fields, fixed key order).
nlohmann::ordered_json to_json(const RunConfig& config);

/// Content hash of to_json(config).
std::string config_fingerprint(const RunConfig& config);

struct RunManifest {
  std::string command;
  std::string fingerprint;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> files;
  nlohmann::ordered_json config;
};

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace tvlab

#endif  // TVLAB_CONFIG_HPP
