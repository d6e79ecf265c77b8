#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shotlgcp/config.hpp"
#include "shotlgcp/data_model.hpp"
#include "shotlgcp/kernel_basis.hpp"
#include "shotlgcp/sampler.hpp"
#include "shotlgcp/shot_io.hpp"
#include "shotlgcp/simulator.hpp"

namespace shotlgcp {

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumerical = 4 };

/// Runs `body`, reporting a library exception on `err` and translating it
/// to an exit code: configuration, parameter and dimension problems give 2,
/// data problems 3, numerical failures 4.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Every key the commands understand, for Config::check_keys.
const std::set<std::string>& known_config_keys();

// Builders from configuration. Defaults reproduce the half-court analysis.
Region region_from_name(const std::string& name);
Basis basis_from_config(const Config& config, const Region& region);
GridSpec grid_from_config(const Config& config, const Region& region);
SamplerConfig sampler_from_config(const Config& config);
ScenarioConfig scenario_from_config(const Config& config);
FilterRules filter_from_config(const Config& config);

/// Loads the shot CSV named by `csv`; a sidecar next to it fixes the region,
/// filter and encoding, and data.encoding in the config must agree with it.
DatasetLoad load_configured_dataset(const std::filesystem::path& csv, const Config& config);

nlohmann::json run_metadata(const Config& config, std::uint64_t seed);

struct SimulateOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> data_out;
  std::optional<std::filesystem::path> truth_out;
  int threads = 1;
};

struct FitOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::filesystem::path data;
  std::filesystem::path out_prefix;
  int threads = 1;
};

struct SummarizeOptions {
  std::filesystem::path fit;
  std::string kind;
  std::vector<double> z;
  std::vector<double> z_a;
  std::vector<double> z_b;
  std::string type = "made";
  double ci_level = 0.90;
  std::optional<int> nx;
  std::optional<int> ny;
  std::filesystem::path out_prefix;
};

struct EvaluateOptions {
  std::string protocol;
  std::filesystem::path data;
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;
  // fit:<fit json>, model:<truth-format json>, grid:<grid-exchange csv>, uniform
  std::string estimator;
  std::optional<std::filesystem::path> truth;
  int repetitions = 10;
  double p = 0.8;
  std::uint64_t seed = 1;
  bool reuse_fit = false;
  double scale = 1.0;
  std::filesystem::path out;
  int threads = 1;
};

struct BasisOptions {
  double a = 0.25;
  double b = 1.5;
  std::optional<int> size;
  std::optional<double> alpha;
  std::string domain = "court";
  std::optional<std::filesystem::path> out;
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out);
int cmd_fit(const FitOptions& options, std::ostream& out);
int cmd_summarize(const SummarizeOptions& options, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out);
int cmd_basis(const BasisOptions& options, std::ostream& out);

/// Everything needed to reuse a finished fit.
struct FitRecord {
  Basis basis;
  GridSpec grid;
  Region region;
  CovariateScheme scheme;
  PosteriorSamples samples; // draws of every chain, pooled
  Config config;
};

FitRecord load_fit(const std::filesystem::path& fit_json);

} // namespace shotlgcp
