#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shotlgcp/data_model.hpp"
#include "shotlgcp/kernel_basis.hpp"
#include "shotlgcp/random.hpp"

namespace shotlgcp {

using LogIntensityFn = std::function<double(Point2)>;

/// Inhomogeneous Poisson process on envelope.region by thinning. The
/// envelope is the largest intensity over the grid cell centers times
/// `safety`; a candidate whose intensity exceeds it raises NumericalError.
/// A log intensity of -infinity everywhere yields an empty pattern.
std::vector<Point2> sample_ppp(const LogIntensityFn& log_lambda, const GridSpec& envelope, Rng& rng,
                               double safety = 1.2);

/// Generating model of a synthetic dataset.
struct TruthModel {
  Basis basis;
  ParamVector theta;
  Region region;
  CovariateScheme scheme;

  double log_intensity(const Eigen::VectorXd& z, ShotType j, Point2 s) const;
  double intensity(const Eigen::VectorXd& z, ShotType j, Point2 s) const {
    return std::exp(log_intensity(z, j, s));
  }

  nlohmann::json to_json() const;
  static TruthModel from_json(const nlohmann::json& doc);
  static TruthModel load(const std::filesystem::path& path);
};

enum class ScenarioKind { UniformTheta, FittedTheta };

ScenarioKind parse_scenario_kind(const std::string& name);
std::string scenario_name(ScenarioKind kind);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::UniformTheta;
  int games = 200;
  std::uint64_t seed = 1;
  // uniform-theta only
  KernelParams kernel{1.0, 1.0};
  int basis_size = 3;
  CovariateScheme scheme{CovariateEncoding::HomeStrongInteraction};
  Region region = Region::standard_square();
  // fitted-theta only: a truth JSON (basis, theta, region, encoding)
  std::optional<std::filesystem::path> theta_file;
  // replaces the generated coefficients when set
  std::optional<ParamVector> theta_override;
  int envelope_nx = 40;
  int envelope_ny = 40;
  double safety = 1.2;

  void validate() const;
};

/// Coefficients of the uniform-theta preset: every entry iid U[-1, 1].
ParamVector uniform_theta(int basis_size, int p, Rng& rng);

/// Game i gets (home, strong) = (i % 2 == 0, (i / 2) % 2 == 0), cycling
/// through the four covariate cells, and id "g0001", "g0002", ...
std::vector<GameInfo> balanced_games(int count);

/// Simulates the shots of every game from the truth. Game i, type j uses the
/// stream derive_seed(seed, i, j), so the result does not depend on
/// `threads`.
Dataset simulate_dataset(const TruthModel& truth, std::span<const GameInfo> games,
                         std::uint64_t seed, const GridSpec& envelope, double safety = 1.2,
                         int threads = 1);

TruthModel scenario_truth(const ScenarioConfig& config);
std::pair<Dataset, TruthModel> synthetic_scenario(const ScenarioConfig& config, int threads = 1);

} // namespace shotlgcp
