#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "shotlgcp/data_model.hpp"
#include "shotlgcp/likelihood.hpp"
#include "shotlgcp/random.hpp"

namespace shotlgcp {

/// Two readings of the default beta step size:
///   Joint:    0.03 / [L (p + 1)]^{1/3}   (same as the intercept)
///   Separate: 0.03 / [L (p + 1)^{1/3}]
enum class StepRule { Joint, Separate };

/// Starting value of theta0:
///   LeastSquares: init_theta0 below.
///   Rate:         init_theta0_rate below.
///   Auto:         whichever of the two has the higher log posterior.
enum class InitRule { Auto, LeastSquares, Rate };

std::string init_rule_name(InitRule rule);
InitRule parse_init_rule(const std::string& name);

struct PriorHyper {
  double a_sigma = 5.0; // sigma0^2 ~ IG(a_sigma, b_sigma)
  double b_sigma = 5.0;
  double c = 5.0;       // sigma_beta^2 ~ IG(c, d)
  double d = 5.0;
};

struct SamplerConfig {
  int iterations = 15000;
  int burn_in = 10000;
  int thin = 1;
  std::optional<double> tau0_sq;     // overrides the default intercept step
  std::optional<double> tau_beta_sq; // overrides the default beta step
  StepRule step_rule = StepRule::Joint;
  InitRule init = InitRule::Auto;
  PriorHyper prior;
  std::uint64_t seed = 1;
  // Robbins-Monro tuning of each block's step during burn-in, frozen after.
  bool adapt = false;
  double target_acceptance = 0.574;

  void validate() const;
  double intercept_step(int basis_size, int p) const;
  double beta_step(int basis_size, int p) const;
};

struct BlockStats {
  long proposed = 0;
  long accepted = 0;
  long nonfinite = 0; // proposals rejected for a non-finite log density

  double rate() const { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed; }
};

struct ChainState {
  ParamVector theta;
  long iteration = 0;
  std::array<BlockStats, 3> stats{};
  std::array<double, 3> tau_sq{};
  Rng rng;
};

struct PosteriorSamples {
  int basis_size = 0;
  int p = 0;
  std::vector<ParamVector> draws;
  std::vector<long> iterations; // iteration index of each retained draw
  SamplerConfig config;
  std::array<BlockStats, 3> acceptance{};
  std::array<double, 3> final_step{};
  double runtime_seconds = 0.0;
};

struct LogDensityGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

using BlockTarget = std::function<LogDensityGradient(const Eigen::VectorXd&)>;

/// One Metropolis-adjusted Langevin update of `x` against `target`:
/// proposal N(x + tau_sq/2 grad, tau_sq I), accepted with the usual
/// Metropolis-Hastings ratio including both proposal densities. `current`
/// holds the target at x and is updated on acceptance. Returns whether the
/// proposal was accepted.
bool mala_update(Eigen::VectorXd& x, LogDensityGradient& current, const BlockTarget& target,
                 double tau_sq, Rng& rng, BlockStats& stats);

/// MALA update of one coefficient block of the chain state against its full
/// conditional; the other blocks and the hypervariances are held fixed.
bool mala_step(ChainState& state, Block block, const LikelihoodContext& context);

struct InverseGamma {
  double shape = 0.0;
  double rate = 0.0;
};

/// IG(a_sigma + L/2, b_sigma + theta0' Xi^{-1} theta0 / 2).
InverseGamma sigma0_conditional(const Eigen::VectorXd& theta0, double a_sigma, double b_sigma,
                                const Eigen::VectorXd& xi);

/// IG(c + pL, d + sum_{j,k} theta_beta_jk' Xi^{-1} theta_beta_jk / 2), conjugate
/// over all 2p coefficient functions.
InverseGamma sigma_beta_conditional(const std::array<Eigen::VectorXd, 2>& theta_beta, double c,
                                    double d, const Eigen::VectorXd& xi);

double gibbs_sigma0(const Eigen::VectorXd& theta0, double a_sigma, double b_sigma,
                    const Eigen::VectorXd& xi, Rng& rng);
double gibbs_sigma_beta(const std::array<Eigen::VectorXd, 2>& theta_beta, double c, double d,
                        const Eigen::VectorXd& xi, Rng& rng);

/// Least-squares start for theta0: regress log(m_ij / cell area) on the
/// summed design rows of each (game, type) and keep the intercept block.
/// Zero counts use a pseudo-count of 0.5; a singular system gets a ridge of
/// 1e-6 times its largest eigenvalue.
Eigen::VectorXd init_theta0(const Dataset& data, const GridSpec& grid, const Basis& basis);

/// Least-squares projection of the constant log rate log(n / (2 m |R|))
/// onto the basis over the grid cells, so the starting intensity has the
/// observed overall scale. With few shots per game the regression above can
/// start the chain at absurd intensities; this start cannot.
Eigen::VectorXd init_theta0_rate(const Dataset& data, const GridSpec& grid, const Basis& basis);

/// Full sampler. Sweep per iteration: theta0 MALA, sigma0^2 Gibbs,
/// theta_beta0 MALA, theta_beta1 MALA, sigma_beta^2 Gibbs.
PosteriorSamples run_chain(const Dataset& data, const Basis& basis, const GridSpec& grid,
                           const SamplerConfig& config);

/// Independent chains with seeds derived from config.seed; chain 0 uses
/// config.seed itself. Runs up to `threads` chains concurrently.
std::vector<PosteriorSamples> run_chains(const Dataset& data, const Basis& basis,
                                         const GridSpec& grid, const SamplerConfig& config,
                                         int chains, int threads = 1);

/// Potential scale reduction factor of a scalar over several chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

/// Columnar CSV, one row per retained draw.
void write_samples_csv(const PosteriorSamples& samples, std::ostream& out);
PosteriorSamples read_samples_csv(std::istream& in, int basis_size, int p);

nlohmann::json sampler_config_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const nlohmann::json& doc);
nlohmann::json acceptance_json(const PosteriorSamples& samples);

} // namespace shotlgcp
