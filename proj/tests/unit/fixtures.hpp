#pragma once

#include <random>
#include <string>

#include "shotlgcp/data_model.hpp"
#include "shotlgcp/random.hpp"

namespace fixture {

/// m games on the standard square with uniformly placed shots and random
/// (home, strong) flags; `shots` shots per game, alternating outcome.
inline shotlgcp::Dataset random_dataset(int m, int shots, const shotlgcp::CovariateScheme& scheme,
                                        std::uint64_t seed) {
  using namespace shotlgcp;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution flag(0.5);
  Dataset data;
  data.region = Region::standard_square();
  data.scheme = scheme;
  data.filter = FilterRules::none();
  for (int i = 0; i < m; ++i) {
    GameRecord g;
    g.game_id = "g" + std::to_string(i);
    g.home = flag(rng);
    g.strong = flag(rng);
    g.z = encode_covariates(g.home, g.strong, scheme);
    for (int t = 0; t < shots; ++t) {
      g.shots.push_back({{u(rng), u(rng)}, t % 2 == 0 ? ShotType::Made : ShotType::Missed});
    }
    data.games.push_back(std::move(g));
  }
  return data;
}

inline shotlgcp::ParamVector random_theta(int L, int p, double scale, std::uint64_t seed) {
  shotlgcp::Rng rng(seed);
  std::normal_distribution<double> n01;
  auto theta = shotlgcp::ParamVector::zeros(L, p);
  for (auto& v : theta.theta0) v = scale * n01(rng);
  for (auto& b : theta.theta_beta) {
    for (auto& v : b) v = scale * n01(rng);
  }
  theta.sigma0_sq = 0.7;
  theta.sigma_beta_sq = 1.3;
  return theta;
}

} // namespace fixture
