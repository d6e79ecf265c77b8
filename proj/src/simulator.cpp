#include "shotlgcp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "shotlgcp/error.hpp"

namespace shotlgcp {

std::vector<Point2> sample_ppp(const LogIntensityFn& log_lambda, const GridSpec& envelope, Rng& rng,
                               double safety) {
  if (!(safety >= 1.0)) throw ParameterError("envelope safety factor must be >= 1");
  const Region& region = envelope.region;
  double lambda_max = 0.0;
  for (int h = 0; h < envelope.cell_count(); ++h) {
    const double value = std::exp(log_lambda(envelope.center(h)));
    if (std::isnan(value) || std::isinf(value)) {
      throw NumericalError("intensity is not finite on the envelope grid");
    }
    lambda_max = std::max(lambda_max, value);
  }
  lambda_max *= safety;
  std::vector<Point2> points;
  if (lambda_max == 0.0) return points;

  std::poisson_distribution<long> count_dist(lambda_max * region.area());
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uy(region.y_min, region.y_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const long n = count_dist(rng);
  for (long t = 0; t < n; ++t) {
    const Point2 s{ux(rng), uy(rng)};
    const double u = u01(rng);
    const double value = std::exp(log_lambda(s));
    if (!(value <= lambda_max)) {
      throw NumericalError("intensity " + std::to_string(value) + " exceeds the envelope " +
                           std::to_string(lambda_max) + "; raise the safety factor");
    }
    if (u * lambda_max < value) points.push_back(s);
  }
  return points;
}

double TruthModel::log_intensity(const Eigen::VectorXd& z, ShotType j, Point2 s) const {
  return basis.evaluate(s).dot(theta.effective_weights(z, j));
}

namespace {

nlohmann::json region_json(const Region& r) {
  return {{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

Region region_from_json(const nlohmann::json& doc) {
  Region r{doc.at("x_min").get<double>(), doc.at("x_max").get<double>(),
           doc.at("y_min").get<double>(), doc.at("y_max").get<double>()};
  r.validate();
  return r;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

nlohmann::json TruthModel::to_json() const {
  nlohmann::json doc;
  doc["basis"] = basis.to_json();
  doc["region"] = region_json(region);
  doc["encoding"] = scheme.name();
  doc["theta"] = {{"theta0", to_std(theta.theta0)},
                  {"theta_beta0", to_std(theta.theta_beta[0])},
                  {"theta_beta1", to_std(theta.theta_beta[1])},
                  {"sigma0_sq", theta.sigma0_sq},
                  {"sigma_beta_sq", theta.sigma_beta_sq}};
  return doc;
}

TruthModel TruthModel::from_json(const nlohmann::json& doc) {
  try {
    TruthModel truth;
    truth.basis = Basis::from_json(doc.at("basis"));
    truth.region = region_from_json(doc.at("region"));
    truth.scheme = CovariateScheme::parse(doc.at("encoding").get<std::string>());
    const auto& t = doc.at("theta");
    truth.theta.theta0 = from_std(t.at("theta0").get<std::vector<double>>());
    truth.theta.theta_beta[0] = from_std(t.at("theta_beta0").get<std::vector<double>>());
    truth.theta.theta_beta[1] = from_std(t.at("theta_beta1").get<std::vector<double>>());
    truth.theta.sigma0_sq = t.at("sigma0_sq").get<double>();
    truth.theta.sigma_beta_sq = t.at("sigma_beta_sq").get<double>();
    truth.theta.validate();
    if (truth.theta.basis_size() != truth.basis.size() || truth.theta.p() != truth.scheme.dimension()) {
      throw DimensionError("truth coefficients do not match the basis size and encoding");
    }
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed truth document: ") + e.what());
  }
}

TruthModel TruthModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coefficient file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "uniform-theta") return ScenarioKind::UniformTheta;
  if (name == "fitted-theta") return ScenarioKind::FittedTheta;
  throw ConfigError("unknown scenario kind '" + name + "' (expected uniform-theta or fitted-theta)");
}

std::string scenario_name(ScenarioKind kind) {
  return kind == ScenarioKind::UniformTheta ? "uniform-theta" : "fitted-theta";
}

void ScenarioConfig::validate() const {
  if (games < 4 || games % 4 != 0) {
    throw ConfigError("scenario game count must be a positive multiple of 4 (balanced design)");
  }
  if (kind == ScenarioKind::FittedTheta && !theta_file && !theta_override) {
    throw ConfigError("fitted-theta scenario needs a coefficient file");
  }
  if (kind == ScenarioKind::UniformTheta) {
    kernel.validate();
    if (basis_size < 1) throw ConfigError("basis size must be >= 1");
  }
  if (envelope_nx < 1 || envelope_ny < 1) throw ConfigError("envelope grid must be nonempty");
  region.validate();
}

ParamVector uniform_theta(int basis_size, int p, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParamVector theta = ParamVector::zeros(basis_size, p);
  for (auto& v : theta.theta0) v = u(rng);
  for (auto& block : theta.theta_beta) {
    for (auto& v : block) v = u(rng);
  }
  return theta;
}

std::vector<GameInfo> balanced_games(int count) {
  std::vector<GameInfo> games;
  games.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "g%04d", i + 1);
    games.push_back({id, i % 2 == 0, (i / 2) % 2 == 0});
  }
  return games;
}

Dataset simulate_dataset(const TruthModel& truth, std::span<const GameInfo> games,
                         std::uint64_t seed, const GridSpec& envelope, double safety, int threads) {
  if (!(envelope.region == truth.region)) {
    throw ParameterError("envelope grid must cover the truth region");
  }
  Dataset data;
  data.region = truth.region;
  data.scheme = truth.scheme;
  data.filter = FilterRules::none();
  data.games.resize(games.size());

  auto simulate_game = [&](std::size_t i) {
    GameRecord& game = data.games[i];
    game.game_id = games[i].game_id;
    game.home = games[i].home;
    game.strong = games[i].strong;
    game.z = encode_covariates(game.home, game.strong, truth.scheme);
    for (ShotType j : kShotTypes) {
      const Eigen::VectorXd w = truth.theta.effective_weights(game.z, j);
      Rng rng(derive_seed(seed, i, static_cast<std::uint64_t>(index_of(j))));
      const auto points = sample_ppp(
          [&](Point2 s) { return truth.basis.evaluate(s).dot(w); }, envelope, rng, safety);
      for (const auto& s : points) game.shots.push_back({s, j});
    }
  };

  const std::size_t n = games.size();
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) simulate_game(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < n; i += workers) simulate_game(i);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return data;
}

TruthModel scenario_truth(const ScenarioConfig& config) {
  config.validate();
  TruthModel truth;
  if (config.kind == ScenarioKind::FittedTheta && config.theta_file) {
    truth = TruthModel::load(*config.theta_file);
  } else {
    truth.region = config.region;
    truth.scheme = config.scheme;
    truth.basis = build_basis_2d(config.kernel, BasisSelector::fixed(config.basis_size),
                                 DomainMap::from_box(config.region));
    Rng rng(derive_seed(config.seed, 0x7468657461ULL));
    truth.theta = uniform_theta(config.basis_size, config.scheme.dimension(), rng);
  }
  if (config.theta_override) {
    if (config.theta_override->basis_size() != truth.basis.size() ||
        config.theta_override->p() != truth.scheme.dimension()) {
      throw DimensionError("coefficient override does not match the scenario basis");
    }
    truth.theta = *config.theta_override;
  }
  return truth;
}

std::pair<Dataset, TruthModel> synthetic_scenario(const ScenarioConfig& config, int threads) {
  TruthModel truth = scenario_truth(config);
  const GridSpec envelope(truth.region, config.envelope_nx, config.envelope_ny);
  const auto games = balanced_games(config.games);
  Dataset data = simulate_dataset(truth, games, config.seed, envelope, config.safety, threads);
  return {std::move(data), std::move(truth)};
}

} // namespace shotlgcp
