#include "shotlgcp/sampler.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "shotlgcp/error.hpp"
#include "shotlgcp/shot_io.hpp"

namespace shotlgcp {

void SamplerConfig::validate() const {
  if (iterations < 1) throw ParameterError("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw ParameterError("burn_in must satisfy 0 <= burn_in < iterations");
  }
  if (thin < 1) throw ParameterError("thin must be >= 1");
  if ((tau0_sq && !(*tau0_sq > 0.0)) || (tau_beta_sq && !(*tau_beta_sq > 0.0))) {
    throw ParameterError("MALA step sizes must be positive");
  }
  if (!(prior.a_sigma > 0.0) || !(prior.b_sigma > 0.0) || !(prior.c > 0.0) || !(prior.d > 0.0)) {
    throw ParameterError("inverse-gamma hyperparameters must be positive");
  }
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ParameterError("target acceptance must lie in (0, 1)");
  }
}

double SamplerConfig::intercept_step(int basis_size, int p) const {
  if (tau0_sq) return *tau0_sq;
  return 0.03 / std::cbrt(static_cast<double>(basis_size) * (p + 1));
}

double SamplerConfig::beta_step(int basis_size, int p) const {
  if (tau_beta_sq) return *tau_beta_sq;
  if (step_rule == StepRule::Separate) {
    return 0.03 / (basis_size * std::cbrt(static_cast<double>(p + 1)));
  }
  return 0.03 / std::cbrt(static_cast<double>(basis_size) * (p + 1));
}

std::string init_rule_name(InitRule rule) {
  switch (rule) {
  case InitRule::Auto: return "auto";
  case InitRule::LeastSquares: return "least-squares";
  case InitRule::Rate: return "rate";
  }
  return "?";
}

InitRule parse_init_rule(const std::string& name) {
  for (InitRule r : {InitRule::Auto, InitRule::LeastSquares, InitRule::Rate}) {
    if (init_rule_name(r) == name) return r;
  }
  throw ConfigError("unknown init rule '" + name + "' (expected auto, least-squares or rate)");
}

namespace {

double log_proposal_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from_mean,
                            double tau_sq) {
  return -(to - from_mean).squaredNorm() / (2.0 * tau_sq);
}

} // namespace

bool mala_update(Eigen::VectorXd& x, LogDensityGradient& current, const BlockTarget& target,
                 double tau_sq, Rng& rng, BlockStats& stats) {
  ++stats.proposed;
  const double tau = std::sqrt(tau_sq);
  const Eigen::VectorXd forward_mean = x + 0.5 * tau_sq * current.gradient;
  const Eigen::VectorXd proposal = forward_mean + tau * standard_normal_vector(x.size(), rng);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);

  const LogDensityGradient next = target(proposal);
  if (!std::isfinite(next.value) || !next.gradient.allFinite()) {
    ++stats.nonfinite;
    return false;
  }
  const Eigen::VectorXd backward_mean = proposal + 0.5 * tau_sq * next.gradient;
  const double log_ratio = next.value + log_proposal_density(x, backward_mean, tau_sq) -
                           current.value - log_proposal_density(proposal, forward_mean, tau_sq);
  if (!std::isfinite(log_ratio)) {
    ++stats.nonfinite;
    return false;
  }
  if (std::log(u) < log_ratio) {
    x = proposal;
    current = next;
    ++stats.accepted;
    return true;
  }
  return false;
}

bool mala_step(ChainState& state, Block block, const LikelihoodContext& context) {
  const int b = static_cast<int>(block);
  if (!(state.tau_sq[b] > 0.0)) {
    throw ParameterError("MALA step size must be positive");
  }
  ParamVector work = state.theta;
  const BlockTarget target = [&](const Eigen::VectorXd& values) {
    set_block(work, block, values);
    auto eval = context.evaluate_block(work, block);
    return LogDensityGradient{eval.log_posterior, std::move(eval.gradient)};
  };
  Eigen::VectorXd x = block_values(state.theta, block);
  LogDensityGradient current = target(x);
  if (!std::isfinite(current.value) || !current.gradient.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite log posterior at iteration " << state.iteration << ", block "
        << block_name(block) << ", state " << x.transpose();
    throw NumericalError(msg.str());
  }
  const bool accepted = mala_update(x, current, target, state.tau_sq[b], state.rng, state.stats[b]);
  if (accepted) set_block(state.theta, block, x);
  return accepted;
}

InverseGamma sigma0_conditional(const Eigen::VectorXd& theta0, double a_sigma, double b_sigma,
                                const Eigen::VectorXd& xi) {
  return {a_sigma + 0.5 * static_cast<double>(theta0.size()),
          b_sigma + 0.5 * theta0.cwiseAbs2().cwiseQuotient(xi).sum()};
}

InverseGamma sigma_beta_conditional(const std::array<Eigen::VectorXd, 2>& theta_beta, double c,
                                    double d, const Eigen::VectorXd& xi) {
  const Eigen::Index L = xi.size();
  double quad = 0.0;
  Eigen::Index count = 0;
  for (const auto& beta : theta_beta) {
    if (beta.size() % L != 0) throw DimensionError("theta_beta length is not a multiple of L");
    for (Eigen::Index k = 0; k < beta.size() / L; ++k) {
      quad += beta.segment(k * L, L).cwiseAbs2().cwiseQuotient(xi).sum();
    }
    count += beta.size();
  }
  return {c + 0.5 * static_cast<double>(count), d + 0.5 * quad};
}

double gibbs_sigma0(const Eigen::VectorXd& theta0, double a_sigma, double b_sigma,
                    const Eigen::VectorXd& xi, Rng& rng) {
  const auto ig = sigma0_conditional(theta0, a_sigma, b_sigma, xi);
  return draw_inverse_gamma(ig.shape, ig.rate, rng);
}

double gibbs_sigma_beta(const std::array<Eigen::VectorXd, 2>& theta_beta, double c, double d,
                        const Eigen::VectorXd& xi, Rng& rng) {
  const auto ig = sigma_beta_conditional(theta_beta, c, d, xi);
  return draw_inverse_gamma(ig.shape, ig.rate, rng);
}

Eigen::VectorXd init_theta0(const Dataset& data, const GridSpec& grid, const Basis& basis) {
  const int L = basis.size();
  const Eigen::Index n = static_cast<Eigen::Index>(1 + 2 * data.p()) * L;
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double log_area = std::log(grid.cell_area());

  for (const auto& game : data.games) {
    std::array<Eigen::RowVectorXd, 2> phi_sum{Eigen::RowVectorXd::Zero(L), Eigen::RowVectorXd::Zero(L)};
    std::array<int, 2> counts{0, 0};
    for (const auto& shot : game.shots) {
      phi_sum[index_of(shot.outcome)] += basis.evaluate(shot.location);
      ++counts[index_of(shot.outcome)];
    }
    for (ShotType j : kShotTypes) {
      // design_row is linear in phi, so the summed row is the row of the sum.
      const Eigen::VectorXd row = design_row(phi_sum[index_of(j)], game.z, j);
      const double count = counts[index_of(j)] > 0 ? counts[index_of(j)] : 0.5;
      const double response = std::log(count) - log_area;
      normal.noalias() += row * row.transpose();
      rhs.noalias() += response * row;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  const bool singular = !(eig.eigenvalues().minCoeff() > 1e-12 * std::max(largest, 1e-300));
  // Relative to the largest eigenvalue, so replicating every game leaves
  // the start unchanged.
  if (singular) normal.diagonal().array() += 1e-6 * std::max(largest, 1e-300);
  const Eigen::VectorXd solution = normal.ldlt().solve(rhs);
  if (!solution.allFinite()) {
    throw NumericalError("initial least-squares solve produced non-finite values");
  }
  return solution.head(L);
}

Eigen::VectorXd init_theta0_rate(const Dataset& data, const GridSpec& grid, const Basis& basis) {
  if (data.games.empty()) throw DataError("initialization needs at least one game");
  const double shots = std::max(0.5, static_cast<double>(data.total_shots()));
  const double rate = shots / (2.0 * static_cast<double>(data.games.size()) * data.region.area());
  const auto centers = grid.centers();
  const Eigen::MatrixXd phi = basis.evaluate(centers);
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(phi.rows(), std::log(rate));
  Eigen::MatrixXd normal = phi.transpose() * phi;
  normal.diagonal().array() += 1e-6 * std::max(1.0, normal.diagonal().maxCoeff());
  return normal.ldlt().solve(phi.transpose() * target);
}

PosteriorSamples run_chain(const Dataset& data, const Basis& basis, const GridSpec& grid,
                           const SamplerConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const LikelihoodContext context(basis, data, grid);
  const int L = basis.size();
  const int p = data.p();
  const Eigen::VectorXd xi = basis.eigenvalues();
  const auto& prior = config.prior;

  ChainState state;
  state.rng.seed(config.seed);
  state.theta = ParamVector::zeros(L, p);
  switch (config.init) {
  case InitRule::LeastSquares: state.theta.theta0 = init_theta0(data, grid, basis); break;
  case InitRule::Rate: state.theta.theta0 = init_theta0_rate(data, grid, basis); break;
  case InitRule::Auto: {
    // Compared at unit hypervariances; only the data fit differs much.
    ParamVector a = state.theta;
    ParamVector b = state.theta;
    a.theta0 = init_theta0(data, grid, basis);
    b.theta0 = init_theta0_rate(data, grid, basis);
    const double la = context.log_posterior(a);
    const double lb = context.log_posterior(b);
    state.theta.theta0 = (std::isfinite(la) && la > lb) ? a.theta0 : b.theta0;
    break;
  }
  }
  state.theta.sigma0_sq = draw_inverse_gamma(prior.a_sigma, prior.b_sigma, state.rng);
  state.theta.sigma_beta_sq = draw_inverse_gamma(prior.c, prior.d, state.rng);
  state.tau_sq = {config.intercept_step(L, p), config.beta_step(L, p), config.beta_step(L, p)};

  PosteriorSamples out;
  out.basis_size = L;
  out.p = p;
  out.config = config;
  out.draws.reserve(static_cast<std::size_t>((config.iterations - config.burn_in) / config.thin));

  for (long v = 1; v <= config.iterations; ++v) {
    state.iteration = v;
    std::array<bool, 3> accepted{};
    accepted[0] = mala_step(state, Block::Intercept, context);
    state.theta.sigma0_sq = gibbs_sigma0(state.theta.theta0, prior.a_sigma, prior.b_sigma, xi, state.rng);
    accepted[1] = mala_step(state, Block::Missed, context);
    accepted[2] = mala_step(state, Block::Made, context);
    state.theta.sigma_beta_sq = gibbs_sigma_beta(state.theta.theta_beta, prior.c, prior.d, xi, state.rng);

    if (config.adapt && v <= config.burn_in) {
      const double gain = std::pow(static_cast<double>(v), -0.6);
      for (int b = 0; b < 3; ++b) {
        const double signal = (accepted[b] ? 1.0 : 0.0) - config.target_acceptance;
        state.tau_sq[b] *= std::exp(gain * signal);
      }
    }
    if (v > config.burn_in && (v - config.burn_in) % config.thin == 0) {
      out.draws.push_back(state.theta);
      out.iterations.push_back(v);
    }
  }

  out.acceptance = state.stats;
  out.final_step = state.tau_sq;
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<PosteriorSamples> run_chains(const Dataset& data, const Basis& basis,
                                         const GridSpec& grid, const SamplerConfig& config,
                                         int chains, int threads) {
  if (chains < 1) throw ParameterError("need at least one chain");
  std::vector<PosteriorSamples> out(chains);
  std::vector<std::exception_ptr> errors(chains);
  auto run_one = [&](int c) {
    try {
      SamplerConfig cfg = config;
      if (c > 0) cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(c), 0x636861696eULL);
      out[c] = run_chain(data, basis, grid, cfg);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const int workers = std::max(1, std::min(threads, chains));
  for (int first = 0; first < chains; first += workers) {
    std::vector<std::jthread> pool;
    for (int c = first; c < std::min(chains, first + workers); ++c) pool.emplace_back(run_one, c);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw ParameterError("Gelman-Rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw ParameterError("Gelman-Rubin needs at least two draws per chain");
  std::vector<double> means(m);
  double within = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    if (chains[c].size() != n) throw DimensionError("chains must have equal length");
    double mean = 0.0;
    for (double x : chains[c]) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : chains[c]) var += (x - mean) * (x - mean);
    within += var / static_cast<double>(n - 1);
    means[c] = mean;
  }
  within /= static_cast<double>(m);
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= static_cast<double>(m);
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= static_cast<double>(n) / static_cast<double>(m - 1);
  const double pooled = (static_cast<double>(n - 1) / n) * within + between / static_cast<double>(n);
  return std::sqrt(pooled / within);
}

void write_samples_csv(const PosteriorSamples& samples, std::ostream& out) {
  const int L = samples.basis_size;
  out << "iteration,sigma0_sq,sigma_beta_sq";
  for (int l = 1; l <= L; ++l) out << ",theta0_" << l;
  for (int j = 0; j < 2; ++j) {
    for (int k = 1; k <= samples.p; ++k) {
      for (int l = 1; l <= L; ++l) out << ",beta" << j << "_" << k << "_" << l;
    }
  }
  out << '\n';
  for (std::size_t d = 0; d < samples.draws.size(); ++d) {
    const auto& theta = samples.draws[d];
    out << samples.iterations[d] << ',' << format_double(theta.sigma0_sq) << ','
        << format_double(theta.sigma_beta_sq);
    const Eigen::VectorXd coef = theta.coefficients();
    for (Eigen::Index i = 0; i < coef.size(); ++i) out << ',' << format_double(coef[i]);
    out << '\n';
  }
}

PosteriorSamples read_samples_csv(std::istream& in, int basis_size, int p) {
  PosteriorSamples samples;
  samples.basis_size = basis_size;
  samples.p = p;
  std::string line;
  if (!std::getline(in, line)) throw DataError("samples CSV is empty");
  const Eigen::Index n_coef = static_cast<Eigen::Index>(1 + 2 * p) * basis_size;
  const auto expected = static_cast<std::size_t>(3 + n_coef);
  if (static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1 != expected) {
    throw DimensionError("samples CSV header does not match L = " + std::to_string(basis_size) +
                         ", p = " + std::to_string(p));
  }
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw DataError("samples CSV line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (values.size() != expected) {
      throw DataError("samples CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(values.size()) + " fields");
    }
    Eigen::VectorXd coef = Eigen::Map<Eigen::VectorXd>(values.data() + 3, n_coef);
    samples.iterations.push_back(static_cast<long>(values[0]));
    samples.draws.push_back(ParamVector::from_coefficients(coef, basis_size, p, values[1], values[2]));
  }
  return samples;
}

nlohmann::json sampler_config_json(const SamplerConfig& config) {
  nlohmann::json doc;
  doc["iterations"] = config.iterations;
  doc["burn_in"] = config.burn_in;
  doc["thin"] = config.thin;
  doc["tau0_sq"] = config.tau0_sq ? nlohmann::json(*config.tau0_sq) : nlohmann::json(nullptr);
  doc["tau_beta_sq"] = config.tau_beta_sq ? nlohmann::json(*config.tau_beta_sq) : nlohmann::json(nullptr);
  doc["step_rule"] = config.step_rule == StepRule::Joint ? "joint" : "separate";
  doc["init"] = init_rule_name(config.init);
  doc["prior"] = {{"a_sigma", config.prior.a_sigma},
                  {"b_sigma", config.prior.b_sigma},
                  {"c", config.prior.c},
                  {"d", config.prior.d}};
  doc["seed"] = config.seed;
  doc["adapt"] = config.adapt;
  doc["target_acceptance"] = config.target_acceptance;
  return doc;
}

SamplerConfig sampler_config_from_json(const nlohmann::json& doc) {
  try {
    SamplerConfig config;
    config.iterations = doc.at("iterations").get<int>();
    config.burn_in = doc.at("burn_in").get<int>();
    config.thin = doc.at("thin").get<int>();
    if (!doc.at("tau0_sq").is_null()) config.tau0_sq = doc.at("tau0_sq").get<double>();
    if (!doc.at("tau_beta_sq").is_null()) config.tau_beta_sq = doc.at("tau_beta_sq").get<double>();
    config.step_rule = doc.at("step_rule").get<std::string>() == "separate" ? StepRule::Separate
                                                                             : StepRule::Joint;
    config.init = parse_init_rule(doc.value("init", std::string("auto")));
    const auto& prior = doc.at("prior");
    config.prior = {prior.at("a_sigma").get<double>(), prior.at("b_sigma").get<double>(),
                    prior.at("c").get<double>(), prior.at("d").get<double>()};
    config.seed = doc.at("seed").get<std::uint64_t>();
    config.adapt = doc.at("adapt").get<bool>();
    config.target_acceptance = doc.at("target_acceptance").get<double>();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed sampler configuration: ") + e.what());
  }
}

nlohmann::json acceptance_json(const PosteriorSamples& samples) {
  nlohmann::json doc = nlohmann::json::object();
  for (Block b : kBlocks) {
    const auto& s = samples.acceptance[static_cast<int>(b)];
    doc[block_name(b)] = {{"proposed", s.proposed},
                          {"accepted", s.accepted},
                          {"nonfinite", s.nonfinite},
                          {"rate", s.rate()},
                          {"final_step", samples.final_step[static_cast<int>(b)]}};
  }
  return doc;
}

} // namespace shotlgcp
