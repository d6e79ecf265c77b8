#include <cmath>
#include <numeric>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "shotlgcp/error.hpp"
#include "shotlgcp/sampler.hpp"

using namespace shotlgcp;

namespace {

const CovariateScheme kP3{CovariateEncoding::HomeStrongInteraction};

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

} // namespace

TEST_CASE("default step sizes") {
  SamplerConfig c;
  CHECK(c.intercept_step(15, 2) == doctest::Approx(0.03 / std::cbrt(45.0)));
  CHECK(c.beta_step(15, 2) == doctest::Approx(0.03 / std::cbrt(45.0)));
  c.step_rule = StepRule::Separate;
  CHECK(c.beta_step(15, 2) == doctest::Approx(0.03 / (15.0 * std::cbrt(3.0))));
  c.tau0_sq = 0.5;
  CHECK(c.intercept_step(15, 2) == 0.5);
}

TEST_CASE("sampler settings are validated") {
  SamplerConfig c;
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.tau0_sq = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.prior.d = -1.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("sigma0 conditional with zero coefficients") {
  const Eigen::VectorXd xi = Eigen::Vector3d(1.0, 0.5, 0.25);
  const auto ig = sigma0_conditional(Eigen::Vector3d::Zero(), 5.0, 5.0, xi);
  CHECK(ig.shape == 6.5);
  CHECK(ig.rate == 5.0);
  Rng rng(1);
  const int n = 100000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = gibbs_sigma0(Eigen::Vector3d::Zero(), 5.0, 5.0, xi, rng);
  const double target = 5.0 / (6.5 - 1.0);
  const double sd = target / std::sqrt(6.5 - 2.0); // IG standard deviation
  CHECK(std::abs(mean_of(draws) - target) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("doubling theta0 quadruples the rate increment") {
  const Eigen::VectorXd xi = Eigen::Vector3d(1.0, 0.5, 0.25);
  const Eigen::VectorXd theta = Eigen::Vector3d(0.3, -1.0, 0.2);
  const double base = sigma0_conditional(theta, 5, 5, xi).rate - 5.0;
  CHECK(sigma0_conditional(2.0 * theta, 5, 5, xi).rate - 5.0 == doctest::Approx(4.0 * base));
}

TEST_CASE("sigma_beta conditional") {
  const Eigen::VectorXd xi = Eigen::Vector3d(1.0, 0.5, 0.25);
  const std::array<Eigen::VectorXd, 2> zero{Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9)};
  const auto ig = sigma_beta_conditional(zero, 5.0, 5.0, xi);
  CHECK(ig.shape == 5.0 + 9.0);
  CHECK(ig.rate == 5.0);

  const Eigen::VectorXd b = Eigen::Vector3d(0.4, 0.1, -0.3);
  const auto same = sigma_beta_conditional({b, b}, 5.0, 5.0, xi);
  CHECK(same.rate - 5.0 == doctest::Approx(b.cwiseAbs2().cwiseQuotient(xi).sum()));
}

TEST_CASE("Gibbs draws follow the inverse-gamma CDF") {
  const Eigen::VectorXd xi = Eigen::Vector3d(0.9, 0.3, 0.3);
  const Eigen::VectorXd theta0 = Eigen::Vector3d(0.5, -0.4, 1.1);
  const std::array<Eigen::VectorXd, 2> beta{Eigen::VectorXd::LinSpaced(9, -1, 1), Eigen::VectorXd::LinSpaced(9, 0.5, -0.2)};
  Rng rng(99);
  const int n = 10000;
  std::vector<double> s0(n);
  std::vector<double> sb(n);
  for (int i = 0; i < n; ++i) {
    s0[i] = gibbs_sigma0(theta0, 5, 5, xi, rng);
    sb[i] = gibbs_sigma_beta(beta, 5, 5, xi, rng);
  }
  const auto ig0 = sigma0_conditional(theta0, 5, 5, xi);
  const auto igb = sigma_beta_conditional(beta, 5, 5, xi);
  const double d0 = oracle::ks_statistic(s0, [&](double x) { return oracle::inverse_gamma_cdf(x, ig0.shape, ig0.rate); });
  const double db = oracle::ks_statistic(sb, [&](double x) { return oracle::inverse_gamma_cdf(x, igb.shape, igb.rate); });
  CHECK(oracle::ks_pvalue(d0, n) > 0.01);
  CHECK(oracle::ks_pvalue(db, n) > 0.01);
}

TEST_CASE("tiny MALA steps are almost always accepted") {
  const BlockTarget target = [](const Eigen::VectorXd& x) {
    return LogDensityGradient{-0.5 * x.squaredNorm(), -x};
  };
  Rng rng(4);
  Eigen::VectorXd x = Eigen::Vector2d(0.3, -0.2);
  LogDensityGradient cur = target(x);
  BlockStats stats;
  for (int i = 0; i < 2000; ++i) mala_update(x, cur, target, 1e-8, rng, stats);
  CHECK(stats.rate() > 0.999);
}

TEST_CASE("MALA on a Gaussian target reproduces its mean and covariance") {
  const Eigen::VectorXd var = Eigen::Vector3d(1.0, 0.5, 0.2); // sigma^2 xi
  const BlockTarget target = [&](const Eigen::VectorXd& x) {
    return LogDensityGradient{-0.5 * x.cwiseAbs2().cwiseQuotient(var).sum(), -x.cwiseQuotient(var)};
  };
  Rng rng(12);
  Eigen::VectorXd x = Eigen::Vector3d::Zero();
  LogDensityGradient cur = target(x);
  BlockStats stats;
  const int n = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    mala_update(x, cur, target, 0.4, rng, stats);
    sum += x;
    sum_sq += x.cwiseAbs2();
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd second = sum_sq / n;
  // Autocorrelated draws: allow a generous effective sample size of n / 20.
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(mean[k]) < 4.0 * std::sqrt(var[k] / (n / 20.0)));
    CHECK(std::abs(second[k] - var[k]) < 4.0 * var[k] * std::sqrt(2.0 / (n / 20.0)));
  }
  CHECK(stats.rate() > 0.3);
}

TEST_CASE("non-finite proposals are rejected and counted") {
  const BlockTarget target = [](const Eigen::VectorXd& x) {
    if (x[0] > 0.0) return LogDensityGradient{std::nan(""), Eigen::VectorXd::Zero(1)};
    return LogDensityGradient{0.0, Eigen::VectorXd::Zero(1)};
  };
  Rng rng(3);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, -0.1);
  LogDensityGradient cur = target(x);
  BlockStats stats;
  for (int i = 0; i < 500; ++i) mala_update(x, cur, target, 1.0, rng, stats);
  CHECK(stats.nonfinite > 0);
  CHECK(x[0] <= 0.0);
}

TEST_CASE("least-squares start: identical games reduce to the one-game solve") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(2));
  Dataset data = fixture::random_dataset(1, 0, CovariateScheme{CovariateEncoding::Home}, 1);
  data.games[0].home = true;
  data.games[0].z = Eigen::VectorXd::Ones(1);
  data.games[0].shots = {{{0.1, 0.2}, ShotType::Made}, {{-0.5, 0.3}, ShotType::Made}, {{0.4, -0.6}, ShotType::Missed}};
  const GridSpec grid(data.region, 10, 10);
  const Eigen::VectorXd one = init_theta0(data, grid, basis);
  Dataset many = data;
  many.games.assign(4, data.games[0]);
  const Eigen::VectorXd four = init_theta0(many, grid, basis);
  CHECK(one.allFinite());
  CHECK((one - four).norm() < 1e-8 * std::max(1.0, one.norm()));
}

TEST_CASE("least-squares start handles empty types and single shots") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  Dataset data = fixture::random_dataset(3, 0, kP3, 2);
  data.games[1].shots = {{{0.2, 0.2}, ShotType::Made}};
  const GridSpec grid(data.region, 10, 10);
  CHECK(init_theta0(data, grid, basis).allFinite());
  CHECK(init_theta0_rate(data, grid, basis).allFinite());
}

TEST_CASE("chain bookkeeping") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const Dataset data = fixture::random_dataset(4, 5, kP3, 3);
  const GridSpec grid(data.region, 12, 12);
  SamplerConfig c;
  c.iterations = 41;
  c.burn_in = 40;
  const auto one = run_chain(data, basis, grid, c);
  CHECK(one.draws.size() == 1);
  CHECK(one.iterations.front() == 41);

  c.iterations = 60;
  c.burn_in = 20;
  c.thin = 4;
  const auto thinned = run_chain(data, basis, grid, c);
  CHECK(thinned.draws.size() == 10);
  for (Block b : kBlocks) {
    CHECK(thinned.acceptance[static_cast<int>(b)].proposed == 60);
    CHECK(thinned.acceptance[static_cast<int>(b)].accepted <= 60);
  }
}

TEST_CASE("a fixed seed reproduces the chain exactly") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const Dataset data = fixture::random_dataset(4, 6, kP3, 5);
  const GridSpec grid(data.region, 12, 12);
  SamplerConfig c;
  c.iterations = 150;
  c.burn_in = 50;
  c.seed = 77;
  const auto a = run_chain(data, basis, grid, c);
  const auto b = run_chain(data, basis, grid, c);
  std::ostringstream sa;
  std::ostringstream sb;
  write_samples_csv(a, sa);
  write_samples_csv(b, sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("parallel chains do not depend on the thread count") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const Dataset data = fixture::random_dataset(4, 6, kP3, 5);
  const GridSpec grid(data.region, 12, 12);
  SamplerConfig c;
  c.iterations = 120;
  c.burn_in = 20;
  const auto serial = run_chains(data, basis, grid, c, 3, 1);
  const auto parallel = run_chains(data, basis, grid, c, 3, 3);
  for (int k = 0; k < 3; ++k) {
    std::ostringstream a;
    std::ostringstream b;
    write_samples_csv(serial[k], a);
    write_samples_csv(parallel[k], b);
    CHECK(a.str() == b.str());
  }
  CHECK(serial[0].config.seed == c.seed);
  CHECK(serial[1].config.seed != c.seed);
}

TEST_CASE("two chains agree by the Gelman-Rubin statistic") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const Dataset data = fixture::random_dataset(8, 15, kP3, 21);
  const GridSpec grid(data.region, 16, 16);
  SamplerConfig c;
  c.iterations = 6000;
  c.burn_in = 2000;
  c.adapt = true;
  const auto chains = run_chains(data, basis, grid, c, 2, 2);
  std::vector<std::vector<double>> first(2);
  for (int k = 0; k < 2; ++k) {
    for (const auto& d : chains[k].draws) first[k].push_back(d.theta0[0]);
  }
  CHECK(gelman_rubin(first) < 1.1);
}

TEST_CASE("Gelman-Rubin flags chains stuck in different places") {
  std::vector<std::vector<double>> chains{std::vector<double>(100), std::vector<double>(100)};
  for (int i = 0; i < 100; ++i) {
    chains[0][i] = 0.01 * (i % 7);
    chains[1][i] = 5.0 + 0.01 * (i % 5);
  }
  CHECK(gelman_rubin(chains) > 2.0);
  CHECK_THROWS_AS(gelman_rubin({chains[0]}), ParameterError);
}

TEST_CASE("samples CSV and sampler settings round trip") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const Dataset data = fixture::random_dataset(4, 5, kP3, 3);
  const GridSpec grid(data.region, 12, 12);
  SamplerConfig c;
  c.iterations = 30;
  c.burn_in = 10;
  c.tau_beta_sq = 0.02;
  c.step_rule = StepRule::Separate;
  const auto s = run_chain(data, basis, grid, c);
  std::stringstream buf;
  write_samples_csv(s, buf);
  const auto back = read_samples_csv(buf, 3, 3);
  REQUIRE(back.draws.size() == s.draws.size());
  for (std::size_t d = 0; d < s.draws.size(); ++d) {
    CHECK(back.draws[d].coefficients() == s.draws[d].coefficients());
    CHECK(back.draws[d].sigma0_sq == s.draws[d].sigma0_sq);
    CHECK(back.iterations[d] == s.iterations[d]);
  }
  std::stringstream wrong(buf.str());
  wrong.seekg(0);
  CHECK_THROWS_AS(read_samples_csv(wrong, 4, 3), DimensionError);

  const SamplerConfig again = sampler_config_from_json(sampler_config_json(c));
  CHECK(again.iterations == c.iterations);
  CHECK(again.tau_beta_sq == c.tau_beta_sq);
  CHECK(!again.tau0_sq);
  CHECK(again.step_rule == StepRule::Separate);
}
