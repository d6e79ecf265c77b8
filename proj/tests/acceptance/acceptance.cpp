// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "shotlgcp/evaluation.hpp"
#include "shotlgcp/kernel_basis.hpp"
#include "shotlgcp/likelihood.hpp"
#include "shotlgcp/random.hpp"
#include "shotlgcp/sampler.hpp"
#include "shotlgcp/simulator.hpp"
#include "shotlgcp/summaries.hpp"

using namespace shotlgcp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

const CovariateScheme kP3{CovariateEncoding::HomeStrongInteraction};

// m games on the standard square, uniform shot locations, balanced flags.
Dataset uniform_games(int m, int shots, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset data;
  data.region = Region::standard_square();
  data.scheme = kP3;
  data.filter = FilterRules::none();
  for (const auto& info : balanced_games(m)) {
    GameRecord g{info.game_id, info.home, info.strong, encode_covariates(info.home, info.strong, kP3), {}};
    for (int t = 0; t < shots; ++t) {
      g.shots.push_back({{u(rng), u(rng)}, t % 2 == 0 ? ShotType::Made : ShotType::Missed});
    }
    data.games.push_back(std::move(g));
  }
  return data;
}

Outcome gradients() {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  Dataset data = uniform_games(4, 12, 1);
  data.games.pop_back(); // m = 3
  const GridSpec grid(data.region, 30, 30);
  const LikelihoodContext ctx(basis, data, grid);
  Rng rng(2);
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    ParamVector theta = ParamVector::zeros(3, 3);
    const Eigen::VectorXd coef = 0.5 * standard_normal_vector(theta.coefficient_count(), rng);
    theta = ParamVector::from_coefficients(coef, 3, 3, 0.8, 1.2);
    for (Block b : kBlocks) {
      auto f = [&](const Eigen::VectorXd& x) {
        ParamVector t = theta;
        set_block(t, b, x);
        return ctx.log_posterior(t);
      };
      const Eigen::VectorXd numeric = oracle::finite_difference(f, block_values(theta, b), 1e-5);
      const Eigen::VectorXd analytic = ctx.grad_block(theta, b);
      for (Eigen::Index i = 0; i < numeric.size(); ++i) {
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::abs(numeric[i]));
      }
    }
  }
  return {worst < 1e-4, fmt("max relative error %.2e over 5 draws x 3 blocks", worst)};
}

Outcome gibbs() {
  Rng rng(3);
  const Basis basis = build_basis_2d({0.25, 1.5}, BasisSelector::variance(0.8));
  const int L = basis.size();
  const Eigen::VectorXd xi = basis.eigenvalues();
  const Eigen::VectorXd theta0 = standard_normal_vector(L, rng).cwiseProduct(xi.cwiseSqrt());
  const std::array<Eigen::VectorXd, 2> beta{0.7 * standard_normal_vector(2 * L, rng),
                                            0.7 * standard_normal_vector(2 * L, rng)};
  const PriorHyper h;
  const int n = 10000;
  std::vector<double> s0(n);
  std::vector<double> sb(n);
  for (int i = 0; i < n; ++i) {
    s0[i] = gibbs_sigma0(theta0, h.a_sigma, h.b_sigma, xi, rng);
    sb[i] = gibbs_sigma_beta(beta, h.c, h.d, xi, rng);
  }
  const auto ig0 = sigma0_conditional(theta0, h.a_sigma, h.b_sigma, xi);
  const auto igb = sigma_beta_conditional(beta, h.c, h.d, xi);
  const double p0 = oracle::ks_pvalue(
      oracle::ks_statistic(s0, [&](double x) { return oracle::inverse_gamma_cdf(x, ig0.shape, ig0.rate); }), n);
  const double pb = oracle::ks_pvalue(
      oracle::ks_statistic(sb, [&](double x) { return oracle::inverse_gamma_cdf(x, igb.shape, igb.rate); }), n);
  return {p0 > 0.01 && pb > 0.01, fmt("KS p-values sigma0^2 %.3f, sigma_beta^2 %.3f", p0, pb)};
}

Outcome spectrum() {
  double worst = 0.0;
  for (const KernelParams p : {KernelParams{1.0, 1.0}, KernelParams{0.25, 1.5}}) {
    const auto analytic = eigen_1d(p, 10);
    const auto numeric = oracle::nystrom_eigenvalues(p, 512, 10);
    for (int k = 0; k < 10; ++k) {
      worst = std::max(worst, std::abs(analytic[k].eigenvalue - numeric[k]) / numeric[k]);
    }
  }
  const Basis basis = build_basis_2d({0.25, 1.5}, BasisSelector::variance(0.8));
  return {worst < 1e-3 && basis.size() == 15,
          fmt("top-10 relative error %.2e; L = %d at alpha 0.8 (recovery %.4f)", worst, basis.size(),
              basis.recovery())};
}

Outcome simulator() {
  const Region unit{0.0, 1.0, 0.0, 1.0};
  const GridSpec envelope(unit, 10, 10);
  Rng rng(4);
  const int reps = 1000;
  std::vector<double> counts;
  std::vector<long> cells(100, 0);
  for (int r = 0; r < reps; ++r) {
    const auto pts = sample_ppp([](Point2) { return std::log(100.0); }, envelope, rng);
    counts.push_back(static_cast<double>(pts.size()));
    for (const auto& p : pts) ++cells[static_cast<std::size_t>(envelope.cell_of(p))];
  }
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / reps;
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double se = std::sqrt(ss / (reps - 1) / reps);
  const double total = std::accumulate(cells.begin(), cells.end(), 0.0);
  double chi2 = 0.0;
  for (long c : cells) chi2 += (c - total / 100) * (c - total / 100) / (total / 100);
  const double pval = oracle::chi_square_sf(chi2, 99.0);
  const double z = (mean - 100.0) / se;
  return {std::abs(z) < 3.0 && pval > 0.01,
          fmt("mean count %.3f (%.2f SE from 100); 10x10 cell chi-square p = %.3f", mean, z, pval)};
}

// Posterior-mean log intensity on the grid for every (z, j) pair.
std::vector<double> pooled_log_surfaces(const std::vector<ParamVector>& draws, const Eigen::MatrixXd& phi) {
  std::vector<double> out;
  for (int cell = 0; cell < 4; ++cell) {
    const Eigen::VectorXd z = encode_covariates(cell / 2 == 0, cell % 2 == 0, kP3);
    for (ShotType j : kShotTypes) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(phi.rows());
      for (const auto& theta : draws) mean += phi * theta.effective_weights(z, j);
      mean /= static_cast<double>(draws.size());
      out.insert(out.end(), mean.data(), mean.data() + mean.size());
    }
  }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome recovery() {
  int correlated = 0;
  int better = 0;
  double min_r = 1.0;
  std::string acceptance;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioConfig scenario; // a = b = 1, L = 3, interaction coding, m = 200
    scenario.seed = seed;
    const auto [data, truth] = synthetic_scenario(scenario);
    const GridSpec grid(truth.region, 40, 40);
    SamplerConfig sampler;
    sampler.iterations = 3000;
    sampler.burn_in = 1500;
    sampler.seed = derive_seed(seed, 0x666974);
    // The fixed default step is too coarse for these intensities (up to ~20
    // shots per game): on most seeds theta0 never moves. Burn-in adaptation
    // picks a smaller step, which is then frozen for the retained draws.
    sampler.adapt = true;
    const auto samples = run_chain(data, truth.basis, grid, sampler);

    const auto centers = grid.centers();
    const Eigen::MatrixXd phi = truth.basis.evaluate(centers);
    const double r = pearson(pooled_log_surfaces(samples.draws, phi), pooled_log_surfaces({truth.theta}, phi));
    min_r = std::min(min_r, r);
    correlated += r > 0.9;

    const auto reference = truth_point_intensity(truth);
    const double fitted = rmse(posterior_point_intensity(samples, truth.basis), reference, data);
    const double baseline = rmse(uniform_point_intensity(data), reference, data);
    better += fitted < baseline;
    if (seed == 1) {
      acceptance = fmt("seed 1 acceptance %.2f/%.2f/%.2f with adapted steps", samples.acceptance[0].rate(),
                       samples.acceptance[1].rate(), samples.acceptance[2].rate());
    }
  }
  return {correlated == 20 && better >= 18,
          fmt("r > 0.9 on %d/20 seeds (min %.3f); RMSE beats baseline on %d/20; %s", correlated, min_r, better,
              acceptance.c_str())};
}

Outcome relative_risk() {
  const Basis basis = build_basis_2d({0.25, 1.5}, BasisSelector::variance(0.8), DomainMap::from_box(Region::court()));
  const GridSpec grid = GridSpec::court_default();
  const CovariateScheme scheme{CovariateEncoding::HomeStrong};
  Rng rng(6);
  PosteriorSamples samples;
  samples.basis_size = basis.size();
  samples.p = 2;
  for (int d = 0; d < 200; ++d) {
    const Eigen::VectorXd coef = standard_normal_vector(5 * basis.size(), rng);
    samples.draws.push_back(ParamVector::from_coefficients(coef, basis.size(), 2, 1.0, 1.0));
  }
  const auto centers = grid.centers();
  const Eigen::MatrixXd phi = basis.evaluate(centers);
  bool identity = true;
  double worst_product = 0.0;
  double worst_sum = 0.0;
  for (int a = 0; a < 4; ++a) {
    const Eigen::VectorXd za = encode_covariates(a / 2 == 0, a % 2 == 0, scheme);
    identity = identity && (relative_risk_map(samples, basis, za, za, grid).values.array() == 1.0).all();
    worst_sum = std::max(worst_sum, std::abs(probability_density_map(samples, basis, za, grid).values.sum() - 1.0));
    for (int b = 0; b < 4; ++b) {
      const Eigen::VectorXd zb = encode_covariates(b / 2 == 0, b % 2 == 0, scheme);
      for (const auto& theta : samples.draws) {
        const Eigen::VectorXd ab = relative_risk_draw(theta, phi, grid.cell_area(), za, zb);
        const Eigen::VectorXd ba = relative_risk_draw(theta, phi, grid.cell_area(), zb, za);
        worst_product = std::max(worst_product, (ab.cwiseProduct(ba).array() - 1.0).abs().maxCoeff());
      }
    }
  }
  return {identity && worst_product < 1e-12 && worst_sum < 1e-10,
          fmt("RR(a,a) == 1 exactly: %s; max |RR(a,b) RR(b,a) - 1| = %.1e; max |sum density - 1| = %.1e",
              identity ? "yes" : "no", worst_product, worst_sum)};
}

Outcome npll_protocol() {
  ScenarioConfig scenario;
  scenario.seed = 5;
  const auto [data, truth] = synthetic_scenario(scenario);
  const GridSpec grid(truth.region, 40, 40);
  NpllOptions options; // p = 0.8, 20 x 20 regions
  int wins = 0;
  double sum_truth = 0.0;
  double sum_scaled = 0.0;
  double sum_uniform = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Rng rng(derive_seed(scenario.seed, static_cast<std::uint64_t>(rep), 0x6e706c6c));
    const auto [train, test] = p_thin_split(data, options.p, rng);
    const double t = npll(truth_cell_intensity(truth, grid, options.p), test, grid, options);
    const double x4 = npll(truth_cell_intensity(truth, grid, 4.0 * options.p), test, grid, options);
    const double u = npll(uniform_cell_intensity(train, grid), test, grid, options);
    wins += t < x4 && t < u;
    sum_truth += t;
    sum_scaled += x4;
    sum_uniform += u;
  }
  const bool lower_mean = sum_truth < sum_scaled && sum_truth < sum_uniform;
  return {wins >= 9 && lower_mean, fmt("truth wins %d/10; mean NPLL truth %.1f, x4 %.1f, uniform %.1f", wins,
                                       sum_truth / 10, sum_scaled / 10, sum_uniform / 10)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("shotlgcp_accept_" + std::to_string(::getpid()));
  const char* ini = "[simulate]\nkind = uniform-theta\ngames = 8\nseed = 9\nencoding = home*strong\nregion = square\n"
                    "[data]\nencoding = home*strong\nregion = square\nfilter = false\n"
                    "[basis]\na = 1\nb = 1\nsize = 3\n[grid]\nnx = 20\nny = 20\n"
                    "[sampler]\niterations = 300\nburn_in = 100\nseed = 4\nchains = 2\n";
  const std::vector<std::string> outputs{"d.csv", "d.json", "d.truth.json", "fit.samples.csv",
                                         "fit.chain2.samples.csv", "fit.mean.json"};
  std::vector<std::vector<std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    std::ofstream(dir / "run.ini") << ini;
    const std::string cmd = "cd '" + dir.string() + "' && '" SHOTLGCP_CLI_PATH
                            "' simulate -c run.ini --data-out d.csv >log 2>&1 && '" SHOTLGCP_CLI_PATH
                            "' fit -c run.ini -d d.csv -o fit >>log 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      fs::remove_all(root);
      return {false, "CLI run failed"};
    }
    std::vector<std::string> bytes;
    for (const auto& name : outputs) bytes.push_back(slurp(dir / name));
    runs.push_back(std::move(bytes));
  }
  fs::remove_all(root);
  int identical = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) identical += !runs[0][i].empty() && runs[0][i] == runs[1][i];
  return {identical == static_cast<int>(outputs.size()),
          fmt("%d/%zu primary outputs byte-identical across reruns", identical, outputs.size())};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 10, gradients},
      {2, "conjugate conditionals", 5, gibbs},
      {3, "kernel spectrum", 10, spectrum},
      {4, "simulator calibration", 30, simulator},
      {5, "synthetic recovery", 600, recovery},
      {6, "relative-risk identities", 5, relative_risk},
      {7, "NPLL protocol", 120, npll_protocol},
      {8, "determinism", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %d (%s): %s [%.2f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  return failed;
}
