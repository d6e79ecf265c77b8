#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shotlgcp/commands.hpp"
#include "shotlgcp/error.hpp"

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!field.empty()) out.push_back(std::stod(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  using namespace shotlgcp;
  CLI::App app{"Spatially varying log-Gaussian Cox process models for shot charts"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_data;
  std::string sim_truth;
  auto* simulate = app.add_subcommand("simulate", "Simulate a dataset from a scenario preset");
  simulate->add_option("-c,--config", sim.config, "Scenario config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--set", sim.overrides, "Override a config value, section.key=value");
  simulate->add_option("--data-out", sim_data, "Shot CSV to write (default output.data)");
  simulate->add_option("--truth-out", sim_truth, "Truth JSON to write (default output.truth)");
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Sample the posterior for a shot dataset");
  fit_cmd->add_option("-c,--config", fit.config, "Model and sampler config file")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("-d,--data", fit.data, "Shot CSV")->required();
  fit_cmd->add_option("-o,--out", fit.out_prefix, "Output prefix")->required();
  fit_cmd->add_option("--set", fit.overrides, "Override a config value, section.key=value");
  fit_cmd->add_option("--threads", fit.threads, "Chains run concurrently")->check(CLI::PositiveNumber);

  SummarizeOptions sum;
  std::string z_text;
  std::string za_text;
  std::string zb_text;
  int nx = 0;
  int ny = 0;
  auto* summarize = app.add_subcommand("summarize", "Posterior surface maps from a fit");
  summarize->add_option("-f,--fit", sum.fit, "Fit metadata JSON written by fit")->required()->check(CLI::ExistingFile);
  summarize->add_option("-k,--kind", sum.kind, "intensity, sqrt-intensity, density or relrisk")->required();
  summarize->add_option("--z", z_text, "Covariates, comma separated");
  summarize->add_option("--z-a", za_text, "Relative-risk numerator covariates");
  summarize->add_option("--z-b", zb_text, "Relative-risk denominator covariates");
  summarize->add_option("--type", sum.type, "made or missed (intensity kinds)");
  summarize->add_option("--ci", sum.ci_level, "Credible level for relative-risk flags");
  summarize->add_option("--nx", nx, "Grid cells along x (default: fit grid)");
  summarize->add_option("--ny", ny, "Grid cells along y (default: fit grid)");
  summarize->add_option("-o,--out", sum.out_prefix, "Output prefix")->required();

  EvaluateOptions eval;
  std::string eval_config;
  std::string eval_truth;
  auto* evaluate = app.add_subcommand("evaluate", "Score an intensity estimate");
  evaluate->add_option("-p,--protocol", eval.protocol, "rmse or npll")->required();
  evaluate->add_option("-d,--data", eval.data, "Shot CSV")->required();
  evaluate->add_option("-e,--estimator", eval.estimator, "fit:<json>, model:<json>, grid:<csv> or uniform")->required();
  evaluate->add_option("-c,--config", eval_config, "Config file (grid, regions, refit sampler)");
  evaluate->add_option("--set", eval.overrides, "Override a config value, section.key=value");
  evaluate->add_option("--truth", eval_truth, "Truth JSON (rmse)");
  evaluate->add_option("--reps", eval.repetitions, "Thinning repetitions (npll)");
  evaluate->add_option("--thin-p", eval.p, "Training retention probability (npll)");
  evaluate->add_option("--seed", eval.seed, "Seed for the splits");
  evaluate->add_flag("--reuse-fit", eval.reuse_fit, "Score the given fit on every split instead of refitting");
  evaluate->add_option("--scale", eval.scale, "Multiply the estimate by this factor");
  evaluate->add_option("--threads", eval.threads, "Chains run concurrently when refitting")->check(CLI::PositiveNumber);
  evaluate->add_option("-o,--out", eval.out, "Scores CSV")->required();

  BasisOptions basis;
  int basis_size = 0;
  double alpha = 0.0;
  auto* basis_cmd = app.add_subcommand("basis", "Print the truncated kernel eigenbasis");
  basis_cmd->add_option("-a", basis.a, "Kernel localization weight");
  basis_cmd->add_option("-b", basis.b, "Kernel bandwidth");
  basis_cmd->add_option("--size", basis_size, "Number of basis functions");
  basis_cmd->add_option("--alpha", alpha, "Variance fraction to retain (default 0.8)");
  basis_cmd->add_option("--domain", basis.domain, "court or square");
  std::string basis_out;
  basis_cmd->add_option("-o,--out", basis_out, "Write the basis JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  auto body = [&]() -> int {
    if (*simulate) {
      if (!sim_data.empty()) sim.data_out = sim_data;
      if (!sim_truth.empty()) sim.truth_out = sim_truth;
      return cmd_simulate(sim, std::cout);
    }
    if (*fit_cmd) return cmd_fit(fit, std::cout);
    if (*summarize) {
      try {
        sum.z = parse_numbers(z_text);
        sum.z_a = parse_numbers(za_text);
        sum.z_b = parse_numbers(zb_text);
      } catch (const std::exception&) {
        throw shotlgcp::ConfigError("covariates must be comma separated numbers");
      }
      if (nx > 0) sum.nx = nx;
      if (ny > 0) sum.ny = ny;
      return cmd_summarize(sum, std::cout);
    }
    if (*evaluate) {
      if (!eval_config.empty()) eval.config = eval_config;
      if (!eval_truth.empty()) eval.truth = eval_truth;
      return cmd_evaluate(eval, std::cout);
    }
    if (basis_size > 0) basis.size = basis_size;
    if (alpha > 0.0) basis.alpha = alpha;
    if (!basis_out.empty()) basis.out = basis_out;
    return cmd_basis(basis, std::cout);
  };
  return run_guarded(body, std::cerr);
}
