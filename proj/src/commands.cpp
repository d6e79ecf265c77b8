#include "shotlgcp/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "shotlgcp/error.hpp"
#include "shotlgcp/evaluation.hpp"
#include "shotlgcp/summaries.hpp"

namespace shotlgcp {

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InputError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "dimension mismatch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << '\n';
    return kExitUsage;
  }
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "data.encoding",       "data.region",          "data.filter",
      "data.max_distance",   "data.min_distance",    "data.policy",
      "basis.a",             "basis.b",              "basis.size",
      "basis.alpha",         "basis.domain",         "grid.nx",
      "grid.ny",             "sampler.iterations",   "sampler.burn_in",
      "sampler.thin",        "sampler.tau0_sq",      "sampler.tau_beta_sq",
      "sampler.step_rule",   "sampler.a_sigma",      "sampler.b_sigma",
      "sampler.c",           "sampler.d",            "sampler.seed",
      "sampler.adapt",       "sampler.target_acceptance", "sampler.chains", "sampler.init",
      "simulate.kind",       "simulate.games",       "simulate.seed",
      "simulate.theta_file", "simulate.a",           "simulate.b",
      "simulate.size",       "simulate.encoding",    "simulate.region",
      "simulate.envelope_nx", "simulate.envelope_ny", "simulate.safety",
      "output.data",         "output.truth",         "evaluate.regions_x",
      "evaluate.regions_y",  "evaluate.floor"};
  return keys;
}

Region region_from_name(const std::string& name) {
  if (name == "court") return Region::court();
  if (name == "square") return Region::standard_square();
  throw ConfigError("unknown region '" + name + "' (expected court or square)");
}

Basis basis_from_config(const Config& config, const Region& region) {
  const KernelParams params{config.get_double("basis.a", 0.25), config.get_double("basis.b", 1.5)};
  const std::string domain = config.get_string("basis.domain", "box");
  DomainMap map;
  if (domain == "box") {
    map = DomainMap::from_box(region);
  } else if (domain == "identity") {
    map = DomainMap::identity();
  } else {
    throw ConfigError("basis.domain must be box or identity");
  }
  if (config.has("basis.size") && config.has("basis.alpha")) {
    throw ConfigError("set only one of basis.size and basis.alpha");
  }
  if (config.has("basis.size")) {
    return build_basis_2d(params, BasisSelector::fixed(config.get_int("basis.size", 0)), map);
  }
  return build_basis_2d(params, BasisSelector::variance(config.get_double("basis.alpha", 0.8)), map);
}

GridSpec grid_from_config(const Config& config, const Region& region) {
  return GridSpec(region, config.get_int("grid.nx", 50), config.get_int("grid.ny", 35));
}

SamplerConfig sampler_from_config(const Config& config) {
  SamplerConfig s;
  s.iterations = config.get_int("sampler.iterations", s.iterations);
  s.burn_in = config.get_int("sampler.burn_in", s.burn_in);
  s.thin = config.get_int("sampler.thin", s.thin);
  s.tau0_sq = config.get_optional_double("sampler.tau0_sq");
  s.tau_beta_sq = config.get_optional_double("sampler.tau_beta_sq");
  const std::string rule = config.get_string("sampler.step_rule", "joint");
  if (rule == "joint") {
    s.step_rule = StepRule::Joint;
  } else if (rule == "separate") {
    s.step_rule = StepRule::Separate;
  } else {
    throw ConfigError("sampler.step_rule must be joint or separate");
  }
  s.init = parse_init_rule(config.get_string("sampler.init", "auto"));
  s.prior.a_sigma = config.get_double("sampler.a_sigma", s.prior.a_sigma);
  s.prior.b_sigma = config.get_double("sampler.b_sigma", s.prior.b_sigma);
  s.prior.c = config.get_double("sampler.c", s.prior.c);
  s.prior.d = config.get_double("sampler.d", s.prior.d);
  s.seed = config.get_seed("sampler.seed", s.seed);
  s.adapt = config.get_bool("sampler.adapt", s.adapt);
  s.target_acceptance = config.get_double("sampler.target_acceptance", s.target_acceptance);
  try {
    s.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("sampler: ") + e.what());
  }
  return s;
}

ScenarioConfig scenario_from_config(const Config& config) {
  ScenarioConfig s;
  s.kind = parse_scenario_kind(config.get_string("simulate.kind", "uniform-theta"));
  s.games = config.get_int("simulate.games", s.games);
  s.seed = config.get_seed("simulate.seed", s.seed);
  s.kernel = {config.get_double("simulate.a", 1.0), config.get_double("simulate.b", 1.0)};
  s.basis_size = config.get_int("simulate.size", s.basis_size);
  s.scheme = CovariateScheme::parse(config.get_string("simulate.encoding", "home*strong"));
  s.region = region_from_name(config.get_string("simulate.region", "square"));
  if (auto file = config.find("simulate.theta_file"); file && !file->empty()) s.theta_file = *file;
  s.envelope_nx = config.get_int("simulate.envelope_nx", s.envelope_nx);
  s.envelope_ny = config.get_int("simulate.envelope_ny", s.envelope_ny);
  s.safety = config.get_double("simulate.safety", s.safety);
  s.validate();
  return s;
}

FilterRules filter_from_config(const Config& config) {
  if (!config.get_bool("data.filter", true)) return FilterRules::none();
  FilterRules rules;
  rules.max_distance = config.get_double("data.max_distance", rules.max_distance);
  rules.min_distance = config.get_double("data.min_distance", rules.min_distance);
  return rules;
}

DatasetLoad load_configured_dataset(const std::filesystem::path& csv, const Config& config) {
  if (!std::filesystem::exists(csv)) throw DataError("data file " + csv.string() + " does not exist");
  const std::string policy_name = config.get_string("data.policy", "lenient");
  if (policy_name != "strict" && policy_name != "lenient") {
    throw ConfigError("data.policy must be strict or lenient");
  }
  const RowPolicy policy = policy_name == "strict" ? RowPolicy::Strict : RowPolicy::Lenient;

  std::optional<std::string> encoding = config.find("data.encoding");
  const auto side = sidecar_path_for(csv);
  if (!encoding && std::filesystem::exists(side)) {
    std::ifstream in(side);
    try {
      encoding = nlohmann::json::parse(in).at("encoding").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("cannot read encoding from " + side.string() + ": " + e.what());
    }
  }
  const auto scheme = CovariateScheme::parse(encoding.value_or("home+strong"));
  const Region region = region_from_name(config.get_string("data.region", "court"));
  return load_dataset(csv, region, scheme, filter_from_config(config), policy);
}

nlohmann::json run_metadata(const Config& config, std::uint64_t seed) {
  return {{"tool_version", kToolVersion}, {"config_hash", config.hash()}, {"seed", seed}};
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path() && !std::filesystem::exists(path.parent_path())) {
    throw ConfigError("output directory " + path.parent_path().string() + " does not exist");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Config build_config(const std::optional<std::filesystem::path>& path,
                    const std::vector<std::string>& overrides) {
  Config config = path ? Config::load(*path) : Config();
  for (const auto& o : overrides) config.set(o);
  config.check_keys(known_config_keys());
  return config;
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

nlohmann::json region_json(const Region& r) {
  return {{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

ParamVector posterior_mean(const PosteriorSamples& samples) {
  ParamVector mean = ParamVector::zeros(samples.basis_size, samples.p);
  mean.sigma0_sq = 0.0;
  mean.sigma_beta_sq = 0.0;
  for (const auto& d : samples.draws) {
    mean.theta0 += d.theta0;
    mean.theta_beta[0] += d.theta_beta[0];
    mean.theta_beta[1] += d.theta_beta[1];
    mean.sigma0_sq += d.sigma0_sq;
    mean.sigma_beta_sq += d.sigma_beta_sq;
  }
  const double n = static_cast<double>(samples.draws.size());
  mean.theta0 /= n;
  mean.theta_beta[0] /= n;
  mean.theta_beta[1] /= n;
  mean.sigma0_sq /= n;
  mean.sigma_beta_sq /= n;
  return mean;
}

std::vector<PosteriorSamples> fit_chains(const Dataset& data, const Basis& basis,
                                         const GridSpec& grid, const SamplerConfig& sampler,
                                         int chains, int threads) {
  return run_chains(data, basis, grid, sampler, chains, threads);
}

} // namespace

int cmd_simulate(const SimulateOptions& options, std::ostream& out) {
  const Config config = build_config(options.config, options.overrides);
  const ScenarioConfig scenario = scenario_from_config(config);
  const std::filesystem::path data_path =
      options.data_out ? *options.data_out : std::filesystem::path(config.require_string("output.data"));
  std::filesystem::path truth_path;
  if (options.truth_out) {
    truth_path = *options.truth_out;
  } else if (auto t = config.find("output.truth")) {
    truth_path = *t;
  } else {
    truth_path = data_path;
    truth_path.replace_extension(".truth.json");
  }

  auto [data, truth] = synthetic_scenario(scenario, options.threads);

  const auto meta = run_metadata(config, scenario.seed);
  {
    auto csv = open_output(data_path);
    write_shot_csv(data, csv);
    if (!csv) throw ConfigError("write failed for " + data_path.string());
  }
  auto sidecar = dataset_sidecar(data);
  sidecar["metadata"] = meta;
  write_json(sidecar_path_for(data_path), sidecar);
  auto truth_doc = truth.to_json();
  truth_doc["metadata"] = meta;
  truth_doc["scenario"] = scenario_name(scenario.kind);
  write_json(truth_path, truth_doc);

  out << "simulated " << data.games.size() << " games: " << data.total_shots(ShotType::Missed)
      << " missed, " << data.total_shots(ShotType::Made) << " made shots -> " << data_path.string()
      << ", " << truth_path.string() << '\n';
  return kExitOk;
}

int cmd_fit(const FitOptions& options, std::ostream& out) {
  Config config = build_config(options.config, options.overrides);
  const SamplerConfig sampler = sampler_from_config(config);
  const int chains = config.get_int("sampler.chains", 1);
  if (chains < 1) throw ConfigError("sampler.chains must be >= 1");

  const auto load = load_configured_dataset(options.data, config);
  for (const auto& r : load.rejected) {
    out << "rejected line " << r.line << ": " << r.reason << '\n';
  }
  const Dataset& data = load.data;
  const Basis basis = basis_from_config(config, data.region);
  const GridSpec grid = grid_from_config(config, data.region);

  const auto results = fit_chains(data, basis, grid, sampler, chains, options.threads);

  nlohmann::json chain_docs = nlohmann::json::array();
  double runtime = 0.0;
  for (int c = 0; c < chains; ++c) {
    const auto& samples = results[static_cast<std::size_t>(c)];
    const std::string suffix = c == 0 ? ".samples.csv" : ".chain" + std::to_string(c + 1) + ".samples.csv";
    const auto path = with_suffix(options.out_prefix, suffix);
    {
      auto csv = open_output(path);
      write_samples_csv(samples, csv);
      if (!csv) throw ConfigError("write failed for " + path.string());
    }
    chain_docs.push_back({{"samples", path.filename().string()},
                          {"seed", samples.config.seed},
                          {"draws", samples.draws.size()},
                          {"acceptance", acceptance_json(samples)}});
    runtime += samples.runtime_seconds;
  }

  nlohmann::json meta;
  meta["metadata"] = run_metadata(config, sampler.seed);
  meta["config"] = config.canonical();
  meta["data"] = {{"path", options.data.string()},
                  {"games", data.games.size()},
                  {"missed", data.total_shots(ShotType::Missed)},
                  {"made", data.total_shots(ShotType::Made)},
                  {"rejected_rows", load.rejected.size()}};
  meta["region"] = region_json(data.region);
  meta["encoding"] = data.scheme.name();
  meta["basis"] = basis.to_json();
  meta["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}};
  meta["sampler"] = sampler_config_json(sampler);
  meta["chains"] = chain_docs;
  if (chains > 1) {
    std::vector<std::vector<double>> sigma0(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c) {
      for (const auto& d : results[static_cast<std::size_t>(c)].draws) {
        sigma0[static_cast<std::size_t>(c)].push_back(d.sigma0_sq);
      }
    }
    if (sigma0.front().size() >= 2) meta["rhat_sigma0_sq"] = gelman_rubin(sigma0);
  }
  meta["runtime_seconds"] = runtime;
  write_json(with_suffix(options.out_prefix, ".fit.json"), meta);

  PosteriorSamples pooled = results.front();
  for (std::size_t c = 1; c < results.size(); ++c) {
    pooled.draws.insert(pooled.draws.end(), results[c].draws.begin(), results[c].draws.end());
  }
  TruthModel mean_model{basis, posterior_mean(pooled), data.region, data.scheme};
  auto mean_doc = mean_model.to_json();
  mean_doc["metadata"] = run_metadata(config, sampler.seed);
  write_json(with_suffix(options.out_prefix, ".mean.json"), mean_doc);

  out << "fit " << basis.size() << " basis functions, " << data.games.size() << " games, "
      << pooled.draws.size() << " retained draws; acceptance";
  for (Block b : kBlocks) {
    out << ' ' << block_name(b) << '=' << std::fixed << std::setprecision(3)
        << results.front().acceptance[static_cast<int>(b)].rate();
  }
  out << '\n';
  return kExitOk;
}

FitRecord load_fit(const std::filesystem::path& fit_json) {
  const auto doc = read_json(fit_json);
  try {
    FitRecord rec;
    rec.config = Config::parse("");
    {
      std::istringstream lines(doc.at("config").get<std::string>());
      std::string line;
      while (std::getline(lines, line)) {
        if (!line.empty()) rec.config.set(line);
      }
    }
    rec.basis = Basis::from_json(doc.at("basis"));
    const auto& r = doc.at("region");
    rec.region = {r.at("x_min").get<double>(), r.at("x_max").get<double>(),
                  r.at("y_min").get<double>(), r.at("y_max").get<double>()};
    rec.scheme = CovariateScheme::parse(doc.at("encoding").get<std::string>());
    rec.grid = GridSpec(rec.region, doc.at("grid").at("nx").get<int>(), doc.at("grid").at("ny").get<int>());
    const int p = rec.scheme.dimension();
    bool first = true;
    for (const auto& chain : doc.at("chains")) {
      const auto path = fit_json.parent_path() / chain.at("samples").get<std::string>();
      std::ifstream in(path);
      if (!in) throw DataError("cannot open samples file " + path.string());
      auto samples = read_samples_csv(in, rec.basis.size(), p);
      if (first) {
        rec.samples = std::move(samples);
        rec.samples.config = sampler_config_from_json(doc.at("sampler"));
        first = false;
      } else {
        rec.samples.draws.insert(rec.samples.draws.end(), samples.draws.begin(), samples.draws.end());
        rec.samples.iterations.insert(rec.samples.iterations.end(), samples.iterations.begin(),
                                      samples.iterations.end());
      }
    }
    if (first) throw DataError(fit_json.string() + " lists no chains");
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fit_json.string() + ": " + e.what());
  }
}

int cmd_summarize(const SummarizeOptions& options, std::ostream& out) {
  const SurfaceKind kind = parse_surface_kind(options.kind);
  const FitRecord fit = load_fit(options.fit);
  const GridSpec grid = (options.nx || options.ny)
                            ? GridSpec(fit.region, options.nx.value_or(fit.grid.nx),
                                       options.ny.value_or(fit.grid.ny))
                            : fit.grid;
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  if (options.type != "made" && options.type != "missed") {
    throw ConfigError("--type must be made or missed");
  }
  const ShotType type = options.type == "made" ? ShotType::Made : ShotType::Missed;

  SurfaceMap map;
  switch (kind) {
  case SurfaceKind::Intensity:
  case SurfaceKind::SqrtIntensity:
    map = intensity_map(fit.samples, fit.basis, to_vec(options.z), type, grid,
                        kind == SurfaceKind::SqrtIntensity);
    break;
  case SurfaceKind::Density:
    map = probability_density_map(fit.samples, fit.basis, to_vec(options.z), grid);
    break;
  case SurfaceKind::RelativeRisk:
    map = relative_risk_map(fit.samples, fit.basis, to_vec(options.z_a), to_vec(options.z_b), grid,
                            options.ci_level);
    break;
  }

  {
    const auto path = with_suffix(options.out_prefix, ".csv");
    auto csv = open_output(path);
    write_surface_csv(map, csv);
  }
  auto doc = surface_json(map);
  doc["metadata"] = run_metadata(fit.config, fit.samples.config.seed);
  doc["draws"] = fit.samples.draws.size();
  write_json(with_suffix(options.out_prefix, ".json"), doc);
  if (kind == SurfaceKind::RelativeRisk) {
    const auto lines = contour_lines(map, 1.0);
    write_json(with_suffix(options.out_prefix, ".contour.json"), contour_json(lines, 1.0));
    long above = 0;
    long below = 0;
    for (auto f : map.flags) {
      above += f == CellFlag::Above;
      below += f == CellFlag::Below;
    }
    out << "relative risk: " << above << " cells above 1, " << below << " below 1, "
        << lines.size() << " contour lines\n";
  } else {
    out << surface_kind_name(kind) << " surface over " << grid.cell_count() << " cells, "
        << fit.samples.draws.size() << " draws\n";
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  if (options.protocol != "rmse" && options.protocol != "npll") {
    throw ConfigError("protocol must be rmse or npll");
  }
  if (options.protocol == "rmse" && !options.truth) {
    throw ConfigError("the rmse protocol needs --truth");
  }
  if (options.repetitions < 1) throw ConfigError("repetitions must be >= 1");

  Config config = build_config(options.config, options.overrides);
  std::optional<FitRecord> fit;
  std::string method = options.estimator;
  std::string argument;
  if (auto colon = options.estimator.find(':'); colon != std::string::npos) {
    method = options.estimator.substr(0, colon);
    argument = options.estimator.substr(colon + 1);
  }
  if (method != "fit" && method != "model" && method != "grid" && method != "uniform") {
    throw ConfigError("estimator must be fit:<file>, model:<file>, grid:<file> or uniform");
  }
  if (method != "uniform" && argument.empty()) {
    throw ConfigError("estimator " + method + " needs a file argument");
  }
  if (method == "fit") {
    fit = load_fit(argument);
    if (!options.config) {
      for (const auto& [k, v] : fit->config.values()) {
        if (!config.has(k)) config.set(k, v);
      }
      for (const auto& o : options.overrides) config.set(o);
    }
  }

  const auto load = load_configured_dataset(options.data, config);
  const Dataset& data = load.data;
  const GridSpec grid = fit ? GridSpec(data.region, fit->grid.nx, fit->grid.ny)
                            : grid_from_config(config, data.region);
  std::optional<TruthModel> truth;
  if (options.truth) truth = TruthModel::load(*options.truth);

  std::vector<ScoreRow> rows;
  if (options.protocol == "rmse") {
    PointIntensity estimate;
    if (method == "fit") {
      estimate = posterior_point_intensity(fit->samples, fit->basis);
    } else if (method == "model") {
      estimate = truth_point_intensity(TruthModel::load(argument), options.scale);
    } else if (method == "uniform") {
      estimate = uniform_point_intensity(data);
    } else {
      auto cells = read_grid_exchange(std::filesystem::path(argument), grid, options.scale);
      estimate = [cells, grid](const GameRecord& g, ShotType j, Point2 s) {
        return cells(g, j)[grid.cell_of(s)];
      };
    }
    rows.push_back({method, options.seed, 0, rmse(estimate, truth_point_intensity(*truth), data), {}});
  } else {
    NpllOptions npll_options;
    npll_options.p = options.p;
    npll_options.regions_x = config.get_int("evaluate.regions_x", npll_options.regions_x);
    npll_options.regions_y = config.get_int("evaluate.regions_y", npll_options.regions_y);
    npll_options.floor = config.get_double("evaluate.floor", npll_options.floor);
    npll_options.validate();
    for (int rep = 0; rep < options.repetitions; ++rep) {
      const std::uint64_t split_seed = derive_seed(options.seed, static_cast<std::uint64_t>(rep), 0x6e706c6cULL);
      Rng rng(split_seed);
      auto [train, test] = p_thin_split(data, options.p, rng);
      CellIntensity fitted;
      if (method == "fit" && options.reuse_fit) {
        auto full = posterior_cell_intensity(fit->samples, fit->basis, grid);
        const double s = options.p * options.scale;
        fitted = [full, s](const GameRecord& g, ShotType j) { return Eigen::VectorXd(s * full(g, j)); };
      } else if (method == "fit") {
        SamplerConfig sampler = sampler_from_config(config);
        sampler.seed = derive_seed(sampler.seed, static_cast<std::uint64_t>(rep), 0x726566ULL);
        const int chains = config.get_int("sampler.chains", 1);
        const auto results = run_chains(train, fit->basis, grid, sampler, chains, options.threads);
        PosteriorSamples pooled = results.front();
        for (std::size_t c = 1; c < results.size(); ++c) {
          pooled.draws.insert(pooled.draws.end(), results[c].draws.begin(), results[c].draws.end());
        }
        auto refit = posterior_cell_intensity(pooled, fit->basis, grid);
        const double s = options.scale;
        fitted = [refit, s](const GameRecord& g, ShotType j) { return Eigen::VectorXd(s * refit(g, j)); };
      } else if (method == "model") {
        fitted = truth_cell_intensity(TruthModel::load(argument), grid, options.p * options.scale);
      } else if (method == "grid") {
        fitted = read_grid_exchange(std::filesystem::path(argument), grid, options.p * options.scale);
      } else {
        auto uniform = uniform_cell_intensity(train, grid);
        const double s = options.scale;
        fitted = [uniform, s](const GameRecord& g, ShotType j) { return Eigen::VectorXd(s * uniform(g, j)); };
      }
      ScoreRow row{method, split_seed, rep, {}, npll(fitted, test, grid, npll_options)};
      rows.push_back(row);
    }
  }

  {
    auto csv = open_output(options.out);
    write_scores_csv(rows, csv);
  }
  auto meta = run_metadata(config, options.seed);
  meta["protocol"] = options.protocol;
  meta["estimator"] = options.estimator;
  meta["p"] = options.p;
  meta["repetitions"] = rows.size();
  meta["reuse_fit"] = options.reuse_fit;
  meta["scale"] = options.scale;
  meta["intensity_floor"] = config.get_double("evaluate.floor", 1e-12);
  auto side = options.out;
  side.replace_extension(".json");
  write_json(side, meta);

  std::vector<double> scores;
  for (const auto& r : rows) scores.push_back(r.rmse ? *r.rmse : *r.npll);
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double sd = scores.size() > 1 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) : 0.0;
  out << options.protocol << ' ' << method << ": mean " << format_double(mean) << " +- "
      << format_double(sd) << " over " << scores.size() << " repetition"
      << (scores.size() == 1 ? "" : "s") << '\n';
  return kExitOk;
}

int cmd_basis(const BasisOptions& options, std::ostream& out) {
  if (options.size && options.alpha) throw ConfigError("give only one of --size and --alpha");
  const KernelParams params{options.a, options.b};
  DomainMap map;
  if (options.domain == "court") {
    map = DomainMap::from_box(Region::court());
  } else if (options.domain == "square") {
    map = DomainMap::identity();
  } else {
    throw ConfigError("--domain must be court or square");
  }
  const BasisSelector selector =
      options.size ? BasisSelector::fixed(*options.size) : BasisSelector::variance(options.alpha.value_or(0.8));
  const Basis basis = build_basis_2d(params, selector, map);
  const auto doc = basis.to_json();
  if (options.out) {
    write_json(*options.out, doc);
    out << "L = " << basis.size() << ", recovery " << format_double(basis.recovery()) << '\n';
  } else {
    out << doc.dump(2) << '\n';
  }
  return kExitOk;
}

} // namespace shotlgcp
