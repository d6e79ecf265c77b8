#include "shotlgcp/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

#include "shotlgcp/error.hpp"
#include "shotlgcp/shot_io.hpp"

namespace shotlgcp {

double rmse(const PointIntensity& estimate, const PointIntensity& truth, const Dataset& data) {
  double sum = 0.0;
  long n = 0;
  for (const auto& game : data.games) {
    for (const auto& shot : game.shots) {
      const double diff = estimate(game, shot.outcome, shot.location) -
                          truth(game, shot.outcome, shot.location);
      sum += diff * diff;
      ++n;
    }
  }
  if (n == 0) throw InputError("RMSE needs at least one observed shot");
  return std::sqrt(sum / static_cast<double>(n));
}

std::pair<Dataset, Dataset> p_thin_split(const Dataset& data, double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("thinning probability must lie in (0, 1)");
  Dataset train = data;
  Dataset test = data;
  std::bernoulli_distribution keep(p);
  for (std::size_t i = 0; i < data.games.size(); ++i) {
    train.games[i].shots.clear();
    test.games[i].shots.clear();
    for (const auto& shot : data.games[i].shots) {
      (keep(rng) ? train : test).games[i].shots.push_back(shot);
    }
  }
  return {std::move(train), std::move(test)};
}

void NpllOptions::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("thinning probability must lie in (0, 1)");
  if (regions_x < 1 || regions_y < 1) throw ParameterError("region partition must be nonempty");
  if (!(floor > 0.0)) throw ParameterError("intensity floor must be positive");
}

double poisson_nll(long k, double mu) {
  if (k < 0) throw InputError("negative count");
  if (!(mu > 0.0)) {
    if (mu == 0.0 && k == 0) return 0.0;
    throw ParameterError("Poisson mean must be positive");
  }
  return mu - static_cast<double>(k) * std::log(mu) + std::lgamma(static_cast<double>(k) + 1.0);
}

std::vector<int> region_of_cells(const GridSpec& grid, int regions_x, int regions_y) {
  std::vector<int> out(static_cast<std::size_t>(grid.cell_count()));
  const Region& r = grid.region;
  for (int h = 0; h < grid.cell_count(); ++h) {
    const Point2 c = grid.center(h);
    const int rx = std::clamp(static_cast<int>((c.x - r.x_min) / r.width() * regions_x), 0, regions_x - 1);
    const int ry = std::clamp(static_cast<int>((c.y - r.y_min) / r.height() * regions_y), 0, regions_y - 1);
    out[static_cast<std::size_t>(h)] = ry * regions_x + rx;
  }
  return out;
}

double npll(const CellIntensity& fit, const Dataset& test, const GridSpec& grid,
            const NpllOptions& options) {
  options.validate();
  if (!(grid.region == test.region)) {
    throw ParameterError("quadrature grid must cover the dataset region");
  }
  const int R = options.regions_x * options.regions_y;
  const auto cell_region = region_of_cells(grid, options.regions_x, options.regions_y);
  const Region& region = test.region;
  auto region_of_point = [&](Point2 s) {
    const int rx = std::clamp(static_cast<int>((s.x - region.x_min) / region.width() * options.regions_x),
                              0, options.regions_x - 1);
    const int ry = std::clamp(static_cast<int>((s.y - region.y_min) / region.height() * options.regions_y),
                              0, options.regions_y - 1);
    return ry * options.regions_x + rx;
  };
  const double thin_ratio = (1.0 - options.p) / options.p;

  double total = 0.0;
  for (const auto& game : test.games) {
    for (ShotType j : kShotTypes) {
      const Eigen::VectorXd lambda = fit(game, j);
      if (lambda.size() != grid.cell_count()) {
        throw DimensionError("fitted intensity does not match the quadrature grid");
      }
      std::vector<double> mass(static_cast<std::size_t>(R), 0.0);
      for (int h = 0; h < grid.cell_count(); ++h) {
        mass[static_cast<std::size_t>(cell_region[static_cast<std::size_t>(h)])] += lambda[h];
      }
      std::vector<long> counts(static_cast<std::size_t>(R), 0);
      for (const auto& shot : game.shots) {
        if (shot.outcome == j) ++counts[static_cast<std::size_t>(region_of_point(shot.location))];
      }
      for (int r = 0; r < R; ++r) {
        const double fitted = std::max(mass[static_cast<std::size_t>(r)] * grid.cell_area(), options.floor);
        total += poisson_nll(counts[static_cast<std::size_t>(r)], thin_ratio * fitted);
      }
    }
  }
  return total;
}

namespace {

struct CovariateKey {
  std::vector<double> z;
  int type;
  bool operator<(const CovariateKey& o) const { return std::tie(z, type) < std::tie(o.z, o.type); }
};

CovariateKey key_of(const GameRecord& game, ShotType j) {
  return {std::vector<double>(game.z.data(), game.z.data() + game.z.size()), index_of(j)};
}

} // namespace

CellIntensity posterior_cell_intensity(const PosteriorSamples& samples, const Basis& basis,
                                       const GridSpec& grid) {
  if (samples.draws.empty()) throw InputError("posterior intensity needs at least one draw");
  struct State {
    std::mutex mutex;
    std::map<CovariateKey, Eigen::VectorXd> cache;
    Eigen::MatrixXd phi;
  };
  auto state = std::make_shared<State>();
  const auto centers = grid.centers();
  state->phi = basis.evaluate(centers);
  auto draws = std::make_shared<const std::vector<ParamVector>>(samples.draws);
  return [state, draws](const GameRecord& game, ShotType j) {
    const auto key = key_of(game, j);
    std::lock_guard lock(state->mutex);
    auto it = state->cache.find(key);
    if (it != state->cache.end()) return it->second;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(state->phi.rows());
    for (const auto& theta : *draws) {
      sum += (state->phi * theta.effective_weights(game.z, j)).array().exp().matrix();
    }
    sum /= static_cast<double>(draws->size());
    state->cache.emplace(key, sum);
    return sum;
  };
}

PointIntensity posterior_point_intensity(const PosteriorSamples& samples, const Basis& basis) {
  if (samples.draws.empty()) throw InputError("posterior intensity needs at least one draw");
  auto draws = std::make_shared<const std::vector<ParamVector>>(samples.draws);
  return [draws, basis](const GameRecord& game, ShotType j, Point2 s) {
    const Eigen::RowVectorXd phi = basis.evaluate(s);
    double sum = 0.0;
    for (const auto& theta : *draws) sum += std::exp(phi.dot(theta.effective_weights(game.z, j)));
    return sum / static_cast<double>(draws->size());
  };
}

CellIntensity truth_cell_intensity(const TruthModel& truth, const GridSpec& grid, double scale) {
  const auto centers = grid.centers();
  Eigen::MatrixXd phi = truth.basis.evaluate(centers);
  ParamVector theta = truth.theta;
  return [phi = std::move(phi), theta = std::move(theta), scale](const GameRecord& game, ShotType j) {
    return Eigen::VectorXd(scale * (phi * theta.effective_weights(game.z, j)).array().exp());
  };
}

PointIntensity truth_point_intensity(const TruthModel& truth, double scale) {
  return [truth, scale](const GameRecord& game, ShotType j, Point2 s) {
    return scale * truth.intensity(game.z, j, s);
  };
}

namespace {

std::array<double, 2> uniform_rates(const Dataset& train) {
  if (train.games.empty()) throw DataError("uniform intensity needs at least one game");
  const double denom = static_cast<double>(train.games.size()) * train.region.area();
  return {static_cast<double>(train.total_shots(ShotType::Missed)) / denom,
          static_cast<double>(train.total_shots(ShotType::Made)) / denom};
}

} // namespace

CellIntensity uniform_cell_intensity(const Dataset& train, const GridSpec& grid) {
  const auto rates = uniform_rates(train);
  const int H = grid.cell_count();
  return [rates, H](const GameRecord&, ShotType j) {
    return Eigen::VectorXd::Constant(H, rates[static_cast<std::size_t>(index_of(j))]);
  };
}

PointIntensity uniform_point_intensity(const Dataset& train) {
  const auto rates = uniform_rates(train);
  return [rates](const GameRecord&, ShotType j, Point2) {
    return rates[static_cast<std::size_t>(index_of(j))];
  };
}

CellIntensity read_grid_exchange(std::istream& in, const GridSpec& grid, double scale) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("grid-exchange CSV is empty");
  auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::istringstream row(text);
    std::string field;
    while (std::getline(row, field, ',')) {
      while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
      fields.push_back(field);
    }
    // getline drops a trailing empty field
    if (!text.empty() && text.back() == ',') fields.emplace_back();
    return fields;
  };
  const auto header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"x", "y", "type", "value"}) {
    if (!col.contains(name)) throw DataError(std::string("grid-exchange CSV lacks column '") + name + "'");
  }
  const bool per_game = col.contains("game_id");

  using Key = std::pair<std::string, int>;
  auto grids = std::make_shared<std::map<Key, Eigen::VectorXd>>();
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() < header.size()) {
      throw DataError("grid-exchange line " + std::to_string(line_no) + " has too few fields");
    }
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    try {
      x = std::stod(f[col["x"]]);
      y = std::stod(f[col["y"]]);
      value = std::stod(f[col["value"]]);
    } catch (const std::exception&) {
      throw DataError("grid-exchange line " + std::to_string(line_no) + " has a bad number");
    }
    const std::string& type_text = f[col["type"]];
    int type = -1;
    if (type_text == "made" || type_text == "1") type = 1;
    if (type_text == "missed" || type_text == "0") type = 0;
    if (type < 0 || !(value >= 0.0) || !std::isfinite(value)) {
      throw DataError("grid-exchange line " + std::to_string(line_no) + " has a bad type or value");
    }
    const Point2 s{x, y};
    if (!grid.region.contains(s)) {
      throw DataError("grid-exchange line " + std::to_string(line_no) + " lies outside the region");
    }
    const Key key{per_game ? f[col["game_id"]] : std::string(), type};
    auto [it, inserted] = grids->try_emplace(key, Eigen::VectorXd::Zero(grid.cell_count()));
    it->second[grid.cell_of(s)] = scale * value;
  }
  return [grids](const GameRecord& game, ShotType j) {
    auto it = grids->find({game.game_id, index_of(j)});
    if (it == grids->end()) it = grids->find({std::string(), index_of(j)});
    if (it == grids->end()) {
      throw DataError("grid-exchange file has no intensity for game " + game.game_id);
    }
    return it->second;
  };
}

CellIntensity read_grid_exchange(const std::filesystem::path& path, const GridSpec& grid, double scale) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open grid-exchange file " + path.string());
  return read_grid_exchange(in, grid, scale);
}

void write_scores_csv(const std::vector<ScoreRow>& rows, std::ostream& out) {
  out << "method,seed,repetition,rmse,npll\n";
  for (const auto& row : rows) {
    out << row.method << ',' << row.seed << ',' << row.repetition << ',';
    if (row.rmse) out << format_double(*row.rmse);
    out << ',';
    if (row.npll) out << format_double(*row.npll);
    out << '\n';
  }
}

} // namespace shotlgcp
