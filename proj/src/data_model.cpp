#include "shotlgcp/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "shotlgcp/error.hpp"

namespace shotlgcp {

void Region::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(area())) {
    throw ParameterError("region must have positive finite extent");
  }
}

int CovariateScheme::dimension() const {
  switch (encoding) {
  case CovariateEncoding::Home: return 1;
  case CovariateEncoding::HomeStrong: return 2;
  case CovariateEncoding::HomeStrongInteraction: return 3;
  }
  return 0;
}

std::string CovariateScheme::name() const {
  switch (encoding) {
  case CovariateEncoding::Home: return "home";
  case CovariateEncoding::HomeStrong: return "home+strong";
  case CovariateEncoding::HomeStrongInteraction: return "home*strong";
  }
  return {};
}

CovariateScheme CovariateScheme::parse(const std::string& name) {
  if (name == "home") return {CovariateEncoding::Home};
  if (name == "home+strong") return {CovariateEncoding::HomeStrong};
  if (name == "home*strong") return {CovariateEncoding::HomeStrongInteraction};
  throw ConfigError("unknown covariate encoding '" + name +
                    "' (expected home, home+strong or home*strong)");
}

Eigen::VectorXd encode_covariates(bool home, bool strong, const CovariateScheme& scheme) {
  const double h = home ? 1.0 : 0.0;
  const double s = strong ? 1.0 : 0.0;
  switch (scheme.encoding) {
  case CovariateEncoding::Home: return Eigen::VectorXd::Constant(1, h);
  case CovariateEncoding::HomeStrong: return Eigen::Vector2d(h, s);
  case CovariateEncoding::HomeStrongInteraction: return Eigen::Vector3d(h, s, h * s);
  }
  return {};
}

int GameRecord::count(ShotType j) const {
  return static_cast<int>(
      std::count_if(shots.begin(), shots.end(), [j](const ShotEvent& e) { return e.outcome == j; }));
}

long Dataset::total_shots() const {
  long n = 0;
  for (const auto& g : games) n += static_cast<long>(g.shots.size());
  return n;
}

long Dataset::total_shots(ShotType j) const {
  long n = 0;
  for (const auto& g : games) n += g.count(j);
  return n;
}

void Dataset::validate() const {
  region.validate();
  for (const auto& g : games) {
    if (g.z.size() != p()) {
      throw DimensionError("game " + g.game_id + " has " + std::to_string(g.z.size()) +
                           " covariates, scheme expects " + std::to_string(p()));
    }
    for (const auto& shot : g.shots) {
      if (!is_finite(shot.location) || !region.contains(shot.location)) {
        throw DataError("game " + g.game_id + " has a shot outside the region");
      }
    }
  }
}

GridSpec::GridSpec(Region r, int cells_x, int cells_y) : region(r), nx(cells_x), ny(cells_y) {
  region.validate();
  if (nx < 1 || ny < 1) {
    throw ParameterError("grid needs at least one cell per axis");
  }
}

Point2 GridSpec::center(int h) const {
  const int ix = h % nx;
  const int iy = h / nx;
  return {region.x_min + (ix + 0.5) * cell_width(), region.y_min + (iy + 0.5) * cell_height()};
}

std::vector<Point2> GridSpec::centers() const {
  std::vector<Point2> out(cell_count());
  for (int h = 0; h < cell_count(); ++h) out[h] = center(h);
  return out;
}

int GridSpec::cell_of(Point2 p) const {
  const int ix = std::clamp(static_cast<int>(std::floor((p.x - region.x_min) / cell_width())), 0, nx - 1);
  const int iy = std::clamp(static_cast<int>(std::floor((p.y - region.y_min) / cell_height())), 0, ny - 1);
  return iy * nx + ix;
}

ParamVector ParamVector::zeros(int basis_size, int p) {
  ParamVector theta;
  theta.theta0 = Eigen::VectorXd::Zero(basis_size);
  theta.theta_beta[0] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p) * basis_size);
  theta.theta_beta[1] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p) * basis_size);
  return theta;
}

int ParamVector::p() const {
  return basis_size() == 0 ? 0 : static_cast<int>(theta_beta[0].size() / basis_size());
}

Eigen::Index ParamVector::coefficient_count() const {
  return theta0.size() + theta_beta[0].size() + theta_beta[1].size();
}

Eigen::VectorXd ParamVector::effective_weights(const Eigen::VectorXd& z, ShotType j) const {
  const int L = basis_size();
  if (z.size() != p()) {
    throw DimensionError("covariate vector has length " + std::to_string(z.size()) +
                         ", parameters expect " + std::to_string(p()));
  }
  Eigen::VectorXd w = theta0;
  const auto& beta = theta_beta[index_of(j)];
  for (int k = 0; k < z.size(); ++k) {
    w.noalias() += z[k] * beta.segment(static_cast<Eigen::Index>(k) * L, L);
  }
  return w;
}

Eigen::VectorXd ParamVector::coefficients() const {
  Eigen::VectorXd coef(coefficient_count());
  coef << theta0, theta_beta[0], theta_beta[1];
  return coef;
}

ParamVector ParamVector::from_coefficients(const Eigen::VectorXd& coef, int basis_size, int p,
                                           double sigma0_sq, double sigma_beta_sq) {
  const Eigen::Index block = static_cast<Eigen::Index>(p) * basis_size;
  if (coef.size() != basis_size + 2 * block) {
    throw DimensionError("coefficient vector length " + std::to_string(coef.size()) +
                         " does not match (1 + 2p) L = " + std::to_string(basis_size + 2 * block));
  }
  ParamVector theta;
  theta.theta0 = coef.head(basis_size);
  theta.theta_beta[0] = coef.segment(basis_size, block);
  theta.theta_beta[1] = coef.segment(basis_size + block, block);
  theta.sigma0_sq = sigma0_sq;
  theta.sigma_beta_sq = sigma_beta_sq;
  return theta;
}

void ParamVector::validate() const {
  const int L = basis_size();
  if (L == 0 || theta_beta[0].size() != theta_beta[1].size() || theta_beta[0].size() % L != 0) {
    throw DimensionError("parameter blocks have inconsistent lengths");
  }
  if (!(sigma0_sq > 0.0) || !(sigma_beta_sq > 0.0)) {
    throw ParameterError("hypervariances must be positive");
  }
}

Eigen::VectorXd design_row(const Eigen::RowVectorXd& phi, const Eigen::VectorXd& z, ShotType j) {
  const Eigen::Index L = phi.size();
  const Eigen::Index p = z.size();
  Eigen::VectorXd row = Eigen::VectorXd::Zero((1 + 2 * p) * L);
  row.head(L) = phi.transpose();
  const Eigen::Index offset = L + index_of(j) * p * L;
  for (Eigen::Index k = 0; k < p; ++k) {
    row.segment(offset + k * L, L) = z[k] * phi.transpose();
  }
  return row;
}

Eigen::VectorXd design_row(const Basis& basis, const Eigen::VectorXd& z, ShotType j, Point2 s) {
  return design_row(basis.evaluate(s), z, j);
}

Dataset filter_shots(std::span<const RawShot> shots, const Region& region,
                     const CovariateScheme& scheme, const FilterRules& rules,
                     std::span<const GameInfo> games, long malformed_rows) {
  Dataset data;
  data.region = region;
  data.scheme = scheme;
  data.provenance.malformed = malformed_rows;
  data.filter = rules;

  std::unordered_map<std::string, std::size_t> index;
  auto game_for = [&](const std::string& id, bool home, bool strong) -> GameRecord& {
    auto [it, inserted] = index.try_emplace(id, data.games.size());
    if (inserted) {
      GameRecord g;
      g.game_id = id;
      g.home = home;
      g.strong = strong;
      g.z = encode_covariates(home, strong, scheme);
      data.games.push_back(std::move(g));
    } else {
      const auto& g = data.games[it->second];
      if (g.home != home || g.strong != strong) {
        throw DataError("game " + id + " has inconsistent covariate flags");
      }
    }
    return data.games[it->second];
  };

  for (const auto& info : games) {
    game_for(info.game_id, info.home, info.strong);
  }
  for (const auto& shot : shots) {
    auto& game = game_for(shot.game_id, shot.home, shot.strong);
    if (rules.apply_distance) {
      const double d = shot.distance.value_or(std::hypot(shot.location.x - rules.basket.x,
                                                         shot.location.y - rules.basket.y));
      if (d > rules.max_distance) {
        ++data.provenance.too_far;
        continue;
      }
      if (d < rules.min_distance) {
        ++data.provenance.too_close;
        continue;
      }
    }
    if (!region.contains(shot.location)) {
      ++data.provenance.outside_region;
      continue;
    }
    game.shots.push_back({shot.location, shot.outcome});
  }
  return data;
}

std::vector<RawShot> to_raw_shots(const Dataset& data) {
  std::vector<RawShot> raw;
  raw.reserve(static_cast<std::size_t>(data.total_shots()));
  for (const auto& g : data.games) {
    for (const auto& s : g.shots) {
      raw.push_back({g.game_id, s.location, s.outcome, g.home, g.strong, std::nullopt});
    }
  }
  return raw;
}

std::vector<GameInfo> game_infos(const Dataset& data) {
  std::vector<GameInfo> infos;
  infos.reserve(data.games.size());
  for (const auto& g : data.games) infos.push_back({g.game_id, g.home, g.strong});
  return infos;
}

Dataset filter_shots(const Dataset& data, const FilterRules& rules) {
  const auto raw = to_raw_shots(data);
  const auto infos = game_infos(data);
  Dataset out = filter_shots(raw, data.region, data.scheme, rules, infos, data.provenance.malformed);
  out.provenance.too_far += data.provenance.too_far;
  out.provenance.too_close += data.provenance.too_close;
  out.provenance.outside_region += data.provenance.outside_region;
  return out;
}

} // namespace shotlgcp
