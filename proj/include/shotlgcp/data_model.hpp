#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shotlgcp/geometry.hpp"
#include "shotlgcp/kernel_basis.hpp"

namespace shotlgcp {

enum class ShotType : int { Missed = 0, Made = 1 };

inline constexpr std::array<ShotType, 2> kShotTypes{ShotType::Missed, ShotType::Made};

inline int index_of(ShotType j) { return static_cast<int>(j); }

struct ShotEvent {
  Point2 location;
  ShotType outcome = ShotType::Missed;
};

/// How the (home, strong) game flags become the covariate vector z.
enum class CovariateEncoding {
  Home,                  // p = 1: (home)
  HomeStrong,            // p = 2: (home, strong)
  HomeStrongInteraction, // p = 3: (home, strong, home * strong)
};

struct CovariateScheme {
  CovariateEncoding encoding = CovariateEncoding::HomeStrong;

  int dimension() const;
  std::string name() const;
  /// Accepts "home", "home+strong" and "home*strong".
  static CovariateScheme parse(const std::string& name);

  friend bool operator==(const CovariateScheme&, const CovariateScheme&) = default;
};

/// 0/1 indicator coding.
Eigen::VectorXd encode_covariates(bool home, bool strong, const CovariateScheme& scheme);

struct GameRecord {
  std::string game_id;
  bool home = false;
  bool strong = false;
  Eigen::VectorXd z;
  std::vector<ShotEvent> shots;

  int count(ShotType j) const;
};

/// How many raw rows each rule removed while building a Dataset.
struct FilterCounts {
  long too_far = 0;
  long too_close = 0;
  long outside_region = 0;
  long malformed = 0;

  friend bool operator==(const FilterCounts&, const FilterCounts&) = default;
};

/// Distance filter applied to raw shots; distances are measured from the
/// basket in region coordinates.
struct FilterRules {
  bool apply_distance = true;
  double max_distance = 28.0;
  double min_distance = 1.0;
  Point2 basket{0.0, 0.0};

  static FilterRules none() { return FilterRules{false}; }

  friend bool operator==(const FilterRules&, const FilterRules&) = default;
};

struct Dataset {
  std::vector<GameRecord> games;
  Region region;
  CovariateScheme scheme;
  FilterCounts provenance;
  FilterRules filter;

  int p() const { return scheme.dimension(); }
  long total_shots() const;
  long total_shots(ShotType j) const;

  /// Checks the covariate dimensions and that every shot is inside region.
  void validate() const;
};

/// Equally spaced quadrature cells tiling a region, row-major in x.
struct GridSpec {
  Region region;
  int nx = 50;
  int ny = 35;

  GridSpec() = default;
  GridSpec(Region r, int cells_x, int cells_y);

  int cell_count() const { return nx * ny; }
  double cell_width() const { return region.width() / nx; }
  double cell_height() const { return region.height() / ny; }
  double cell_area() const { return cell_width() * cell_height(); }
  Point2 center(int h) const;
  std::vector<Point2> centers() const;
  /// Cell index containing p (points on the upper edges map to the last cell).
  int cell_of(Point2 p) const;

  /// 1 ft cells over the half court.
  static GridSpec court_default() { return GridSpec(Region::court(), 50, 35); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Coefficients (theta0, theta_beta_0, theta_beta_1) and hypervariances.
/// theta_beta[j] stacks p blocks of length L, block k holding the basis
/// coefficients of beta_{j,k}.
struct ParamVector {
  Eigen::VectorXd theta0;
  std::array<Eigen::VectorXd, 2> theta_beta;
  double sigma0_sq = 1.0;
  double sigma_beta_sq = 1.0;

  static ParamVector zeros(int basis_size, int p);

  int basis_size() const { return static_cast<int>(theta0.size()); }
  int p() const;
  Eigen::Index coefficient_count() const;

  /// theta0 + sum_k z_k theta_beta[j][k]; log lambda_j(s; z) = phi(s) . w.
  Eigen::VectorXd effective_weights(const Eigen::VectorXd& z, ShotType j) const;

  Eigen::VectorXd coefficients() const;
  static ParamVector from_coefficients(const Eigen::VectorXd& coef, int basis_size, int p,
                                       double sigma0_sq, double sigma_beta_sq);

  void validate() const;
};

/// X_{i,j}(s) = (1, c_j (x) z) (x) phi(s), length (1 + 2p) L.
Eigen::VectorXd design_row(const Eigen::RowVectorXd& phi, const Eigen::VectorXd& z, ShotType j);
Eigen::VectorXd design_row(const Basis& basis, const Eigen::VectorXd& z, ShotType j, Point2 s);

/// One shot as read from a file, before filtering.
struct RawShot {
  std::string game_id;
  Point2 location;
  ShotType outcome = ShotType::Missed;
  bool home = false;
  bool strong = false;
  std::optional<double> distance;
};

/// Game identity and flags; lets a Dataset keep games that have no shots.
struct GameInfo {
  std::string game_id;
  bool home = false;
  bool strong = false;
};

/// Removes shots farther than max_distance or closer than min_distance from
/// the basket and shots outside region. Games keep their order of first
/// appearance (from `games` first, then from `shots`).
Dataset filter_shots(std::span<const RawShot> shots, const Region& region,
                     const CovariateScheme& scheme, const FilterRules& rules,
                     std::span<const GameInfo> games = {}, long malformed_rows = 0);

/// Re-applies the filter to an existing Dataset.
Dataset filter_shots(const Dataset& data, const FilterRules& rules);

std::vector<RawShot> to_raw_shots(const Dataset& data);
std::vector<GameInfo> game_infos(const Dataset& data);

} // namespace shotlgcp
