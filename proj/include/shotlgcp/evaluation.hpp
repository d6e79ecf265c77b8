#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "shotlgcp/data_model.hpp"
#include "shotlgcp/random.hpp"
#include "shotlgcp/sampler.hpp"
#include "shotlgcp/simulator.hpp"

namespace shotlgcp {

/// Intensity of one game's shots of one type at a location.
using PointIntensity = std::function<double(const GameRecord&, ShotType, Point2)>;

/// Root mean squared difference of two intensities over every observed shot,
/// each evaluated at the shot's own game and type.
double rmse(const PointIntensity& estimate, const PointIntensity& truth, const Dataset& data);

/// Independent Bernoulli(p) retention of each shot. Both sides keep every
/// game with its covariates, so a game may have no shots on one side.
std::pair<Dataset, Dataset> p_thin_split(const Dataset& data, double p, Rng& rng);

/// Intensity at every cell center of a grid, for one game and type.
using CellIntensity = std::function<Eigen::VectorXd(const GameRecord&, ShotType)>;

struct NpllOptions {
  double p = 0.8;
  int regions_x = 20;
  int regions_y = 20;
  double floor = 1e-12; // lower bound on each region's fitted mean

  void validate() const;
};

/// -log Poisson(k | mu).
double poisson_nll(long k, double mu);

/// Regional predictive score of held-out shots. `fit` is the intensity
/// fitted on the training side, integrated cell-wise over `grid`; each cell
/// belongs to the region containing its center. Each game is scored at its
/// own covariates with mean (1 - p) / p times the fitted regional integral.
double npll(const CellIntensity& fit, const Dataset& test, const GridSpec& grid,
            const NpllOptions& options = {});

/// Region index of each grid cell under a regions_x by regions_y partition.
std::vector<int> region_of_cells(const GridSpec& grid, int regions_x, int regions_y);

// Intensity providers.

/// Posterior mean intensity from the draws, cached per (z, type).
CellIntensity posterior_cell_intensity(const PosteriorSamples& samples, const Basis& basis,
                                       const GridSpec& grid);
PointIntensity posterior_point_intensity(const PosteriorSamples& samples, const Basis& basis);

/// scale * lambda_true; scale = p turns the generating intensity into the
/// intensity of a p-thinned training set.
CellIntensity truth_cell_intensity(const TruthModel& truth, const GridSpec& grid, double scale = 1.0);
PointIntensity truth_point_intensity(const TruthModel& truth, double scale = 1.0);

/// Constant intensity per type: shots of that type per game per unit area.
CellIntensity uniform_cell_intensity(const Dataset& train, const GridSpec& grid);
PointIntensity uniform_point_intensity(const Dataset& train);

/// Grid-exchange CSV from an external estimator: columns x,y,type,value
/// and an optional game_id; type is "made" or "missed" (or 1/0). Rows
/// without a game_id apply to every game. Each row's (x, y) selects the cell
/// containing it; cells left unset are zero.
CellIntensity read_grid_exchange(std::istream& in, const GridSpec& grid, double scale = 1.0);
CellIntensity read_grid_exchange(const std::filesystem::path& path, const GridSpec& grid,
                                 double scale = 1.0);

struct ScoreRow {
  std::string method;
  std::uint64_t seed = 0;
  int repetition = 0;
  std::optional<double> rmse;
  std::optional<double> npll;
};

/// Columns method,seed,repetition,rmse,npll; missing scores stay empty.
void write_scores_csv(const std::vector<ScoreRow>& rows, std::ostream& out);

} // namespace shotlgcp
