#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "shotlgcp/data_model.hpp"
#include "shotlgcp/sampler.hpp"

namespace shotlgcp {

enum class SurfaceKind { Intensity, SqrtIntensity, Density, RelativeRisk };

std::string surface_kind_name(SurfaceKind kind);
/// Accepts intensity, sqrt-intensity, density and relrisk.
SurfaceKind parse_surface_kind(const std::string& name);

/// Credible-interval flag of a relative-risk cell.
enum class CellFlag { None, Above, Below };

char flag_symbol(CellFlag flag); // '+', '-' or ' '

struct SurfaceMap {
  GridSpec grid;
  SurfaceKind kind = SurfaceKind::Intensity;
  Eigen::VectorXd values; // one per cell, row-major as GridSpec::center
  Eigen::VectorXd z_a;    // covariates of the surface (numerator for relative risk)
  Eigen::VectorXd z_b;    // relative-risk denominator, empty otherwise
  std::optional<ShotType> type;
  std::vector<CellFlag> flags; // relative risk only
  double ci_level = 0.0;
};

/// Posterior mean of lambda_j(s_h; z) over the draws; the sqrt variant takes
/// the square root after averaging.
SurfaceMap intensity_map(const PosteriorSamples& samples, const Basis& basis,
                         const Eigen::VectorXd& z, ShotType j, const GridSpec& grid,
                         bool sqrt_scale = false);

/// Made-shot location probability per cell, lambda_1 / sum_h lambda_1 per
/// draw, averaged over draws and renormalized to sum to 1.
SurfaceMap probability_density_map(const PosteriorSamples& samples, const Basis& basis,
                                   const Eigen::VectorXd& z, const GridSpec& grid);

/// Relative risk of a made shot at each cell for one coefficient draw:
///
///   RR(s) = [lambda_1(s; a) / lambda_1(s; b)] * [I(b) / I(a)],
///   I(z)  = sum_h (lambda_0 + lambda_1)(s_h; z) |cell|.
///
/// Computed in log space; identical covariates give exactly 1.
Eigen::VectorXd relative_risk_draw(const ParamVector& theta, const Eigen::MatrixXd& phi_grid,
                                   double cell_area, const Eigen::VectorXd& z_a,
                                   const Eigen::VectorXd& z_b);

/// Posterior mean relative risk with cells flagged Above where the lower
/// (1 - ci_level)/2 quantile exceeds 1 and Below where the upper quantile is
/// under 1.
SurfaceMap relative_risk_map(const PosteriorSamples& samples, const Basis& basis,
                             const Eigen::VectorXd& z_a, const Eigen::VectorXd& z_b,
                             const GridSpec& grid, double ci_level = 0.90);

/// Sample quantile with linear interpolation between order statistics
/// (the usual "type 7" definition). Sorts `values` in place.
double quantile(std::vector<double>& values, double prob);

using Polyline = std::vector<Point2>;

/// Marching squares over the lattice of cell centers. Segments are chained
/// into polylines; closed loops repeat their first point at the end.
std::vector<Polyline> contour_lines(const SurfaceMap& map, double level);

/// Columns x,y,value,flag.
void write_surface_csv(const SurfaceMap& map, std::ostream& out);
nlohmann::json surface_json(const SurfaceMap& map);
nlohmann::json contour_json(const std::vector<Polyline>& lines, double level);

} // namespace shotlgcp
