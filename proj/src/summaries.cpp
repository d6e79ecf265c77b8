#include "shotlgcp/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "shotlgcp/error.hpp"
#include "shotlgcp/shot_io.hpp"

namespace shotlgcp {

std::string surface_kind_name(SurfaceKind kind) {
  switch (kind) {
  case SurfaceKind::Intensity: return "intensity";
  case SurfaceKind::SqrtIntensity: return "sqrt-intensity";
  case SurfaceKind::Density: return "density";
  case SurfaceKind::RelativeRisk: return "relrisk";
  }
  return "?";
}

SurfaceKind parse_surface_kind(const std::string& name) {
  for (SurfaceKind k : {SurfaceKind::Intensity, SurfaceKind::SqrtIntensity, SurfaceKind::Density,
                        SurfaceKind::RelativeRisk}) {
    if (surface_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown surface kind '" + name +
                    "' (expected intensity, sqrt-intensity, density or relrisk)");
}

char flag_symbol(CellFlag flag) {
  switch (flag) {
  case CellFlag::Above: return '+';
  case CellFlag::Below: return '-';
  case CellFlag::None: break;
  }
  return ' ';
}

namespace {

void require_draws(const PosteriorSamples& samples, const Basis& basis) {
  if (samples.draws.empty()) throw InputError("posterior summaries need at least one draw");
  if (samples.basis_size != basis.size()) {
    throw DimensionError("samples were drawn for a basis of size " +
                         std::to_string(samples.basis_size) + ", not " + std::to_string(basis.size()));
  }
}

void require_covariates(const PosteriorSamples& samples, const Eigen::VectorXd& z) {
  if (z.size() != samples.p) {
    throw DimensionError("covariate vector has length " + std::to_string(z.size()) +
                         ", expected " + std::to_string(samples.p));
  }
}

Eigen::MatrixXd grid_basis(const Basis& basis, const GridSpec& grid) {
  const auto centers = grid.centers();
  return basis.evaluate(centers);
}

} // namespace

SurfaceMap intensity_map(const PosteriorSamples& samples, const Basis& basis,
                         const Eigen::VectorXd& z, ShotType j, const GridSpec& grid,
                         bool sqrt_scale) {
  require_draws(samples, basis);
  require_covariates(samples, z);
  const Eigen::MatrixXd phi = grid_basis(basis, grid);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.cell_count());
  for (const auto& theta : samples.draws) {
    sum += (phi * theta.effective_weights(z, j)).array().exp().matrix();
  }
  SurfaceMap map;
  map.grid = grid;
  map.kind = sqrt_scale ? SurfaceKind::SqrtIntensity : SurfaceKind::Intensity;
  map.values = sum / static_cast<double>(samples.draws.size());
  if (sqrt_scale) map.values = map.values.cwiseSqrt();
  map.z_a = z;
  map.type = j;
  return map;
}

SurfaceMap probability_density_map(const PosteriorSamples& samples, const Basis& basis,
                                   const Eigen::VectorXd& z, const GridSpec& grid) {
  require_draws(samples, basis);
  require_covariates(samples, z);
  const Eigen::MatrixXd phi = grid_basis(basis, grid);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.cell_count());
  for (const auto& theta : samples.draws) {
    const Eigen::VectorXd log_lambda = phi * theta.effective_weights(z, ShotType::Made);
    // Shift by the maximum so large intensities do not overflow.
    const Eigen::VectorXd lambda = (log_lambda.array() - log_lambda.maxCoeff()).exp().matrix();
    sum += lambda / lambda.sum();
  }
  SurfaceMap map;
  map.grid = grid;
  map.kind = SurfaceKind::Density;
  map.values = sum / sum.sum();
  map.z_a = z;
  map.type = ShotType::Made;
  return map;
}

Eigen::VectorXd relative_risk_draw(const ParamVector& theta, const Eigen::MatrixXd& phi_grid,
                                   double cell_area, const Eigen::VectorXd& z_a,
                                   const Eigen::VectorXd& z_b) {
  auto log_total = [&](const Eigen::VectorXd& z) {
    const double total =
        ((phi_grid * theta.effective_weights(z, ShotType::Missed)).array().exp().sum() +
         (phi_grid * theta.effective_weights(z, ShotType::Made)).array().exp().sum()) *
        cell_area;
    return std::log(total);
  };
  const Eigen::VectorXd w_a = theta.effective_weights(z_a, ShotType::Made);
  const Eigen::VectorXd w_b = theta.effective_weights(z_b, ShotType::Made);
  const Eigen::VectorXd log_rr =
      (phi_grid * w_a - phi_grid * w_b).array() + (log_total(z_b) - log_total(z_a));
  return log_rr.array().exp();
}

double quantile(std::vector<double>& values, double prob) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ParameterError("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SurfaceMap relative_risk_map(const PosteriorSamples& samples, const Basis& basis,
                             const Eigen::VectorXd& z_a, const Eigen::VectorXd& z_b,
                             const GridSpec& grid, double ci_level) {
  require_draws(samples, basis);
  require_covariates(samples, z_a);
  require_covariates(samples, z_b);
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ParameterError("CI level must lie in (0, 1)");
  const Eigen::MatrixXd phi = grid_basis(basis, grid);
  const int H = grid.cell_count();
  const auto D = static_cast<Eigen::Index>(samples.draws.size());
  Eigen::MatrixXd rr(H, D);
  for (Eigen::Index d = 0; d < D; ++d) {
    rr.col(d) = relative_risk_draw(samples.draws[static_cast<std::size_t>(d)], phi,
                                   grid.cell_area(), z_a, z_b);
  }
  SurfaceMap map;
  map.grid = grid;
  map.kind = SurfaceKind::RelativeRisk;
  map.values = rr.rowwise().mean();
  map.z_a = z_a;
  map.z_b = z_b;
  map.type = ShotType::Made;
  map.ci_level = ci_level;
  map.flags.assign(static_cast<std::size_t>(H), CellFlag::None);
  const double tail = 0.5 * (1.0 - ci_level);
  std::vector<double> row(static_cast<std::size_t>(D));
  for (int h = 0; h < H; ++h) {
    for (Eigen::Index d = 0; d < D; ++d) row[static_cast<std::size_t>(d)] = rr(h, d);
    const double lower = quantile(row, tail);
    const double upper = quantile(row, 1.0 - tail);
    if (lower > 1.0) {
      map.flags[h] = CellFlag::Above;
    } else if (upper < 1.0) {
      map.flags[h] = CellFlag::Below;
    }
  }
  return map;
}

namespace {

// Crossing points live on lattice edges; an edge key identifies a point
// shared by the two squares on either side of the edge.
struct EdgeCrossing {
  long key;
  Point2 point;
};

} // namespace

std::vector<Polyline> contour_lines(const SurfaceMap& map, double level) {
  const GridSpec& g = map.grid;
  const int nx = g.nx;
  const int ny = g.ny;
  if (map.values.size() != g.cell_count()) throw DimensionError("surface size does not match grid");
  if (nx < 2 || ny < 2) return {};

  auto value = [&](int ix, int iy) { return map.values[iy * nx + ix]; };
  auto node = [&](int ix, int iy) { return g.center(iy * nx + ix); };
  auto crossing = [&](int ix0, int iy0, int ix1, int iy1) {
    const double v0 = value(ix0, iy0);
    const double v1 = value(ix1, iy1);
    const double t = (v1 == v0) ? 0.5 : (level - v0) / (v1 - v0);
    const Point2 p0 = node(ix0, iy0);
    const Point2 p1 = node(ix1, iy1);
    const long base = 2L * (static_cast<long>(iy0) * nx + ix0);
    const long key = iy1 == iy0 ? base : base + 1;
    return EdgeCrossing{key, {p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)}};
  };

  std::map<long, Point2> points;
  std::map<long, std::vector<long>> adjacency;
  auto add_segment = [&](const EdgeCrossing& a, const EdgeCrossing& b) {
    points[a.key] = a.point;
    points[b.key] = b.point;
    adjacency[a.key].push_back(b.key);
    adjacency[b.key].push_back(a.key);
  };

  for (int iy = 0; iy + 1 < ny; ++iy) {
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const bool b0 = value(ix, iy) >= level;         // bottom left
      const bool b1 = value(ix + 1, iy) >= level;     // bottom right
      const bool b2 = value(ix + 1, iy + 1) >= level; // top right
      const bool b3 = value(ix, iy + 1) >= level;     // top left
      const int code = b0 | (b1 << 1) | (b2 << 2) | (b3 << 3);
      if (code == 0 || code == 15) continue;
      const auto bottom = [&] { return crossing(ix, iy, ix + 1, iy); };
      const auto right = [&] { return crossing(ix + 1, iy, ix + 1, iy + 1); };
      const auto top = [&] { return crossing(ix, iy + 1, ix + 1, iy + 1); };
      const auto left = [&] { return crossing(ix, iy, ix, iy + 1); };
      switch (code) {
      case 1: case 14: add_segment(left(), bottom()); break;
      case 2: case 13: add_segment(bottom(), right()); break;
      case 3: case 12: add_segment(left(), right()); break;
      case 4: case 11: add_segment(right(), top()); break;
      case 6: case 9: add_segment(bottom(), top()); break;
      case 7: case 8: add_segment(left(), top()); break;
      case 5: case 10: {
        // Saddle: the mean of the corners decides which diagonal is connected.
        const double centre =
            0.25 * (value(ix, iy) + value(ix + 1, iy) + value(ix + 1, iy + 1) + value(ix, iy + 1));
        const bool centre_high = centre >= level;
        if ((code == 5) == centre_high) {
          add_segment(left(), top());
          add_segment(bottom(), right());
        } else {
          add_segment(left(), bottom());
          add_segment(right(), top());
        }
        break;
      }
      default: break;
      }
    }
  }

  std::vector<Polyline> lines;
  std::map<long, bool> used_edge; // keyed by min*2^32+max of the two endpoint keys
  auto edge_id = [](long a, long b) { return std::min(a, b) * (1L << 32) + std::max(a, b); };
  auto walk = [&](long start) {
    Polyline line{points[start]};
    long current = start;
    while (true) {
      long next = -1;
      for (long candidate : adjacency[current]) {
        if (!used_edge[edge_id(current, candidate)]) {
          next = candidate;
          break;
        }
      }
      if (next < 0) break;
      used_edge[edge_id(current, next)] = true;
      line.push_back(points[next]);
      current = next;
    }
    if (line.size() > 1) lines.push_back(std::move(line));
  };
  for (const auto& [key, neighbours] : adjacency) {
    if (neighbours.size() == 1) walk(key);
  }
  for (const auto& [key, neighbours] : adjacency) walk(key);
  return lines;
}

void write_surface_csv(const SurfaceMap& map, std::ostream& out) {
  out << "x,y,value,flag\n";
  for (int h = 0; h < map.grid.cell_count(); ++h) {
    const Point2 c = map.grid.center(h);
    out << format_double(c.x) << ',' << format_double(c.y) << ',' << format_double(map.values[h])
        << ',';
    if (!map.flags.empty() && map.flags[h] != CellFlag::None) out << flag_symbol(map.flags[h]);
    out << '\n';
  }
}

namespace {

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

nlohmann::json surface_json(const SurfaceMap& map) {
  nlohmann::json doc;
  doc["kind"] = surface_kind_name(map.kind);
  doc["grid"] = {{"nx", map.grid.nx},
                 {"ny", map.grid.ny},
                 {"x_min", map.grid.region.x_min},
                 {"x_max", map.grid.region.x_max},
                 {"y_min", map.grid.region.y_min},
                 {"y_max", map.grid.region.y_max},
                 {"cell_area", map.grid.cell_area()}};
  doc["order"] = "row-major, x fastest";
  if (map.kind == SurfaceKind::RelativeRisk) {
    doc["z_a"] = as_vector(map.z_a);
    doc["z_b"] = as_vector(map.z_b);
    doc["ci_level"] = map.ci_level;
    std::string flags;
    for (auto f : map.flags) flags.push_back(f == CellFlag::None ? '.' : flag_symbol(f));
    doc["flags"] = flags;
  } else {
    doc["z"] = as_vector(map.z_a);
  }
  if (map.type) doc["type"] = *map.type == ShotType::Made ? "made" : "missed";
  doc["values"] = as_vector(map.values);
  return doc;
}

nlohmann::json contour_json(const std::vector<Polyline>& lines, double level) {
  nlohmann::json doc;
  doc["level"] = level;
  auto& arr = doc["polylines"] = nlohmann::json::array();
  for (const auto& line : lines) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : line) pts.push_back({p.x, p.y});
    arr.push_back(pts);
  }
  return doc;
}

} // namespace shotlgcp
