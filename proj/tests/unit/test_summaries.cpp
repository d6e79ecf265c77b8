#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "shotlgcp/error.hpp"
#include "shotlgcp/summaries.hpp"

using namespace shotlgcp;

namespace {

const CovariateScheme kP3{CovariateEncoding::HomeStrongInteraction};

PosteriorSamples random_samples(int draws, double scale, std::uint64_t seed, int L = 3, int p = 3) {
  PosteriorSamples s;
  s.basis_size = L;
  s.p = p;
  for (int d = 0; d < draws; ++d) {
    s.draws.push_back(fixture::random_theta(L, p, scale, seed * 1000 + static_cast<std::uint64_t>(d)));
    s.iterations.push_back(d + 1);
  }
  return s;
}

Eigen::VectorXd z_of(bool home, bool strong) { return encode_covariates(home, strong, kP3); }

} // namespace

TEST_CASE("surface kinds parse by name") {
  for (SurfaceKind k : {SurfaceKind::Intensity, SurfaceKind::SqrtIntensity, SurfaceKind::Density,
                        SurfaceKind::RelativeRisk}) {
    CHECK(parse_surface_kind(surface_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_surface_kind("risk"), ConfigError);
}

TEST_CASE("intensity map of zero coefficients is identically one") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 8, 6);
  PosteriorSamples s = random_samples(1, 0.0, 1);
  const auto map = intensity_map(s, basis, z_of(true, true), ShotType::Made, grid);
  CHECK((map.values.array() - 1.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("intensity map averages exponentials, not exponents") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 5, 5);
  const PosteriorSamples s = random_samples(2, 0.7, 2);
  const Eigen::VectorXd z = z_of(false, true);
  const auto map = intensity_map(s, basis, z, ShotType::Missed, grid);
  const auto root = intensity_map(s, basis, z, ShotType::Missed, grid, true);
  for (int h = 0; h < grid.cell_count(); ++h) {
    const Point2 c = grid.center(h);
    const double expected = 0.5 * (std::exp(oracle::naive_log_intensity(s.draws[0], basis, z, ShotType::Missed, c)) +
                                   std::exp(oracle::naive_log_intensity(s.draws[1], basis, z, ShotType::Missed, c)));
    CHECK(map.values[h] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(root.values[h] == doctest::Approx(std::sqrt(expected)).epsilon(1e-12));
  }
}

TEST_CASE("density of a flat surface is 1 / H") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::court(), 50, 35);
  const auto map = probability_density_map(random_samples(3, 0.0, 1), basis, z_of(true, false), grid);
  CHECK((map.values.array() - 1.0 / 1750.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("density sums to one and matches a per-draw normalization") {
  const Basis basis = build_basis_2d({0.25, 1.5}, BasisSelector::fixed(6));
  const GridSpec grid(Region::standard_square(), 12, 9);
  const PosteriorSamples s = random_samples(5, 2.0, 3, 6, 3);
  const Eigen::VectorXd z = z_of(true, true);
  const auto map = probability_density_map(s, basis, z, grid);
  CHECK(std::abs(map.values.sum() - 1.0) < 1e-10);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(grid.cell_count());
  for (const auto& theta : s.draws) {
    Eigen::VectorXd lam(grid.cell_count());
    for (int h = 0; h < grid.cell_count(); ++h) {
      lam[h] = std::exp(oracle::naive_log_intensity(theta, basis, z, ShotType::Made, grid.center(h)));
    }
    expected += lam / lam.sum();
  }
  expected /= static_cast<double>(s.draws.size());
  CHECK((map.values - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density survives log intensities far beyond the exponent range") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 10, 10);
  PosteriorSamples s = random_samples(4, 1.0, 4);
  const auto before = probability_density_map(s, basis, z_of(false, false), grid);
  for (auto& d : s.draws) d.theta0 *= 2000.0;
  const auto extreme = probability_density_map(s, basis, z_of(false, false), grid);
  CHECK(before.values.allFinite());
  CHECK(extreme.values.allFinite());
  CHECK(std::abs(extreme.values.sum() - 1.0) < 1e-10);
}

TEST_CASE("relative risk against itself is exactly one") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 7, 7);
  const PosteriorSamples s = random_samples(20, 1.5, 5);
  const auto map = relative_risk_map(s, basis, z_of(true, false), z_of(true, false), grid);
  CHECK((map.values.array() == 1.0).all());
  CHECK(std::all_of(map.flags.begin(), map.flags.end(), [](CellFlag f) { return f == CellFlag::None; }));
}

TEST_CASE("relative risk is one when covariates have no effect") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 7, 7);
  PosteriorSamples s = random_samples(10, 1.0, 6);
  for (auto& d : s.draws) {
    d.theta_beta[0].setZero();
    d.theta_beta[1].setZero();
  }
  const auto map = relative_risk_map(s, basis, z_of(true, true), z_of(false, false), grid);
  CHECK((map.values.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("relative risk matches its definition and inverts under swapping") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(4));
  const GridSpec grid(Region::standard_square(), 9, 6);
  const auto centers = grid.centers();
  const Eigen::MatrixXd phi = basis.evaluate(centers);
  const Eigen::VectorXd a = z_of(true, true);
  const Eigen::VectorXd b = z_of(false, true);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ParamVector theta = fixture::random_theta(4, 3, 0.8, seed);
    const Eigen::VectorXd ab = relative_risk_draw(theta, phi, grid.cell_area(), a, b);
    const Eigen::VectorXd ba = relative_risk_draw(theta, phi, grid.cell_area(), b, a);
    CHECK((ab.cwiseProduct(ba).array() - 1.0).abs().maxCoeff() < 1e-12);

    auto lam = [&](const Eigen::VectorXd& z, ShotType j, Point2 s) {
      return std::exp(oracle::naive_log_intensity(theta, basis, z, j, s));
    };
    double ia = 0.0;
    double ib = 0.0;
    for (const auto& c : centers) {
      ia += (lam(a, ShotType::Missed, c) + lam(a, ShotType::Made, c)) * grid.cell_area();
      ib += (lam(b, ShotType::Missed, c) + lam(b, ShotType::Made, c)) * grid.cell_area();
    }
    for (int h = 0; h < grid.cell_count(); ++h) {
      const double expected = lam(a, ShotType::Made, centers[h]) / lam(b, ShotType::Made, centers[h]) * ib / ia;
      CHECK(ab[h] == doctest::Approx(expected).epsilon(1e-11));
    }
  }
}

TEST_CASE("wider intervals flag a subset of cells") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 15, 15);
  PosteriorSamples s = random_samples(200, 0.3, 7);
  for (auto& d : s.draws) d.theta_beta[1][0] += 1.0; // a systematic home effect on made shots
  const Eigen::VectorXd a = z_of(true, false);
  const Eigen::VectorXd b = z_of(false, false);
  const auto narrow = relative_risk_map(s, basis, a, b, grid, 0.5);
  const auto wide = relative_risk_map(s, basis, a, b, grid, 0.99);
  int flagged_narrow = 0;
  int flagged_wide = 0;
  for (int h = 0; h < grid.cell_count(); ++h) {
    flagged_narrow += narrow.flags[h] != CellFlag::None;
    flagged_wide += wide.flags[h] != CellFlag::None;
    if (wide.flags[h] != CellFlag::None) CHECK(narrow.flags[h] == wide.flags[h]);
  }
  CHECK(flagged_wide <= flagged_narrow);
  CHECK(flagged_narrow > 0);
}

TEST_CASE("summaries do not depend on draw order") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 6, 6);
  PosteriorSamples s = random_samples(30, 0.8, 8);
  const auto rr = relative_risk_map(s, basis, z_of(true, true), z_of(false, true), grid);
  const auto dens = probability_density_map(s, basis, z_of(true, true), grid);
  std::reverse(s.draws.begin(), s.draws.end());
  const auto rr2 = relative_risk_map(s, basis, z_of(true, true), z_of(false, true), grid);
  const auto dens2 = probability_density_map(s, basis, z_of(true, true), grid);
  CHECK((rr.values - rr2.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((dens.values - dens2.values).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(rr.flags == rr2.flags);
}

TEST_CASE("type-7 quantiles") {
  std::vector<double> v{4, 1, 3, 2};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == 2.5);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  std::vector<double> one{7.0};
  CHECK(quantile(one, 0.3) == 7.0);
}

TEST_CASE("contour of a linear ramp is a straight line") {
  SurfaceMap map;
  map.grid = GridSpec(Region::standard_square(), 10, 8);
  map.values.resize(map.grid.cell_count());
  for (int h = 0; h < map.grid.cell_count(); ++h) map.values[h] = map.grid.center(h).x;
  const auto lines = contour_lines(map, 0.0);
  REQUIRE(lines.size() == 1);
  for (const auto& p : lines[0]) CHECK(std::abs(p.x) < 1e-12);
  const double y0 = std::min(lines[0].front().y, lines[0].back().y);
  const double y1 = std::max(lines[0].front().y, lines[0].back().y);
  CHECK(y0 == doctest::Approx(map.grid.center(0).y));
  CHECK(y1 == doctest::Approx(map.grid.center(map.grid.cell_count() - 1).y));
  CHECK(contour_lines(map, 5.0).empty());
}

TEST_CASE("contour around a bump is a closed loop") {
  SurfaceMap map;
  map.grid = GridSpec(Region::standard_square(), 21, 21);
  map.values.resize(map.grid.cell_count());
  for (int h = 0; h < map.grid.cell_count(); ++h) {
    const Point2 c = map.grid.center(h);
    map.values[h] = c.x * c.x + c.y * c.y;
  }
  const auto lines = contour_lines(map, 0.25);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].front().x == lines[0].back().x);
  CHECK(lines[0].front().y == lines[0].back().y);
  for (const auto& p : lines[0]) CHECK(std::abs(std::hypot(p.x, p.y) - 0.5) < 0.02);
}

TEST_CASE("surface CSV lists every cell with its flag") {
  const Basis basis = build_basis_2d({1.0, 1.0}, BasisSelector::fixed(3));
  const GridSpec grid(Region::standard_square(), 3, 2);
  const auto map = relative_risk_map(random_samples(10, 0.5, 9), basis, z_of(true, false), z_of(false, false), grid);
  std::ostringstream out;
  write_surface_csv(map, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,value,flag");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  CHECK(surface_json(map)["values"].size() == 6);
}
