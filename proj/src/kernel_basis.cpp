#include "shotlgcp/kernel_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "shotlgcp/error.hpp"

namespace shotlgcp {

void KernelParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ParameterError("kernel parameter a must be positive, got " + std::to_string(a));
  }
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw ParameterError("kernel parameter b must be positive, got " + std::to_string(b));
  }
}

Spectrum1d::Spectrum1d(const KernelParams& params) {
  params.validate();
  c = std::sqrt(params.a * params.a + 2.0 * params.a * params.b);
  A = params.a + params.b + c;
  ratio = params.b / A;
  leading = std::sqrt(std::numbers::pi / A);
}

double Spectrum1d::eigenvalue(int k) const { return leading * std::pow(ratio, k); }

namespace {

// (2c/pi)^{1/4} / sqrt(2^k k!), computed in log space.
double hermite_norm(double c, int k) {
  const double log_norm = 0.25 * std::log(2.0 * c / std::numbers::pi) -
                          0.5 * (k * std::numbers::ln2 + std::lgamma(k + 1.0));
  return std::exp(log_norm);
}

} // namespace

std::vector<Eigenpair1d> eigen_1d(const KernelParams& params, int count) {
  if (count < 1) {
    throw ParameterError("eigen_1d: count must be >= 1");
  }
  const Spectrum1d spectrum(params);
  std::vector<Eigenpair1d> pairs;
  pairs.reserve(count);
  for (int k = 0; k < count; ++k) {
    pairs.push_back({spectrum.eigenvalue(k), k, hermite_norm(spectrum.c, k)});
  }
  return pairs;
}

void hermite_functions(double c, double x, std::span<double> out) {
  if (out.empty()) {
    return;
  }
  // psi_k(u) are the orthonormal Hermite functions in u = sqrt(2c) x; the
  // change of variables contributes (2c)^{1/4}.
  const double u = std::sqrt(2.0 * c) * x;
  const double scale = std::pow(2.0 * c, 0.25);
  double prev = 0.0;
  double curr = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * u * u);
  out[0] = scale * curr;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const double kd = static_cast<double>(k);
    const double next = std::sqrt(2.0 / kd) * u * curr - std::sqrt((kd - 1.0) / kd) * prev;
    prev = curr;
    curr = next;
    out[k] = scale * curr;
  }
}

DomainMap DomainMap::from_box(const Region& box) {
  box.validate();
  return {0.5 * (box.x_min + box.x_max), 0.5 * (box.y_min + box.y_max), 0.5 * box.width(),
          0.5 * box.height()};
}

double kernel_value(const KernelParams& params, Point2 u, Point2 v) {
  const double norms = u.x * u.x + u.y * u.y + v.x * v.x + v.y * v.y;
  const double dx = u.x - v.x;
  const double dy = u.y - v.y;
  return std::exp(-params.a * norms - params.b * (dx * dx + dy * dy));
}

double recovery_ratio(const KernelParams& params, std::span<const BasisTerm> terms) {
  const Spectrum1d spectrum(params);
  const double total = spectrum.total() * spectrum.total();
  double kept = 0.0;
  for (const auto& term : terms) {
    kept += term.eigenvalue;
  }
  return kept / total;
}

Basis::Basis(KernelParams params, std::vector<BasisTerm> terms, DomainMap map)
    : params_(params), terms_(std::move(terms)), map_(map) {
  params_.validate();
  if (terms_.empty()) {
    throw ParameterError("basis must contain at least one term");
  }
  for (const auto& term : terms_) {
    max_kx_ = std::max(max_kx_, term.kx);
    max_ky_ = std::max(max_ky_, term.ky);
  }
  recovery_ = recovery_ratio(params_, terms_);
}

Eigen::VectorXd Basis::eigenvalues() const {
  Eigen::VectorXd xi(size());
  for (int l = 0; l < size(); ++l) {
    xi[l] = terms_[l].eigenvalue;
  }
  return xi;
}

Eigen::RowVectorXd Basis::evaluate(Point2 s) const {
  if (!is_finite(s)) {
    throw InputError("basis evaluation at a non-finite coordinate");
  }
  const Spectrum1d spectrum(params_);
  const Point2 u = map_.to_standard(s);
  std::vector<double> fx(max_kx_ + 1);
  std::vector<double> fy(max_ky_ + 1);
  hermite_functions(spectrum.c, u.x, fx);
  hermite_functions(spectrum.c, u.y, fy);
  Eigen::RowVectorXd row(size());
  for (int l = 0; l < size(); ++l) {
    row[l] = fx[terms_[l].kx] * fy[terms_[l].ky];
  }
  return row;
}

Eigen::MatrixXd Basis::evaluate(std::span<const Point2> points) const {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(points.size()), size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    phi.row(static_cast<Eigen::Index>(t)) = evaluate(points[t]);
  }
  return phi;
}

nlohmann::json Basis::to_json() const {
  nlohmann::json doc;
  doc["kernel"] = {{"a", params_.a}, {"b", params_.b}};
  doc["size"] = size();
  doc["recovery"] = recovery_;
  doc["domain_map"] = {{"x_center", map_.x_center},
                       {"y_center", map_.y_center},
                       {"x_half", map_.x_half},
                       {"y_half", map_.y_half}};
  auto& terms = doc["terms"] = nlohmann::json::array();
  for (const auto& term : terms_) {
    terms.push_back({{"kx", term.kx},
                     {"ky", term.ky},
                     {"eigenvalue", term.eigenvalue},
                     {"norm", term.norm}});
  }
  return doc;
}

Basis Basis::from_json(const nlohmann::json& doc) {
  try {
    KernelParams params{doc.at("kernel").at("a").get<double>(),
                        doc.at("kernel").at("b").get<double>()};
    const auto& m = doc.at("domain_map");
    DomainMap map{m.at("x_center").get<double>(), m.at("y_center").get<double>(),
                  m.at("x_half").get<double>(), m.at("y_half").get<double>()};
    std::vector<BasisTerm> terms;
    for (const auto& t : doc.at("terms")) {
      terms.push_back({t.at("kx").get<int>(), t.at("ky").get<int>(),
                       t.at("eigenvalue").get<double>(), t.at("norm").get<double>()});
    }
    return Basis(params, std::move(terms), map);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed basis document: ") + e.what());
  }
}

Basis build_basis_2d(const KernelParams& params, BasisSelector selector, DomainMap map) {
  params.validate();
  if (selector.by_threshold()) {
    if (!(selector.threshold > 0.0)) {
      throw ParameterError("variance threshold must lie in (0, 1)");
    }
    if (selector.threshold >= 1.0) {
      throw ParameterError("variance threshold >= 1 can never be reached by a finite basis");
    }
  } else if (selector.fixed_size < 1) {
    throw ParameterError("basis size must be >= 1");
  }

  const Spectrum1d spectrum(params);
  const double total = spectrum.total() * spectrum.total();

  // Pairs with equal total degree kx + ky share an eigenvalue, so walking the
  // degrees in order and kx ascending within a degree gives the sorted order.
  // The eigenvalue is formed from the degree alone so that ties are exact.
  std::vector<BasisTerm> terms;
  double kept = 0.0;
  for (int degree = 0;; ++degree) {
    for (int kx = 0; kx <= degree; ++kx) {
      const int ky = degree - kx;
      BasisTerm term{kx, ky, spectrum.leading * spectrum.leading * std::pow(spectrum.ratio, degree),
                     hermite_norm(spectrum.c, kx) * hermite_norm(spectrum.c, ky)};
      terms.push_back(term);
      kept += term.eigenvalue;
      const bool done = selector.by_threshold()
                            ? kept / total > selector.threshold
                            : static_cast<int>(terms.size()) == selector.fixed_size;
      if (done) {
        return Basis(params, std::move(terms), map);
      }
    }
    if (degree > 100000) {
      throw NumericalError("basis truncation did not terminate");
    }
  }
}

} // namespace shotlgcp
