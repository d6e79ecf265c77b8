#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "shotlgcp/geometry.hpp"

namespace shotlgcp {

/// Parameters of k(s, s') = exp{-a(|s|^2 + |s'|^2) - b|s - s'|^2}.
/// `a` localizes the kernel around the origin, `b` sets the similarity
/// bandwidth. Both act on standardized coordinates.
struct KernelParams {
  double a = 1.0;
  double b = 1.0;

  void validate() const;
  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// Closed-form spectrum of the one-dimensional factor
/// k(x, x') = exp{-a(x^2 + x'^2) - b(x - x')^2} on L2(R).
///
/// Eigenvalues are sqrt(pi / A) * B^k with c = sqrt(a^2 + 2ab),
/// A = a + b + c and B = b / A. Eigenfunctions are Hermite functions,
///   phi_k(x) = (2c/pi)^{1/4} (2^k k!)^{-1/2} exp(-c x^2) H_k(sqrt(2c) x),
/// which are orthonormal with respect to Lebesgue measure.
struct Spectrum1d {
  double c = 0.0;
  double A = 0.0;
  double ratio = 0.0; // B
  double leading = 0.0; // sqrt(pi / A)

  explicit Spectrum1d(const KernelParams& params);

  double eigenvalue(int k) const;
  /// Sum of all eigenvalues, a geometric series.
  double total() const { return leading / (1.0 - ratio); }
};

struct Eigenpair1d {
  double eigenvalue = 0.0;
  int index = 0;       // Hermite degree k
  double norm = 0.0;   // (2c/pi)^{1/4} / sqrt(2^k k!)
};

/// Leading `count` eigenpairs of the 1D factor, in descending order.
std::vector<Eigenpair1d> eigen_1d(const KernelParams& params, int count);

/// Writes phi_0(x), ..., phi_{n-1}(x) into `out` (n = out.size()) using the
/// three-term recurrence of normalized Hermite functions.
void hermite_functions(double c, double x, std::span<double> out);

/// Affine map from region coordinates to the standardized square [-1, 1]^2.
struct DomainMap {
  double x_center = 0.0;
  double y_center = 0.0;
  double x_half = 1.0;
  double y_half = 1.0;

  Point2 to_standard(Point2 p) const {
    return {(p.x - x_center) / x_half, (p.y - y_center) / y_half};
  }

  static DomainMap from_box(const Region& box);
  static DomainMap identity() { return {}; }

  friend bool operator==(const DomainMap&, const DomainMap&) = default;
};

/// One tensor-product eigenpair of the 2D kernel.
struct BasisTerm {
  int kx = 0;
  int ky = 0;
  double eigenvalue = 0.0;
  double norm = 0.0;

  friend bool operator==(const BasisTerm&, const BasisTerm&) = default;
};

/// Either a fixed number of terms or a captured-variance threshold.
struct BasisSelector {
  int fixed_size = 0;
  double threshold = 0.0;

  static BasisSelector fixed(int size) { return {size, 0.0}; }
  static BasisSelector variance(double alpha) { return {0, alpha}; }
  bool by_threshold() const { return fixed_size == 0; }
};

/// Truncated Karhunen-Loeve basis of the 2D kernel. Immutable once built.
class Basis {
public:
  Basis() = default;
  Basis(KernelParams params, std::vector<BasisTerm> terms, DomainMap map);

  const KernelParams& params() const { return params_; }
  const DomainMap& domain_map() const { return map_; }
  const std::vector<BasisTerm>& terms() const { return terms_; }
  int size() const { return static_cast<int>(terms_.size()); }
  Eigen::VectorXd eigenvalues() const;

  /// Fraction of the kernel's total variance kept by the truncation.
  double recovery() const { return recovery_; }

  /// phi(s) as a row of length size(); s is in region coordinates.
  Eigen::RowVectorXd evaluate(Point2 s) const;
  /// Phi with Phi(t, l) = phi_l(points[t]).
  Eigen::MatrixXd evaluate(std::span<const Point2> points) const;

  nlohmann::json to_json() const;
  static Basis from_json(const nlohmann::json& doc);

  friend bool operator==(const Basis&, const Basis&) = default;

private:
  KernelParams params_;
  std::vector<BasisTerm> terms_;
  DomainMap map_;
  double recovery_ = 0.0;
  int max_kx_ = 0;
  int max_ky_ = 0;
};

/// Builds the 2D basis from tensor products of 1D eigenpairs. Terms are
/// ordered by eigenvalue, ties broken by (kx, ky) lexicographically.
Basis build_basis_2d(const KernelParams& params, BasisSelector selector,
                     DomainMap map = DomainMap::identity());

/// Direct kernel evaluation in standardized coordinates.
double kernel_value(const KernelParams& params, Point2 u, Point2 v);

/// Sum over l < size of xi_l / (total variance), closed form denominator.
double recovery_ratio(const KernelParams& params, std::span<const BasisTerm> terms);

} // namespace shotlgcp
