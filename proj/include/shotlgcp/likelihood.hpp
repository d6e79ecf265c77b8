#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "shotlgcp/data_model.hpp"
#include "shotlgcp/kernel_basis.hpp"

namespace shotlgcp {

/// Coefficient blocks updated separately by the sampler.
enum class Block { Intercept = 0, Missed = 1, Made = 2 };

inline constexpr std::array<Block, 3> kBlocks{Block::Intercept, Block::Missed, Block::Made};

inline ShotType shot_type_of(Block b) { return b == Block::Made ? ShotType::Made : ShotType::Missed; }
const char* block_name(Block b);

/// Games sharing a covariate vector share their intensity integrals, so the
/// data enter the likelihood only through these sums.
struct CovariateGroup {
  Eigen::VectorXd z;
  int games = 0;
  std::array<Eigen::VectorXd, 2> shot_phi_sum; // sum of phi(s) over shots of each type
};

struct QuadratureCache {
  GridSpec grid;
  Eigen::MatrixXd phi_grid; // H x L, basis at cell centers
  double cell_area = 0.0;
  std::vector<CovariateGroup> groups; // sorted lexicographically by z
};

/// Log posterior of the coefficients and its block gradients under grid
/// quadrature of the intensity integral:
///
///   -sum_{i,j} sum_h exp{X_ij(s_h) theta} |cell| + sum_{i,j,t} X_ij(s_ijt) theta
///   - theta' Sigma^{-1} theta / 2,
///
/// with Sigma = diag(sigma0^2, sigma_beta^2 I_2p) (x) diag(xi). Terms that do
/// not depend on the coefficients (|R| per game, log t! and the variance
/// log-determinants) are dropped; Metropolis ratios for coefficient blocks
/// are unaffected.
class LikelihoodContext {
public:
  LikelihoodContext(const Basis& basis, const Dataset& data, const GridSpec& grid);

  const Basis& basis() const { return basis_; }
  const QuadratureCache& cache() const { return cache_; }
  int basis_size() const { return basis_.size(); }
  int p() const { return p_; }

  double log_posterior(const ParamVector& theta) const;

  struct BlockValue {
    double log_posterior = 0.0;
    Eigen::VectorXd gradient;
  };
  /// Log posterior and the gradient restricted to one block.
  BlockValue evaluate_block(const ParamVector& theta, Block block) const;
  Eigen::VectorXd grad_block(const ParamVector& theta, Block block) const {
    return evaluate_block(theta, block).gradient;
  }

  /// Quadrature of lambda_j(.; z) over the region.
  double integral(const ParamVector& theta, const Eigen::VectorXd& z, ShotType j) const;

private:
  void check(const ParamVector& theta) const;
  // theta' Sigma^{-1} theta / 2
  double prior_term(const ParamVector& theta) const;

  Basis basis_;
  int p_ = 0;
  Eigen::VectorXd inv_xi_;
  QuadratureCache cache_;
};

/// phi(s) . w for the covariate vector and shot type.
double log_intensity(const ParamVector& theta, const Basis& basis, const Eigen::VectorXd& z,
                     ShotType j, Point2 s);

/// sum_h lambda_j(s_h; z) |cell| with lambda from theta.
double integral_approx(const ParamVector& theta, const Basis& basis, const Eigen::VectorXd& z,
                       ShotType j, const GridSpec& grid);

/// sum_h exp{log_lambda(s_h)} |cell| for an arbitrary log intensity.
double integral_approx(const std::function<double(Point2)>& log_lambda, const GridSpec& grid);

double log_posterior(const ParamVector& theta, const Basis& basis, const Dataset& data,
                     const GridSpec& grid);

Eigen::VectorXd grad_block(const ParamVector& theta, Block block, const Basis& basis,
                           const Dataset& data, const GridSpec& grid);

/// Block values as a flat vector and back.
Eigen::VectorXd block_values(const ParamVector& theta, Block block);
void set_block(ParamVector& theta, Block block, const Eigen::VectorXd& values);

} // namespace shotlgcp
