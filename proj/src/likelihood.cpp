#include "shotlgcp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "shotlgcp/error.hpp"

namespace shotlgcp {

const char* block_name(Block b) {
  switch (b) {
  case Block::Intercept: return "theta0";
  case Block::Missed: return "theta_beta0";
  case Block::Made: return "theta_beta1";
  }
  return "?";
}

namespace {

struct ZLess {
  bool operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

} // namespace

LikelihoodContext::LikelihoodContext(const Basis& basis, const Dataset& data, const GridSpec& grid)
    : basis_(basis), p_(data.p()) {
  if (data.games.empty()) {
    throw DataError("likelihood needs at least one game");
  }
  data.validate();
  inv_xi_ = basis_.eigenvalues().cwiseInverse();

  cache_.grid = grid;
  cache_.cell_area = grid.cell_area();
  const auto centers = grid.centers();
  cache_.phi_grid = basis_.evaluate(centers);

  const int L = basis_.size();
  std::map<Eigen::VectorXd, CovariateGroup, ZLess> groups;
  for (const auto& game : data.games) {
    auto [it, inserted] = groups.try_emplace(game.z);
    auto& group = it->second;
    if (inserted) {
      group.z = game.z;
      group.shot_phi_sum = {Eigen::VectorXd::Zero(L), Eigen::VectorXd::Zero(L)};
    }
    ++group.games;
    for (const auto& shot : game.shots) {
      group.shot_phi_sum[index_of(shot.outcome)] += basis_.evaluate(shot.location).transpose();
    }
  }
  for (auto& [z, group] : groups) cache_.groups.push_back(std::move(group));
}

void LikelihoodContext::check(const ParamVector& theta) const {
  if (theta.basis_size() != basis_.size() || theta.p() != p_) {
    throw DimensionError("parameter vector does not match basis size " +
                         std::to_string(basis_.size()) + " and p = " + std::to_string(p_));
  }
  if (!(theta.sigma0_sq > 0.0) || !(theta.sigma_beta_sq > 0.0)) {
    throw ParameterError("hypervariances must be positive");
  }
}

double LikelihoodContext::integral(const ParamVector& theta, const Eigen::VectorXd& z,
                                   ShotType j) const {
  const Eigen::VectorXd w = theta.effective_weights(z, j);
  return (cache_.phi_grid * w).array().exp().sum() * cache_.cell_area;
}

double LikelihoodContext::log_posterior(const ParamVector& theta) const {
  check(theta);
  double value = 0.0;
  for (const auto& group : cache_.groups) {
    for (ShotType j : kShotTypes) {
      const Eigen::VectorXd w = theta.effective_weights(group.z, j);
      const double integral = (cache_.phi_grid * w).array().exp().sum() * cache_.cell_area;
      value += -group.games * integral + group.shot_phi_sum[index_of(j)].dot(w);
    }
  }
  return value - prior_term(theta);
}

double LikelihoodContext::prior_term(const ParamVector& theta) const {
  const int L = basis_.size();
  const double prior0 = theta.theta0.cwiseAbs2().dot(inv_xi_);
  double prior_beta = 0.0;
  for (const auto& beta : theta.theta_beta) {
    for (int k = 0; k < p_; ++k) {
      prior_beta += beta.segment(static_cast<Eigen::Index>(k) * L, L).cwiseAbs2().dot(inv_xi_);
    }
  }
  return 0.5 * (prior0 / theta.sigma0_sq + prior_beta / theta.sigma_beta_sq);
}

LikelihoodContext::BlockValue LikelihoodContext::evaluate_block(const ParamVector& theta,
                                                                Block block) const {
  check(theta);
  const int L = basis_.size();
  BlockValue out;
  out.gradient = block == Block::Intercept
                     ? Eigen::VectorXd::Zero(L)
                     : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p_) * L);

  double value = 0.0;
  for (const auto& group : cache_.groups) {
    for (ShotType j : kShotTypes) {
      const Eigen::VectorXd w = theta.effective_weights(group.z, j);
      const Eigen::ArrayXd lambda = (cache_.phi_grid * w).array().exp();
      const double integral = lambda.sum() * cache_.cell_area;
      const auto& shot_sum = group.shot_phi_sum[index_of(j)];
      value += -group.games * integral + shot_sum.dot(w);

      const bool affects = block == Block::Intercept || shot_type_of(block) == j;
      if (!affects) continue;
      // d/dw of the data terms for this (group, type).
      const Eigen::VectorXd residual =
          shot_sum - (group.games * cache_.cell_area) * (cache_.phi_grid.transpose() * lambda.matrix());
      if (block == Block::Intercept) {
        out.gradient += residual;
      } else {
        for (int k = 0; k < p_; ++k) {
          if (group.z[k] != 0.0) {
            out.gradient.segment(static_cast<Eigen::Index>(k) * L, L) += group.z[k] * residual;
          }
        }
      }
    }
  }

  out.log_posterior = value - prior_term(theta);

  if (block == Block::Intercept) {
    out.gradient -= theta.theta0.cwiseProduct(inv_xi_) / theta.sigma0_sq;
  } else {
    const auto& beta = theta.theta_beta[index_of(shot_type_of(block))];
    for (int k = 0; k < p_; ++k) {
      const auto seg = static_cast<Eigen::Index>(k) * L;
      out.gradient.segment(seg, L) -= beta.segment(seg, L).cwiseProduct(inv_xi_) / theta.sigma_beta_sq;
    }
  }
  return out;
}

double log_intensity(const ParamVector& theta, const Basis& basis, const Eigen::VectorXd& z,
                     ShotType j, Point2 s) {
  if (theta.basis_size() != basis.size()) {
    throw DimensionError("parameter vector and basis sizes differ");
  }
  return basis.evaluate(s).dot(theta.effective_weights(z, j));
}

double integral_approx(const ParamVector& theta, const Basis& basis, const Eigen::VectorXd& z,
                       ShotType j, const GridSpec& grid) {
  const Eigen::VectorXd w = theta.effective_weights(z, j);
  const auto centers = grid.centers();
  const Eigen::MatrixXd phi = basis.evaluate(centers);
  return (phi * w).array().exp().sum() * grid.cell_area();
}

double integral_approx(const std::function<double(Point2)>& log_lambda, const GridSpec& grid) {
  double total = 0.0;
  for (int h = 0; h < grid.cell_count(); ++h) total += std::exp(log_lambda(grid.center(h)));
  return total * grid.cell_area();
}

double log_posterior(const ParamVector& theta, const Basis& basis, const Dataset& data,
                     const GridSpec& grid) {
  return LikelihoodContext(basis, data, grid).log_posterior(theta);
}

Eigen::VectorXd grad_block(const ParamVector& theta, Block block, const Basis& basis,
                           const Dataset& data, const GridSpec& grid) {
  return LikelihoodContext(basis, data, grid).grad_block(theta, block);
}

Eigen::VectorXd block_values(const ParamVector& theta, Block block) {
  switch (block) {
  case Block::Intercept: return theta.theta0;
  case Block::Missed: return theta.theta_beta[0];
  case Block::Made: return theta.theta_beta[1];
  }
  return {};
}

void set_block(ParamVector& theta, Block block, const Eigen::VectorXd& values) {
  Eigen::VectorXd& target = block == Block::Intercept ? theta.theta0
                            : block == Block::Missed  ? theta.theta_beta[0]
                                                      : theta.theta_beta[1];
  if (target.size() != values.size()) {
    throw DimensionError(std::string("block ") + block_name(block) + " has the wrong length");
  }
  target = values;
}

} // namespace shotlgcp
