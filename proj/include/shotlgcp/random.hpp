#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace shotlgcp {

using Rng = std::mt19937_64;

/// Independent stream for (seed, a, b); used per game, per chain and per
/// evaluation repetition so that output does not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng);

/// Draw from IG(shape, rate): density proportional to x^{-shape-1} exp(-rate / x).
double draw_inverse_gamma(double shape, double rate, Rng& rng);

} // namespace shotlgcp
