#pragma once

#include <Eigen/Dense>

#include "copaint/conditioning.hpp"
#include "copaint/denoiser.hpp"
#include "copaint/schedule.hpp"

namespace copaint {

/// Exact conditional law of the hidden coordinates of a Gaussian prior
/// given the revealed ones. Indices refer to the original world ordering.
struct ConditionalGaussian {
    std::vector<int> revealed;      // ascending
    std::vector<int> unrevealed;    // ascending
    Eigen::VectorXd mean;           // over unrevealed coordinates
    Eigen::MatrixXd cov;
};

/// Schur-complement conditioning of `world` on a pixel-mask observation.
/// Exact reference for sampler comparisons; guarded to dim <= 64 since it
/// is a desk-scale oracle, not a production path. Throws
/// std::invalid_argument for non-mask operators or oversized worlds, and
/// NumericError if the revealed block is numerically singular.
ConditionalGaussian condition(const GaussianWorld& world,
                              const Observation& obs);

/// Exact forward marginal of the noisy state at step t:
/// N(sqrt(ab_t) * mean, ab_t * cov + (1 - ab_t) * I).
struct GaussianLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};
GaussianLaw exact_marginal(const GaussianWorld& world,
                           const NoiseSchedule& schedule, int t);

}  // namespace copaint
