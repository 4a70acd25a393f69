#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "copaint/denoiser.hpp"
#include "copaint/rng.hpp"

namespace copaint {

/// Gaussian prior with unit variances and correlation rho across mirror
/// pairs (i, N-1-i). dim must be even and rho in (-1, 1) for positive
/// definiteness.
GaussianWorld mirror_world(int dim, double rho);

/// Exactly mirror-symmetric training vectors: an independent normal half
/// vector scaled to land well inside [-1, 1] (clamped on the rare
/// excursion), reflected onto the second half. dim must be even.
std::vector<Eigen::VectorXd> mirror_dataset(int n_samples, int dim,
                                            std::uint64_t seed);

/// Samples from a Gaussian world, clamped coordinate-wise to [-1, 1].
std::vector<Eigen::VectorXd> gaussian_sample_dataset(const GaussianWorld& world,
                                                     int n_samples,
                                                     std::uint64_t seed);

/// All *.pgm files of a directory, sorted by filename, as state vectors.
/// Every image must share the first image's dimensions.
std::vector<Eigen::VectorXd> image_dir_dataset(const std::filesystem::path& dir);

}  // namespace copaint
