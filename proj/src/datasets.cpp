#include "copaint/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "copaint/io.hpp"

namespace copaint {

GaussianWorld mirror_world(int dim, double rho) {
    if (dim < 2 || dim % 2 != 0)
        throw std::invalid_argument("mirror_world: even dim >= 2 required");
    if (!(rho > -1.0 && rho < 1.0))
        throw std::invalid_argument("mirror_world: rho must lie in (-1, 1)");
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 0; i < dim / 2; ++i) {
        cov(i, dim - 1 - i) = rho;
        cov(dim - 1 - i, i) = rho;
    }
    return GaussianWorld(Eigen::VectorXd::Zero(dim), std::move(cov));
}

std::vector<Eigen::VectorXd> mirror_dataset(int n_samples, int dim,
                                            std::uint64_t seed) {
    if (n_samples < 1)
        throw std::invalid_argument("mirror_dataset: n_samples must be >= 1");
    if (dim < 2 || dim % 2 != 0)
        throw std::invalid_argument("mirror_dataset: even dim >= 2 required");
    Rng rng(seed);
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim / 2; ++i) {
            double v = std::clamp(0.45 * rng.normal(), -1.0, 1.0);
            x[i] = v;
            x[dim - 1 - i] = v;
        }
        samples.push_back(std::move(x));
    }
    return samples;
}

std::vector<Eigen::VectorXd> gaussian_sample_dataset(const GaussianWorld& world,
                                                     int n_samples,
                                                     std::uint64_t seed) {
    if (n_samples < 1)
        throw std::invalid_argument(
            "gaussian_sample_dataset: n_samples must be >= 1");
    Eigen::LLT<Eigen::MatrixXd> llt(world.cov());
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(
            "gaussian_sample_dataset: covariance not positive definite");
    Eigen::MatrixXd chol = llt.matrixL();
    Rng rng(seed);
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd x =
            world.mean() + chol * rng.normal_vector(world.dim());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], -1.0, 1.0);
        samples.push_back(std::move(x));
    }
    return samples;
}

std::vector<Eigen::VectorXd> image_dir_dataset(
    const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            paths.push_back(entry.path());
    if (paths.empty())
        throw std::invalid_argument("image_dir_dataset: no .pgm files in " +
                                    dir.string());
    std::sort(paths.begin(), paths.end(),
              [](const std::filesystem::path& a, const std::filesystem::path& b) {
                  return a.filename().string() < b.filename().string();
              });

    std::vector<Eigen::VectorXd> samples;
    samples.reserve(paths.size());
    int height = 0;
    int width = 0;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::invalid_argument("cannot read image: " + path.string());
        PgmImage image = load_pgm(in);
        if (samples.empty()) {
            height = image.height;
            width = image.width;
        } else if (image.height != height || image.width != width) {
            throw std::invalid_argument("image size mismatch: " + path.string());
        }
        samples.push_back(state_from_pgm(image));
    }
    return samples;
}

}  // namespace copaint
