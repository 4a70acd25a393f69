#include "copaint/denoiser.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "copaint/errors.hpp"
#include "copaint/io.hpp"

namespace copaint {

GaussianWorld::GaussianWorld(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size())
        throw std::invalid_argument("gaussian world: shape mismatch");
    if (!cov_.isApprox(cov_.transpose(), 1e-12))
        throw std::invalid_argument("gaussian world: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(
            "gaussian world: covariance not positive definite");
}

void save_gaussian_world(const GaussianWorld& world, std::ostream& out) {
    const int n = world.dim();
    out << "gaussian " << n << "\n";
    for (int i = 0; i < n; ++i)
        out << format_double(world.mean()[i]) << (i + 1 == n ? "" : " ");
    out << "\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            out << format_double(world.cov()(i, j)) << (j + 1 == n ? "" : " ");
        out << "\n";
    }
}

GaussianWorld load_gaussian_world(std::istream& in) {
    std::string tag;
    int n = 0;
    in >> tag >> n;
    if (!in || tag != "gaussian" || n < 1)
        throw std::invalid_argument("gaussian world: bad header");
    Eigen::VectorXd mean(n);
    for (int i = 0; i < n; ++i) in >> mean[i];
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) in >> cov(i, j);
    if (!in) throw std::invalid_argument("gaussian world: truncated payload");
    return GaussianWorld(std::move(mean), std::move(cov));
}

GaussianDenoiser::GaussianDenoiser(GaussianWorld world,
                                   const NoiseSchedule& schedule)
    : world_(std::move(world)) {
    const int T = schedule.T();
    const int n = world_.dim();
    const Eigen::MatrixXd& S = world_.cov();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    sqrt_alpha_bar_.resize(T + 1);
    response_.resize(T);
    sqrt_alpha_bar_[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
        double ab = schedule.alpha_bar(t);
        sqrt_alpha_bar_[t] = std::sqrt(ab);
        Eigen::MatrixXd A = ab * S + (1.0 - ab) * I;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success)
            throw NumericError("gaussian denoiser: singular channel at step " +
                               std::to_string(t));
        // B = sqrt(ab) * S * A^-1; S and A commute, so B is symmetric.
        response_[t - 1] = sqrt_alpha_bar_[t] * llt.solve(S);
    }
}

const Eigen::MatrixXd& GaussianDenoiser::response(int t) const {
    if (t < 1 || t > static_cast<int>(response_.size()))
        throw std::invalid_argument("gaussian denoiser: step out of range");
    return response_[t - 1];
}

Eigen::VectorXd GaussianDenoiser::value(const Eigen::VectorXd& x, int t) const {
    const Eigen::MatrixXd& B = response(t);
    return world_.mean() + B * (x - sqrt_alpha_bar_[t] * world_.mean());
}

Eigen::VectorXd GaussianDenoiser::vjp(const Eigen::VectorXd& x, int t,
                                      const Eigen::VectorXd& v) const {
    (void)x;  // the Jacobian is constant in x
    return response(t).transpose() * v;
}

}  // namespace copaint
