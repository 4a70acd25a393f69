#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "copaint/schedule.hpp"

namespace copaint {

/// Posterior-mean predictor interface: value(x, t) estimates the clean
/// signal from a noisy state at step t of the schedule the backend was
/// built against; vjp(x, t, v) applies the transposed Jacobian of that map.
class Denoiser {
  public:
    virtual ~Denoiser() = default;
    virtual int dim() const = 0;
    virtual Eigen::VectorXd value(const Eigen::VectorXd& x, int t) const = 0;
    virtual Eigen::VectorXd vjp(const Eigen::VectorXd& x, int t,
                                const Eigen::VectorXd& v) const = 0;
};

/// Gaussian prior N(mean, cov). cov must be symmetric positive definite;
/// the constructor attempts a Cholesky factorization and throws
/// std::invalid_argument if it fails.
class GaussianWorld {
  public:
    GaussianWorld(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }

  private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// Write/read the plain-text world format:
///   "gaussian N\n" + one mean line + N covariance rows.
void save_gaussian_world(const GaussianWorld& world, std::ostream& out);
GaussianWorld load_gaussian_world(std::istream& in);

/// Exact conditional-mean denoiser for a Gaussian prior under the forward
/// noising kernel. Linear in x with a constant per-step Jacobian; all T
/// response matrices are factored once at construction. Throws
/// NumericError if any per-step solve is numerically singular.
class GaussianDenoiser : public Denoiser {
  public:
    GaussianDenoiser(GaussianWorld world, const NoiseSchedule& schedule);

    int dim() const override { return world_.dim(); }
    Eigen::VectorXd value(const Eigen::VectorXd& x, int t) const override;
    Eigen::VectorXd vjp(const Eigen::VectorXd& x, int t,
                        const Eigen::VectorXd& v) const override;

    /// Per-step response matrix B_t with value = mean + B_t (x - sqrt(ab)*mean).
    const Eigen::MatrixXd& response(int t) const;
    const GaussianWorld& world() const { return world_; }

  private:
    GaussianWorld world_;
    std::vector<double> sqrt_alpha_bar_;
    std::vector<Eigen::MatrixXd> response_;  // one per t = 1..T
};

}  // namespace copaint
