#pragma once

#include <Eigen/Dense>
#include <vector>

#include "copaint/denoiser.hpp"
#include "copaint/rng.hpp"
#include "copaint/schedule.hpp"

namespace copaint {

/// Draw from the forward noising kernel at step t:
/// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * z. t = 0 returns x0
/// without consuming the rng.
Eigen::VectorXd forward_sample(const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x0, int t, Rng& rng);

/// Jump a state from step t to the later step t + tau along the forward
/// kernel: sqrt(r) * x_t + sqrt(1 - r) * z with r = alpha_bar(t+tau) /
/// alpha_bar(t). Requires 0 <= t and t + tau <= T, tau >= 1; t = 0 jumps a
/// finished state back up, which is how post-run rewind windows start.
Eigen::VectorXd time_travel(const NoiseSchedule& schedule,
                            const Eigen::VectorXd& x_t, int t, int tau,
                            Rng& rng);

struct DdimStepResult {
    Eigen::VectorXd x_prev;     // mu_tilde + sigma_t * z (z = 0 when sigma_t = 0)
    Eigen::VectorXd mu_tilde;
    Eigen::VectorXd x0_hat;
};

/// One reverse step t -> t-1 using the denoiser's clean-signal estimate.
/// No noise is drawn when sigma_t = 0, so seed-matched comparisons across
/// samplers stay aligned.
DdimStepResult ddim_step(const NoiseSchedule& schedule, const Denoiser& denoiser,
                         const Eigen::VectorXd& x_t, int t, Rng& rng);

/// Same reverse step with a caller-supplied clean estimate in place of the
/// denoiser call (used by projection-style samplers).
DdimStepResult ddim_step_from_x0(const NoiseSchedule& schedule,
                                 const Eigen::VectorXd& x_t, int t,
                                 const Eigen::VectorXd& x0_hat, Rng& rng);

/// Forward pass of a deterministic (sigma = 0) clean-signal estimate,
/// retaining the visited states so the transposed Jacobian of the whole
/// composition can be applied afterwards.
struct X0Trace {
    std::vector<int> ts;                // visited steps, strictly decreasing
    std::vector<Eigen::VectorXd> xs;    // states at those steps
    Eigen::VectorXd x0;                 // final clean estimate
};

/// Multi-step clean-signal estimate from (x_t, t): substeps == 1 is exactly
/// one denoiser call; substeps > 1 runs substeps-1 deterministic jumps over
/// an evenly spaced index grid from t toward 1, then one final denoiser
/// call. substeps larger than t clamps to the t available indices.
X0Trace estimate_x0(const NoiseSchedule& schedule, const Denoiser& denoiser,
                    const Eigen::VectorXd& x_t, int t, int substeps);

/// Transposed Jacobian of the estimate_x0 map at the traced point.
Eigen::VectorXd estimate_x0_vjp(const X0Trace& trace,
                                const NoiseSchedule& schedule,
                                const Denoiser& denoiser,
                                const Eigen::VectorXd& v);

/// Full deterministic reverse rollout from (x_start, t_start) to the clean
/// estimate: equivalent to estimate_x0 with substeps = t_start.
X0Trace rollout_deterministic(const NoiseSchedule& schedule,
                              const Denoiser& denoiser,
                              const Eigen::VectorXd& x_start, int t_start);

}  // namespace copaint
