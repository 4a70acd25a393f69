#include "copaint/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace copaint {

namespace {

// Deterministic reverse-jump coefficients from step a to the earlier step
// b with a clean estimate f: x_b = scale * x_a + (anchor - scale * sqrt(ab_a)) * f,
// written as x_b = sqrt(ab_b) * f + scale * (x_a - sqrt(ab_a) * f).
struct JumpCoeffs {
    double to_clean;   // sqrt(ab_b)
    double carry;      // sqrt((1 - ab_b - sigma^2) / (1 - ab_a))
    double from_a;     // sqrt(ab_a)
};

JumpCoeffs jump_coeffs(const NoiseSchedule& schedule, int a, int b,
                       double sigma) {
    double ab_a = schedule.alpha_bar(a);
    double ab_b = schedule.alpha_bar(b);
    double det_var = 1.0 - ab_b - sigma * sigma;
    if (det_var < 0.0) det_var = 0.0;  // roundoff guard; the budget holds by construction
    return {std::sqrt(ab_b), std::sqrt(det_var / (1.0 - ab_a)), std::sqrt(ab_a)};
}

Eigen::VectorXd apply_jump(const JumpCoeffs& c, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x0_hat) {
    return c.to_clean * x0_hat + c.carry * (x - c.from_a * x0_hat);
}

std::vector<int> substep_grid(int t, int substeps) {
    if (substeps < 1)
        throw std::invalid_argument("estimate_x0: substeps must be >= 1");
    int H = std::min(substeps, t);  // clamp when fewer indices are available
    std::vector<int> ts;
    ts.reserve(static_cast<std::size_t>(H));
    if (H == 1) {
        ts.push_back(t);
        return ts;
    }
    for (int j = 0; j < H; ++j) {
        double pos = t - static_cast<double>(t - 1) * j / (H - 1);
        int idx = static_cast<int>(std::llround(pos));
        if (ts.empty() || idx < ts.back()) ts.push_back(idx);
    }
    return ts;
}

}  // namespace

Eigen::VectorXd forward_sample(const NoiseSchedule& schedule,
                               const Eigen::VectorXd& x0, int t, Rng& rng) {
    if (t == 0) return x0;
    double ab = schedule.alpha_bar(t);
    return std::sqrt(ab) * x0 +
           std::sqrt(1.0 - ab) * rng.normal_vector(x0.size());
}

Eigen::VectorXd time_travel(const NoiseSchedule& schedule,
                            const Eigen::VectorXd& x_t, int t, int tau,
                            Rng& rng) {
    if (tau < 1) throw std::invalid_argument("time_travel: tau must be >= 1");
    if (t < 0 || t + tau > schedule.T())
        throw std::invalid_argument("time_travel: jump leaves the schedule");
    double ratio = schedule.alpha_bar(t + tau) / schedule.alpha_bar(t);
    return std::sqrt(ratio) * x_t +
           std::sqrt(1.0 - ratio) * rng.normal_vector(x_t.size());
}

DdimStepResult ddim_step_from_x0(const NoiseSchedule& schedule,
                                 const Eigen::VectorXd& x_t, int t,
                                 const Eigen::VectorXd& x0_hat, Rng& rng) {
    double sigma = schedule.sigma(t);
    JumpCoeffs c = jump_coeffs(schedule, t, t - 1, sigma);
    DdimStepResult r;
    r.x0_hat = x0_hat;
    r.mu_tilde = apply_jump(c, x_t, x0_hat);
    if (sigma > 0.0)
        r.x_prev = r.mu_tilde + sigma * rng.normal_vector(x_t.size());
    else
        r.x_prev = r.mu_tilde;
    return r;
}

DdimStepResult ddim_step(const NoiseSchedule& schedule, const Denoiser& denoiser,
                         const Eigen::VectorXd& x_t, int t, Rng& rng) {
    return ddim_step_from_x0(schedule, x_t, t, denoiser.value(x_t, t), rng);
}

X0Trace estimate_x0(const NoiseSchedule& schedule, const Denoiser& denoiser,
                    const Eigen::VectorXd& x_t, int t, int substeps) {
    if (t < 1 || t > schedule.T())
        throw std::invalid_argument("estimate_x0: step out of range");
    X0Trace trace;
    trace.ts = substep_grid(t, substeps);
    trace.xs.reserve(trace.ts.size());
    Eigen::VectorXd x = x_t;
    for (std::size_t j = 0; j + 1 < trace.ts.size(); ++j) {
        trace.xs.push_back(x);
        Eigen::VectorXd f = denoiser.value(x, trace.ts[j]);
        JumpCoeffs c = jump_coeffs(schedule, trace.ts[j], trace.ts[j + 1], 0.0);
        x = apply_jump(c, x, f);
    }
    trace.xs.push_back(x);
    trace.x0 = denoiser.value(x, trace.ts.back());
    return trace;
}

Eigen::VectorXd estimate_x0_vjp(const X0Trace& trace,
                                const NoiseSchedule& schedule,
                                const Denoiser& denoiser,
                                const Eigen::VectorXd& v) {
    Eigen::VectorXd g = denoiser.vjp(trace.xs.back(), trace.ts.back(), v);
    for (int j = static_cast<int>(trace.ts.size()) - 2; j >= 0; --j) {
        JumpCoeffs c = jump_coeffs(schedule, trace.ts[j], trace.ts[j + 1], 0.0);
        double through_clean = c.to_clean - c.carry * c.from_a;
        Eigen::VectorXd back =
            denoiser.vjp(trace.xs[static_cast<std::size_t>(j)], trace.ts[j], g);
        g = c.carry * g + through_clean * back;
    }
    return g;
}

X0Trace rollout_deterministic(const NoiseSchedule& schedule,
                              const Denoiser& denoiser,
                              const Eigen::VectorXd& x_start, int t_start) {
    return estimate_x0(schedule, denoiser, x_start, t_start, t_start);
}

}  // namespace copaint
