#include "copaint/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "copaint/errors.hpp"

namespace copaint {

namespace {

void require_pixel_mask(const Observation& obs, const char* who) {
    if (obs.op.kind() != RevealOperator::Kind::PixelMask)
        throw std::invalid_argument(std::string(who) +
                                    ": pixel-mask operators only");
}

double elapsed_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

// Overwrite the revealed coordinates of x at noise level t_prev with the
// forward-noised reference values; exact (noiseless) at t_prev = 0. Draws
// nothing when the mask is empty, so empty-mask runs stay draw-for-draw
// equal to unconditional sampling.
void blend_revealed(const NoiseSchedule& schedule, const Observation& obs,
                    int t_prev, Eigen::VectorXd& x, Rng& rng) {
    const auto& idx = obs.op.revealed_indices();
    if (idx.empty()) return;
    if (t_prev == 0) {
        for (std::size_t j = 0; j < idx.size(); ++j)
            x[idx[j]] = obs.s0[static_cast<Eigen::Index>(j)];
        return;
    }
    const double root_ab = std::sqrt(schedule.alpha_bar(t_prev));
    const double root_res = std::sqrt(1.0 - schedule.alpha_bar(t_prev));
    Eigen::VectorXd z = rng.normal_vector(x.size());
    for (std::size_t j = 0; j < idx.size(); ++j)
        x[idx[j]] =
            root_ab * obs.s0[static_cast<Eigen::Index>(j)] + root_res * z[idx[j]];
}

// Shared walker for the replacement baselines: blended is the K = 0 case,
// repaint-lite runs the full rewind plan. No gradient steps anywhere.
RunResult replacement_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                          const Observation& obs, const CoPaintConfig& config,
                          Rng& rng, int tau, int K, const char* who) {
    require_pixel_mask(obs, who);
    if (config.T != schedule.T())
        throw std::invalid_argument(std::string(who) +
                                    ": config.T must equal schedule.T");
    if (obs.op.input_dim() != denoiser.dim())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");

    const auto start = std::chrono::steady_clock::now();
    const int n = denoiser.dim();

    RunResult result;
    Eigen::VectorXd x = rng.normal_vector(n);
    int visit = 0;

    for (const VisitEvent& ev : build_visit_plan(config.T, tau, K)) {
        if (ev.type == VisitEvent::Type::Step) {
            Eigen::VectorXd x0_hat = denoiser.value(x, ev.t);
            DdimStepResult step =
                ddim_step_from_x0(schedule, x, ev.t, x0_hat, rng);
            x = std::move(step.x_prev);
            blend_revealed(schedule, obs, ev.t - 1, x, rng);
            result.record.entries.push_back(
                {visit++, ev.t, 0.0, 0.0,
                 (obs.op.apply(x0_hat) - obs.s0).norm(), std::nullopt});
        } else {
            x = time_travel(schedule, x, ev.t, tau, rng);
        }
        if (!x.allFinite())
            throw NumericError(std::string(who) + ": non-finite state at step " +
                               std::to_string(ev.t));
    }

    result.record.seconds = elapsed_since(start);
    result.record.x0 = x;
    result.x0 = std::move(x);
    return result;
}

}  // namespace

RunResult blended_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const Observation& obs, const CoPaintConfig& config,
                      Rng& rng) {
    return replacement_run(schedule, denoiser, obs, config, rng, config.tau, 0,
                           "blended_run");
}

RunResult repaint_lite_run(const NoiseSchedule& schedule,
                           const Denoiser& denoiser, const Observation& obs,
                           const CoPaintConfig& config, Rng& rng) {
    return replacement_run(schedule, denoiser, obs, config, rng, config.tau,
                           config.K, "repaint_lite_run");
}

RunResult ddnm_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                   const Observation& obs, const CoPaintConfig& config,
                   Rng& rng) {
    if (config.T != schedule.T())
        throw std::invalid_argument("ddnm_run: config.T must equal schedule.T");
    if (obs.op.input_dim() != denoiser.dim())
        throw std::invalid_argument("ddnm_run: dimension mismatch");

    const auto start = std::chrono::steady_clock::now();
    const int n = denoiser.dim();

    RunResult result;
    Eigen::VectorXd x = rng.normal_vector(n);
    int visit = 0;

    for (int t = schedule.T(); t >= 1; --t) {
        Eigen::VectorXd x0_hat = denoiser.value(x, t);
        if (obs.op.kind() == RevealOperator::Kind::PixelMask) {
            const auto& idx = obs.op.revealed_indices();
            for (std::size_t j = 0; j < idx.size(); ++j)
                x0_hat[idx[j]] = obs.s0[static_cast<Eigen::Index>(j)];
        } else {
            x0_hat += obs.op.pinv_apply(obs.s0 - obs.op.apply(x0_hat));
        }
        DdimStepResult step = ddim_step_from_x0(schedule, x, t, x0_hat, rng);
        x = std::move(step.x_prev);
        result.record.entries.push_back(
            {visit++, t, 0.0, 0.0, (obs.op.apply(x0_hat) - obs.s0).norm(),
             std::nullopt});
        if (!x.allFinite())
            throw NumericError("ddnm_run: non-finite state at step " +
                               std::to_string(t));
    }

    result.record.seconds = elapsed_since(start);
    result.record.x0 = x;
    result.x0 = std::move(x);
    return result;
}

RunResult run_method(Method method, const NoiseSchedule& schedule,
                     const Denoiser& denoiser, const Observation& obs,
                     const CoPaintConfig& config, Rng& rng) {
    switch (method) {
        case Method::Copaint:
        case Method::CopaintTT:
        case Method::CopaintFast:
            return copaint_run(schedule, denoiser, obs, config, rng);
        case Method::Blended:
            return blended_run(schedule, denoiser, obs, config, rng);
        case Method::Ddnm:
            return ddnm_run(schedule, denoiser, obs, config, rng);
        case Method::RepaintLite:
            return repaint_lite_run(schedule, denoiser, obs, config, rng);
    }
    throw std::invalid_argument("run_method: unknown method enum");
}

}  // namespace copaint
