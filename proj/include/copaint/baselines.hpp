#pragma once

#include "copaint/copaint.hpp"

namespace copaint {

/// Replacement baseline: after every reverse step, overwrite the revealed
/// coordinates with a forward-noised copy of the reference values (noiseless
/// at the final step, so the mask constraint holds exactly). Pixel masks
/// only. With an empty mask this is unconditional sampling, matching the
/// plain sampler draw for draw.
RunResult blended_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const Observation& obs, const CoPaintConfig& config,
                      Rng& rng);

/// Null-space projection baseline: each reverse step replaces the clean
/// estimate by x0_hat + pinv(s0 - r(x0_hat)) before the update. Works for
/// any operator; the final step makes r(x0) = s0 exact.
RunResult ddnm_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                   const Observation& obs, const CoPaintConfig& config,
                   Rng& rng);

/// Replacement baseline on the time-travel visit plan (tau, K from the
/// config, no gradient steps). K = 0 reduces to blended_run exactly.
RunResult repaint_lite_run(const NoiseSchedule& schedule,
                           const Denoiser& denoiser, const Observation& obs,
                           const CoPaintConfig& config, Rng& rng);

/// Dispatch by method (copaint variants included) after preset_config.
RunResult run_method(Method method, const NoiseSchedule& schedule,
                     const Denoiser& denoiser, const Observation& obs,
                     const CoPaintConfig& config, Rng& rng);

}  // namespace copaint
