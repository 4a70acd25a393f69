#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "copaint/conditioning.hpp"
#include "copaint/denoiser.hpp"
#include "copaint/rng.hpp"
#include "copaint/sampler.hpp"
#include "copaint/schedule.hpp"

namespace copaint {

struct CoPaintConfig {
    int T = 250;             // reverse sampling steps; must equal schedule.T()
    int G = 2;               // gradient steps per visited state
    double eta0 = 0.02;      // learning-rate scale: lr(t) = eta0 * sqrt(ab_t)
    double xi_decay = 1.012; // constraint weight: xi2(t) = xi_decay^-(T-t)
    int tau = 10;            // time-travel window length
    int K = 1;               // rewinds per window
    int H = 1;               // substeps of the clean-signal estimate
    double sigma_eta = 1.0;  // reverse-noise scale passed to the schedule
    std::uint64_t seed = 0;

    // Exact constraint write-back on the final state. Unset resolves to
    // "on" for pixel masks and "off" for pooling operators.
    std::optional<bool> final_projection;

    // Full-rollout prototype knobs. prototype_lr <= 0 selects
    // 0.5 * prototype_xi^2, the largest step that keeps the constraint
    // term's descent monotone for unit-scale operators.
    int prototype_steps = 200;
    double prototype_xi = 1e-3;
    double prototype_lr = 0.0;
};

/// Squared constraint weight xi'^2 at step t.
double xi_schedule(const CoPaintConfig& config, int t);

/// Gradient step size at step t: eta0 * sqrt(alpha_bar_t).
double learning_rate(const CoPaintConfig& config, const NoiseSchedule& schedule,
                     int t);

/// Gaussian tether for the state being optimized: the mean the state was
/// generated around and that generator's variance. Reverse steps record
/// (mu_tilde, sigma_t^2); time-travel jumps record the forward-kernel pair.
struct Anchor {
    Eigen::VectorXd mu;
    double var = 0.0;
};

/// Objective at a visited state:
///   with anchor:  |x - mu|^2 / (2 var) + |s0 - r(f(x))|^2 / (2 xi2(t))
///   without:      |x|^2 / 2            + |s0 - r(f(x))|^2 / (2 xi2(t))
/// where f is the clean-signal estimate with config.H substeps. The
/// no-anchor form applies only to the freshly drawn top state. Anchors with
/// var = 0 are rejected here; optimize_step handles that regime.
double step_loss(const NoiseSchedule& schedule, const Denoiser& denoiser,
                 const Observation& obs, const Eigen::VectorXd& x, int t,
                 const std::optional<Anchor>& anchor,
                 const CoPaintConfig& config);

/// Exact gradient of step_loss at x.
Eigen::VectorXd step_grad(const NoiseSchedule& schedule, const Denoiser& denoiser,
                          const Observation& obs, const Eigen::VectorXd& x, int t,
                          const std::optional<Anchor>& anchor,
                          const CoPaintConfig& config);

/// G plain gradient-descent updates of step_loss with step size lr(t).
/// Stiff-anchor regime: when lr(t) / var reaches 2 (or var = 0), descent on
/// the tether term would diverge, so the state is reset to the anchor mean
/// and the G updates descend the constraint term alone, realizing the
/// var -> 0 limit of the objective. G = 0 returns x_init unchanged. Throws
/// NumericError on non-finite loss or gradient, naming t.
Eigen::VectorXd optimize_step(const NoiseSchedule& schedule,
                              const Denoiser& denoiser, const Observation& obs,
                              const Eigen::VectorXd& x_init, int t,
                              const std::optional<Anchor>& anchor,
                              const CoPaintConfig& config);

struct RunRecordEntry {
    int visit_index = 0;
    int t = 0;
    double loss_pre = 0.0;   // objective value entering the visit
    double loss_post = 0.0;  // objective value after optimization
    double residual = 0.0;   // |s0 - r(f(x))|_2 after optimization
    std::optional<Anchor> anchor;  // tether used at this visit (none at the top)
};

struct RunRecord {
    std::vector<RunRecordEntry> entries;
    Eigen::VectorXd x0;
    double seconds = 0.0;
};

struct RunResult {
    Eigen::VectorXd x0;
    RunRecord record;
};

/// Visit plan for a run with rewinds: a Step event optimizes at t and
/// steps to t-1; a Rewind event jumps the state from t up to t+tau. With
/// K = 0 the plan is exactly Step(T)..Step(1). The plan depends only on
/// (T, tau, K), so paired methods share visit sequences by construction.
struct VisitEvent {
    enum class Type { Step, Rewind };
    Type type;
    int t;  // Step: the visited step. Rewind: the jump origin (lands at t+tau).
};
std::vector<VisitEvent> build_visit_plan(int T, int tau, int K);

/// Greedy per-step posterior maximization with optional time travel.
/// Draws the top state from N(0, I), then per visit: optimize the state
/// against its anchor and the constraint, record the visit, take one
/// reverse step (caching the new anchor). Rewind events resample the state
/// along the forward kernel and re-anchor to that kernel's mean/variance.
/// After the last step the final-projection rule (if resolved on) writes
/// the revealed values back exactly.
RunResult copaint_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const Observation& obs, const CoPaintConfig& config,
                      Rng& rng);

/// Full-rollout variant: optimizes the top state directly through the
/// deterministic rollout, minimizing |x|^2/2 + |s0 - r(g(x))|^2 / (2 xi^2)
/// with g the whole reverse composition. Desk-scale only: schedule.T()
/// must be <= 100.
RunResult prototype_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                        const Observation& obs, const CoPaintConfig& config,
                        Rng& rng);

/// Inpainting method selector shared by the tool and the test suites.
enum class Method { Copaint, CopaintTT, CopaintFast, Blended, Ddnm, RepaintLite };

/// Parse a method name ("copaint", "copaint-tt", "copaint-fast", "blended",
/// "ddnm", "repaint-lite"). Throws std::invalid_argument on unknown names.
Method parse_method(const std::string& name);
std::string method_name(Method method);

/// Preset adjustments applied on top of a base config:
///   copaint       K = 0
///   copaint-tt    tau = 10, K = 1
///   copaint-fast  G = 1, T = 100, K = 0
///   blended/ddnm  K = 0 (plain descent through the schedule)
///   repaint-lite  tau = 10, K = 1
CoPaintConfig preset_config(Method method, CoPaintConfig base);

}  // namespace copaint
