#include "copaint/copaint.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "copaint/errors.hpp"

namespace copaint {

double xi_schedule(const CoPaintConfig& config, int t) {
    if (t < 1 || t > config.T)
        throw std::invalid_argument("xi_schedule: step out of range");
    return std::pow(1.0 / config.xi_decay, static_cast<double>(config.T - t));
}

double learning_rate(const CoPaintConfig& config, const NoiseSchedule& schedule,
                     int t) {
    return config.eta0 * std::sqrt(schedule.alpha_bar(t));
}

namespace {

struct ConstraintEval {
    X0Trace trace;
    Eigen::VectorXd residual;  // r(f(x)) - s0
    double sq_norm = 0.0;
};

ConstraintEval eval_constraint(const NoiseSchedule& schedule,
                               const Denoiser& denoiser, const Observation& obs,
                               const Eigen::VectorXd& x, int t, int substeps) {
    ConstraintEval ce;
    ce.trace = estimate_x0(schedule, denoiser, x, t, substeps);
    ce.residual = obs.op.apply(ce.trace.x0) - obs.s0;
    ce.sq_norm = ce.residual.squaredNorm();
    return ce;
}

Eigen::VectorXd constraint_grad(const NoiseSchedule& schedule,
                                const Denoiser& denoiser, const Observation& obs,
                                const ConstraintEval& ce, double xi2) {
    return estimate_x0_vjp(ce.trace, schedule, denoiser,
                           obs.op.adjoint(ce.residual)) /
           xi2;
}

double tether_loss(const Eigen::VectorXd& x, const std::optional<Anchor>& anchor) {
    if (!anchor) return 0.5 * x.squaredNorm();
    return (x - anchor->mu).squaredNorm() / (2.0 * anchor->var);
}

Eigen::VectorXd tether_grad(const Eigen::VectorXd& x,
                            const std::optional<Anchor>& anchor) {
    if (!anchor) return x;
    return (x - anchor->mu) / anchor->var;
}

void check_anchor(const std::optional<Anchor>& anchor) {
    if (anchor && !(anchor->var > 0.0))
        throw std::invalid_argument("step objective: anchor variance must be > 0");
}

bool stiff_anchor(const NoiseSchedule& schedule, const CoPaintConfig& config,
                  int t, const std::optional<Anchor>& anchor) {
    if (!anchor) return false;
    if (!(anchor->var > 0.0)) return true;
    return learning_rate(config, schedule, t) / anchor->var >= 2.0;
}

struct VisitStats {
    double loss_pre = 0.0;
    double loss_post = 0.0;
    double residual = 0.0;
};

// Shared visit optimizer. In the stiff-anchor regime the recorded losses
// are the constraint term alone, since the tether is enforced by the reset
// rather than descended.
Eigen::VectorXd optimize_visit(const NoiseSchedule& schedule,
                               const Denoiser& denoiser, const Observation& obs,
                               Eigen::VectorXd x, int t,
                               const std::optional<Anchor>& anchor,
                               const CoPaintConfig& config, VisitStats* stats) {
    const double xi2 = xi_schedule(config, t);
    const double lr = learning_rate(config, schedule, t);
    const bool stiff = stiff_anchor(schedule, config, t, anchor);

    auto fail = [t](const char* what) {
        throw NumericError(std::string("optimize_step: ") + what + " at step " +
                           std::to_string(t));
    };

    ConstraintEval ce = eval_constraint(schedule, denoiser, obs, x, t, config.H);
    if (stats) {
        stats->loss_pre = ce.sq_norm / (2.0 * xi2);
        if (!stiff) stats->loss_pre += tether_loss(x, anchor);
        if (!std::isfinite(stats->loss_pre)) fail("non-finite loss");
    }

    if (config.G > 0) {
        if (stiff) {
            x = anchor->mu;
            ce = eval_constraint(schedule, denoiser, obs, x, t, config.H);
        }
        for (int g = 0; g < config.G; ++g) {
            Eigen::VectorXd grad = constraint_grad(schedule, denoiser, obs, ce, xi2);
            if (!stiff) grad += tether_grad(x, anchor);
            if (!grad.allFinite()) fail("non-finite gradient");
            x -= lr * grad;
            ce = eval_constraint(schedule, denoiser, obs, x, t, config.H);
        }
    }

    if (stats) {
        stats->loss_post = ce.sq_norm / (2.0 * xi2);
        if (!stiff) stats->loss_post += tether_loss(x, anchor);
        stats->residual = std::sqrt(ce.sq_norm);
        if (!std::isfinite(stats->loss_post)) fail("non-finite loss");
    }
    if (!x.allFinite()) fail("non-finite state");
    return x;
}

}  // namespace

double step_loss(const NoiseSchedule& schedule, const Denoiser& denoiser,
                 const Observation& obs, const Eigen::VectorXd& x, int t,
                 const std::optional<Anchor>& anchor,
                 const CoPaintConfig& config) {
    check_anchor(anchor);
    ConstraintEval ce = eval_constraint(schedule, denoiser, obs, x, t, config.H);
    return tether_loss(x, anchor) + ce.sq_norm / (2.0 * xi_schedule(config, t));
}

Eigen::VectorXd step_grad(const NoiseSchedule& schedule, const Denoiser& denoiser,
                          const Observation& obs, const Eigen::VectorXd& x, int t,
                          const std::optional<Anchor>& anchor,
                          const CoPaintConfig& config) {
    check_anchor(anchor);
    ConstraintEval ce = eval_constraint(schedule, denoiser, obs, x, t, config.H);
    return tether_grad(x, anchor) +
           constraint_grad(schedule, denoiser, obs, ce, xi_schedule(config, t));
}

Eigen::VectorXd optimize_step(const NoiseSchedule& schedule,
                              const Denoiser& denoiser, const Observation& obs,
                              const Eigen::VectorXd& x_init, int t,
                              const std::optional<Anchor>& anchor,
                              const CoPaintConfig& config) {
    if (config.G == 0) return x_init;
    return optimize_visit(schedule, denoiser, obs, x_init, t, anchor, config,
                          nullptr);
}

std::vector<VisitEvent> build_visit_plan(int T, int tau, int K) {
    if (T < 1) throw std::invalid_argument("visit plan: T must be >= 1");
    if (tau < 1) throw std::invalid_argument("visit plan: tau must be >= 1");
    if (K < 0) throw std::invalid_argument("visit plan: K must be >= 0");
    std::vector<VisitEvent> plan;
    int t = T;
    int k = K;
    while (t != 0) {
        plan.push_back({VisitEvent::Type::Step, t});
        --t;
        if (t % tau == 0 && t + tau <= T) {
            if (k > 0) {
                plan.push_back({VisitEvent::Type::Rewind, t});
                t += tau;
                --k;
            } else {
                k = K;
            }
        }
    }
    return plan;
}

namespace {

void validate_run_inputs(const NoiseSchedule& schedule, const Denoiser& denoiser,
                         const Observation& obs, const CoPaintConfig& config) {
    if (config.T != schedule.T())
        throw std::invalid_argument("run: config.T must equal schedule.T");
    if (config.G < 0 || config.K < 0 || config.tau < 1 || config.H < 1)
        throw std::invalid_argument("run: bad optimizer shape");
    if (!(config.eta0 > 0.0) || !(config.xi_decay > 0.0))
        throw std::invalid_argument("run: bad optimizer scales");
    if (obs.op.input_dim() != denoiser.dim())
        throw std::invalid_argument("run: operator/denoiser dimension mismatch");
    if (obs.s0.size() != obs.op.output_dim())
        throw std::invalid_argument("run: observation length mismatch");
}

void apply_final_projection(const Observation& obs, Eigen::VectorXd& x) {
    if (obs.op.kind() == RevealOperator::Kind::PixelMask) {
        const auto& idx = obs.op.revealed_indices();
        for (std::size_t j = 0; j < idx.size(); ++j)
            x[idx[j]] = obs.s0[static_cast<Eigen::Index>(j)];
    } else {
        x += obs.op.pinv_apply(obs.s0 - obs.op.apply(x));
    }
}

}  // namespace

RunResult copaint_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                      const Observation& obs, const CoPaintConfig& config,
                      Rng& rng) {
    validate_run_inputs(schedule, denoiser, obs, config);
    const auto start = std::chrono::steady_clock::now();
    const int n = denoiser.dim();

    RunResult result;
    Eigen::VectorXd x = rng.normal_vector(n);
    std::optional<Anchor> anchor;
    int visit = 0;

    for (const VisitEvent& ev : build_visit_plan(config.T, config.tau, config.K)) {
        if (ev.type == VisitEvent::Type::Step) {
            VisitStats stats;
            x = optimize_visit(schedule, denoiser, obs, std::move(x), ev.t,
                               anchor, config, &stats);
            result.record.entries.push_back({visit++, ev.t, stats.loss_pre,
                                             stats.loss_post, stats.residual,
                                             anchor});
            DdimStepResult step = ddim_step(schedule, denoiser, x, ev.t, rng);
            anchor = Anchor{step.mu_tilde, schedule.sigma2(ev.t)};
            x = std::move(step.x_prev);
        } else {
            double ratio =
                schedule.alpha_bar(ev.t + config.tau) / schedule.alpha_bar(ev.t);
            Eigen::VectorXd mu_fwd = std::sqrt(ratio) * x;
            x = mu_fwd + std::sqrt(1.0 - ratio) * rng.normal_vector(n);
            anchor = Anchor{std::move(mu_fwd), 1.0 - ratio};
        }
        if (!x.allFinite())
            throw NumericError("copaint_run: non-finite state at step " +
                               std::to_string(ev.t));
    }

    if (config.final_projection.value_or(obs.op.kind() ==
                                         RevealOperator::Kind::PixelMask))
        apply_final_projection(obs, x);

    result.record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.record.x0 = x;
    result.x0 = std::move(x);
    return result;
}

RunResult prototype_run(const NoiseSchedule& schedule, const Denoiser& denoiser,
                        const Observation& obs, const CoPaintConfig& config,
                        Rng& rng) {
    validate_run_inputs(schedule, denoiser, obs, config);
    if (schedule.T() > 100)
        throw std::invalid_argument("prototype_run: desk scale only (T <= 100)");
    if (!(config.prototype_xi > 0.0) || config.prototype_steps < 0)
        throw std::invalid_argument("prototype_run: bad prototype knobs");

    const auto start = std::chrono::steady_clock::now();
    const double xi2 = config.prototype_xi * config.prototype_xi;
    const double lr =
        config.prototype_lr > 0.0 ? config.prototype_lr : 0.5 * xi2;
    const int T = schedule.T();

    RunResult result;
    Eigen::VectorXd x = rng.normal_vector(denoiser.dim());

    auto evaluate = [&](const Eigen::VectorXd& at) {
        X0Trace trace = rollout_deterministic(schedule, denoiser, at, T);
        Eigen::VectorXd residual = obs.op.apply(trace.x0) - obs.s0;
        double loss = 0.5 * at.squaredNorm() + residual.squaredNorm() / (2.0 * xi2);
        return std::tuple<X0Trace, Eigen::VectorXd, double>(
            std::move(trace), std::move(residual), loss);
    };

    auto [trace, residual, loss] = evaluate(x);
    for (int i = 0; i < config.prototype_steps; ++i) {
        Eigen::VectorXd grad =
            x + estimate_x0_vjp(trace, schedule, denoiser,
                                obs.op.adjoint(residual)) /
                    xi2;
        if (!grad.allFinite())
            throw NumericError("prototype_run: non-finite gradient at iteration " +
                               std::to_string(i));
        x -= lr * grad;
        auto [next_trace, next_residual, next_loss] = evaluate(x);
        if (!std::isfinite(next_loss))
            throw NumericError("prototype_run: non-finite loss at iteration " +
                               std::to_string(i));
        result.record.entries.push_back(
            {i, T, loss, next_loss, next_residual.norm(), std::nullopt});
        trace = std::move(next_trace);
        residual = std::move(next_residual);
        loss = next_loss;
    }

    result.record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.record.x0 = trace.x0;
    result.x0 = std::move(trace.x0);
    return result;
}

Method parse_method(const std::string& name) {
    if (name == "copaint") return Method::Copaint;
    if (name == "copaint-tt") return Method::CopaintTT;
    if (name == "copaint-fast") return Method::CopaintFast;
    if (name == "blended") return Method::Blended;
    if (name == "ddnm") return Method::Ddnm;
    if (name == "repaint-lite") return Method::RepaintLite;
    throw std::invalid_argument("unknown method '" + name + "'");
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Copaint: return "copaint";
        case Method::CopaintTT: return "copaint-tt";
        case Method::CopaintFast: return "copaint-fast";
        case Method::Blended: return "blended";
        case Method::Ddnm: return "ddnm";
        case Method::RepaintLite: return "repaint-lite";
    }
    throw std::invalid_argument("unknown method enum");
}

CoPaintConfig preset_config(Method method, CoPaintConfig base) {
    switch (method) {
        case Method::Copaint:
            base.K = 0;
            break;
        case Method::CopaintTT:
            base.tau = 10;
            base.K = 1;
            break;
        case Method::CopaintFast:
            base.G = 1;
            base.T = 100;
            base.K = 0;
            break;
        case Method::Blended:
        case Method::Ddnm:
            base.K = 0;
            break;
        case Method::RepaintLite:
            base.tau = 10;
            base.K = 1;
            break;
    }
    return base;
}

}  // namespace copaint
