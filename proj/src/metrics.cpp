#include "copaint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "copaint/sampler.hpp"

namespace copaint {

ConstraintError constraint_error(const Observation& obs,
                                 const Eigen::VectorXd& x0) {
    if (x0.size() != obs.op.input_dim())
        throw std::invalid_argument("constraint_error: dimension mismatch");
    Eigen::ArrayXd dev = (obs.s0 - obs.op.apply(x0)).array().abs();
    ConstraintError err;
    err.mean_abs = dev.size() == 0 ? 0.0 : dev.mean();
    err.max_abs = dev.size() == 0 ? 0.0 : dev.maxCoeff();
    return err;
}

double coherence_error_mirror(const Eigen::VectorXd& x0) {
    const Eigen::Index n = x0.size();
    if (n % 2 != 0)
        throw std::invalid_argument(
            "coherence_error_mirror: even dimension required");
    double total = 0.0;
    for (Eigen::Index i = 0; i < n / 2; ++i)
        total += std::abs(x0[i] - x0[n - 1 - i]);
    return total / static_cast<double>(n / 2);
}

std::vector<std::pair<int, double>> gap_trajectory(const NoiseSchedule& schedule,
                                                   const Denoiser& denoiser,
                                                   int n_runs, Rng& rng) {
    if (n_runs < 1)
        throw std::invalid_argument("gap_trajectory: n_runs must be >= 1");
    const int T = schedule.T();
    const double root_n = std::sqrt(static_cast<double>(denoiser.dim()));
    std::vector<double> sums(static_cast<std::size_t>(T), 0.0);

    for (int run = 0; run < n_runs; ++run) {
        Eigen::VectorXd x_top = rng.normal_vector(denoiser.dim());
        X0Trace trace = rollout_deterministic(schedule, denoiser, x_top, T);
        for (std::size_t j = 0; j < trace.ts.size(); ++j) {
            Eigen::VectorXd est = denoiser.value(trace.xs[j], trace.ts[j]);
            sums[static_cast<std::size_t>(trace.ts[j] - 1)] +=
                (est - trace.x0).norm() / root_n;
        }
    }

    std::vector<std::pair<int, double>> curve;
    curve.reserve(static_cast<std::size_t>(T));
    for (int t = T; t >= 1; --t)
        curve.emplace_back(t, sums[static_cast<std::size_t>(t - 1)] /
                                  static_cast<double>(n_runs));
    return curve;
}

double calibrate_xi(const NoiseSchedule& schedule, const Denoiser& denoiser,
                    const RevealOperator& op, int t, int n_samples, Rng& rng) {
    if (n_samples < 1)
        throw std::invalid_argument("calibrate_xi: n_samples must be >= 1");
    if (t < 1 || t > schedule.T())
        throw std::invalid_argument("calibrate_xi: step out of range");
    if (op.input_dim() != denoiser.dim())
        throw std::invalid_argument("calibrate_xi: dimension mismatch");

    double total = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd x = rng.normal_vector(denoiser.dim());
        Eigen::VectorXd est_at_t;
        for (int step = schedule.T(); step >= 1; --step) {
            DdimStepResult r = ddim_step(schedule, denoiser, x, step, rng);
            if (step == t) est_at_t = std::move(r.x0_hat);
            x = std::move(r.x_prev);
        }
        total += (op.apply(est_at_t) - op.apply(x)).squaredNorm() /
                 static_cast<double>(op.output_dim());
    }
    return total / static_cast<double>(n_samples);
}

MetricReport make_report(const Observation& obs, const Eigen::VectorXd& x0) {
    MetricReport report;
    ConstraintError err = constraint_error(obs, x0);
    report.constraint_mean_abs = err.mean_abs;
    report.constraint_max_abs = err.max_abs;
    report.coherence_error =
        x0.size() % 2 == 0 ? coherence_error_mirror(x0) : 0.0;
    return report;
}

double median(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("median: empty sample");
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace copaint
